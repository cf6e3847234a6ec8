"""Standard objects: hypergeometric GKZ data, model equations, surfaces.

The F2 Euler integrand has factors (1 - u), (1 - v), (1 - x u - y v); the
first two are padded with an extra zero-coefficient constant column so the
slice can pin the spare coefficients to zero.  The F4 integrand has
factors (1 - x u - y v) and (u + v - u v) plus the pure monomial weights.
"""

from __future__ import annotations

from projlaplace import appell
from projlaplace.gkz import ExponentData, GkzData, ReductionPlan, cayley
from projlaplace.hyper2 import HyperbolicEq, epd_equation, harmonic_equation
from projlaplace.rank4 import AsymptoticSystem
from projlaplace.symexpr import VarTable

__all__ = [
    "f2_exponent_data",
    "f2_gkz_data",
    "f2_reduction_plan",
    "f2_reference_lattice",
    "f4_exponent_data",
    "f4_gkz_data",
    "f4_reduction_plan",
    "epd_preset",
    "harmonic_preset",
    "quadric_preset",
    "deformed_quadric_preset",
    "ruled_preset",
]

# Lattice generators as displayed for the F2 matrix; rows 0 and 1 define
# the variables y and x respectively.
F2_REFERENCE_LATTICE = (
    (0, 0, 0, 1, 0, -1, -1, 0, 1),
    (1, -1, 0, 0, 0, 0, -1, 1, 0),
    (0, 0, 0, -1, 1, 0, 0, 0, 0),
    (-1, 0, 1, 0, 0, 0, 0, 0, 0),
)


def f2_reference_lattice():
    return [list(v) for v in F2_REFERENCE_LATTICE]


def f2_exponent_data() -> ExponentData:
    # 1 - u (+ spare constant), 1 - v (+ spare constant), 1 - x u - y v
    return ExponentData(
        blocks=(
            ((0, 1, 0), (0, 0, 0)),
            ((0, 0, 0), (0, 0, 1)),
            ((0, 1, 0), (0, 0, 1)),
        ),
        k=2,
    )


def f2_gkz_data() -> GkzData:
    T = appell.F2_TABLE
    al, b1, b2, g1, g2 = (T.var(n) for n in ("alpha", "beta1", "beta2", "gamma1", "gamma2"))
    gamma = (g1 - b1 - 1, g2 - b2 - 1, -al, -b1, -b2)
    return GkzData(A=cayley(f2_exponent_data()), gamma=gamma, lattice=F2_REFERENCE_LATTICE, m=3, k=2)


def f2_reduction_plan() -> ReductionPlan:
    T = appell.F2_TABLE
    one = T.one
    zero = T.zero
    x, y = T.var("x"), T.var("y")
    return ReductionPlan(
        variable_defs=(("x", 1), ("y", 0)),
        slice={0: one, 1: one, 2: zero, 3: one, 4: zero, 5: one, 6: one, 7: x, 8: y},
    )


def f4_exponent_data() -> ExponentData:
    # 1 - x u - y v and u + v - u v
    return ExponentData(
        blocks=(
            ((0, 1, 0), (0, 0, 1)),
            ((1, 0, 1), (0, 1, 1)),
        ),
        k=2,
    )


# Row 0 carries the x monomial v2 v5 / (v1 v6), row 1 the y monomial
# v3 v4 / (v1 v6); the computed kernel basis spans the same lattice.
F4_REFERENCE_LATTICE = (
    (-1, 1, 0, 0, 1, -1),
    (-1, 0, 1, 1, 0, -1),
)


def f4_gkz_data() -> GkzData:
    T = appell.F4_TABLE
    al, be, g1, g2 = (T.var(n) for n in ("alpha", "beta", "gamma1", "gamma2"))
    gamma = (-be, g1 + g2 - al - 2, g2 - al - 1, g1 - al - 1)
    return GkzData(A=cayley(f4_exponent_data()), gamma=gamma, lattice=F4_REFERENCE_LATTICE, m=2, k=2)


def f4_reduction_plan() -> ReductionPlan:
    T = appell.F4_TABLE
    one = T.one
    x, y = T.var("x"), T.var("y")
    return ReductionPlan(
        variable_defs=(("x", 0), ("y", 1)),
        slice={0: one, 1: x, 2: y, 3: one, 4: one, 5: one},
    )


def epd_preset() -> HyperbolicEq:
    T = VarTable(coords=("x", "y"), params=("beta", "beta_p"))
    return epd_equation(T.var("beta"), T.var("beta_p"))


def harmonic_preset() -> HyperbolicEq:
    T = VarTable(coords=("x", "y"), params=("alpha", "beta"))
    return harmonic_equation(T.var("alpha"), T.var("beta"))


def quadric_preset() -> AsymptoticSystem:
    T = VarTable(coords=("x", "y"))
    zero = T.zero
    return AsymptoticSystem(b=zero, c=zero, p=zero, q=zero)


def deformed_quadric_preset(p_expr: str = "x", q_expr: str = "y + 2") -> AsymptoticSystem:
    """Integrable canonical system z_xx = p(x) z, z_yy = q(y) z.

    The underlying surface is still a quadric (b = c = 0), but generic
    univariate p and q make the Laplace invariants of its conjugate
    transports nonzero.
    """
    T = VarTable(coords=("x", "y"))
    p = T.parse(p_expr)
    q = T.parse(q_expr)
    zero = T.zero
    if not set(p.support) <= {"x"} or not set(q.support) <= {"y"}:
        raise ValueError("integrability needs p = p(x) and q = q(y)")
    return AsymptoticSystem(b=zero, c=zero, p=p, q=q)


def ruled_preset() -> AsymptoticSystem:
    """Canonical system of a singly ruled surface: linear in y fibers."""
    T = VarTable(coords=("x", "y"))
    x, y = T.var("x"), T.var("y")
    alpha_x, beta_x, gamma_x, delta_x = x, T.one, x * x, x
    return AsymptoticSystem(
        b=alpha_x * y**2 + beta_x * y + gamma_x,
        c=T.zero,
        p=-alpha_x * y + delta_x,
        q=T.zero,
    )

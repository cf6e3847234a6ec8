"""Rank-4 hypergeometric systems and their numeric verification.

Symbolic side: the two bivariate hypergeometric systems of rank 4 in
their normal form, their conjugate-coordinate forms obtained by
transporting along the rational maps

    T2: (x, y) = (1/s, 1 - t/s)            with gauge s^alpha (s-t)^(1-gamma2)
    T4: (x, y) = (1/(s+t)^2, (s-t)^2/(s+t)^2)
                                with gauge (s+t)^(alpha+beta-1/2) (s-t)^(1/2-gamma2)

the closed-form invariant sequence of the first family, and the conformal
equivalence between the two surfaces.

Numeric side: double power-series evaluation with a shell-tail stopping
rule, residuals of the truncated series in the governing systems, and the
Euler integral transform relating the first family to the Gauss series
along the T2 coordinates (Gauss-Jacobi quadrature absorbs the endpoint
singularities of the kernel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.special import roots_jacobi

from projlaplace.hyper2 import InvariantPair
from projlaplace.rank4 import ConjugateSystem, GeneralSystem, fundamental_form, transport
from projlaplace.symexpr import PowerProduct, RatExpr, VarTable

__all__ = [
    "F2_TABLE",
    "F2_CONJUGATE_TABLE",
    "F4_TABLE",
    "F4_CONJUGATE_TABLE",
    "AppellParams",
    "SeriesValue",
    "ClosedInvariants",
    "ConformalReport",
    "EulerTransformReport",
    "system",
    "conjugate_form",
    "t2_map",
    "t4_map",
    "f2_closed_invariants",
    "conformal_equivalence_check",
    "series_eval",
    "pde_residual",
    "euler_transform_check",
]

F2_TABLE = VarTable(coords=("x", "y"), params=("alpha", "beta1", "beta2", "gamma1", "gamma2"))
F2_CONJUGATE_TABLE = VarTable(coords=("s", "t"), params=("alpha", "beta1", "beta2", "gamma1", "gamma2"))
F4_TABLE = VarTable(coords=("x", "y"), params=("alpha", "beta", "gamma1", "gamma2"))
F4_CONJUGATE_TABLE = VarTable(coords=("s", "t"), params=("alpha", "beta", "gamma1", "gamma2"))

_FAMILIES = ("F2", "F3", "F4", "Gauss")


def system(family: str) -> GeneralSystem:
    """Rank-4 system annihilating the family, in the coupled normal form.

    Each displayed second-order equation is solved for its pure second
    derivative; the mixed-term coefficient becomes l (first row) resp. m
    (second row).
    """
    if family == "F2":
        T = F2_TABLE
        x, y = T.var("x"), T.var("y")
        al, b1, b2, g1, g2 = (T.var(n) for n in ("alpha", "beta1", "beta2", "gamma1", "gamma2"))
        dx = x * (1 - x)
        dy = y * (1 - y)
        return GeneralSystem(
            ell=y / (1 - x),
            a=-(g1 - (al + b1 + 1) * x) / dx,
            b=b1 * y / dx,
            p=al * b1 / dx,
            m=x / (1 - y),
            c=b2 * x / dy,
            f=-(g2 - (al + b2 + 1) * y) / dy,
            q=al * b2 / dy,
        )
    if family == "F4":
        T = F4_TABLE
        x, y = T.var("x"), T.var("y")
        al, be, g1, g2 = (T.var(n) for n in ("alpha", "beta", "gamma1", "gamma2"))
        w = x + y - 1
        return GeneralSystem(
            ell=-2 * y / w,
            a=-((al + be + 1) * x + g1 * (y - 1)) / (x * w),
            b=-y * (al + be - g2 + 1) / (x * w),
            p=-al * be / (x * w),
            m=-2 * x / w,
            c=-x * (al + be - g1 + 1) / (y * w),
            f=-((al + be + 1) * y + g2 * (x - 1)) / (y * w),
            q=-al * be / (y * w),
        )
    raise ValueError(f"no rank-4 system for family {family!r}")


def t2_map() -> tuple[RatExpr, RatExpr, PowerProduct]:
    """Forward map and gauge producing conjugate coordinates for F2."""
    T = F2_CONJUGATE_TABLE
    s, t = T.var("s"), T.var("t")
    gauge = PowerProduct(T, ((s, T.var("alpha")), (s - t, 1 - T.var("gamma2"))))
    return 1 / s, 1 - t / s, gauge


def t4_map() -> tuple[RatExpr, RatExpr, PowerProduct]:
    """Forward map and gauge producing conjugate coordinates for F4."""
    T = F4_CONJUGATE_TABLE
    s, t = T.var("s"), T.var("t")
    half = T.const(Fraction(1, 2))
    gauge = PowerProduct(
        T,
        (
            (s + t, T.var("alpha") + T.var("beta") - half),
            (s - t, half - T.var("gamma2")),
        ),
    )
    return 1 / (s + t) ** 2, (s - t) ** 2 / (s + t) ** 2, gauge


def conjugate_form(family: str) -> ConjugateSystem:
    """Conjugate-coordinate system of the family, via transport."""
    if family == "F2":
        x_map, y_map, gauge = t2_map()
    elif family == "F4":
        x_map, y_map, gauge = t4_map()
    else:
        raise ValueError(f"no conjugate form for family {family!r}")
    return transport(system(family), x_map, y_map, gauge, target="conjugate")


@dataclass(frozen=True)
class ClosedInvariants:
    """Closed-form invariant pair for the F2 sequence at index n.

    Indexing note: the closed forms are offset by one step from the
    recursion seeded at the conjugate system itself; ``closed(n)`` equals
    the recursion value at step ``n - 1`` (so n = 1 reproduces the
    invariants of the untransformed system).
    """

    pair: InvariantPair
    index: int
    recursion_index: int


def f2_closed_invariants(n: int) -> ClosedInvariants:
    T = F2_CONJUGATE_TABLE
    b2, g2 = T.var("beta2"), T.var("gamma2")
    d2 = (T.var("s") - T.var("t")) ** 2
    h = (b2 + (n - 1)) * (b2 - g2 + n) / d2
    k = (b2 + (n - 2)) * (b2 - g2 + (n - 1)) / d2
    return ClosedInvariants(pair=InvariantPair(h=h, k=k), index=n, recursion_index=n - 1)


@dataclass(frozen=True)
class ConformalReport:
    proportional: bool
    factor: RatExpr | None
    pulled_back: tuple
    reference: tuple
    notes: tuple[str, ...] = ()


def _pullback_form(form, u_map: RatExpr, v_map: RatExpr, table_from: VarTable):
    """Pull a symmetric 2-form (A, B, C) back along (u, v) = T(x, y)."""
    fx, fy = table_from.coords
    forward = {fx: u_map, fy: v_map}
    A = form[0].subs(forward)
    B = form[1].subs(forward)
    C = form[2].subs(forward)
    x, y = u_map.table.coords
    ux, uy = u_map.diff(x), u_map.diff(y)
    vx, vy = v_map.diff(x), v_map.diff(y)
    return (
        A * ux * ux + 2 * B * ux * vx + C * vx * vx,
        A * ux * uy + B * (ux * vy + uy * vx) + C * vx * vy,
        A * uy * uy + 2 * B * uy * vy + C * vy * vy,
    )


def _proportional(form, reference):
    """Return the single rational factor with form = factor * reference."""
    factor = None
    for lhs, rhs in zip(form, reference):
        if rhs.is_zero:
            if not lhs.is_zero:
                return None
            continue
        candidate = lhs / rhs
        if factor is None:
            factor = candidate
        elif factor != candidate:
            return None
    return factor


def conformal_equivalence_check(perturb_exponent: int = 2) -> ConformalReport:
    """Verify that the rational map between the two surfaces matches their
    conformal structures.

    The map (u, v) = (x^2/(x+y-2)^2, y^2/(x+y-2)^2) pulls the second
    fundamental form of the second family back to a rational multiple of
    the first family's.  ``perturb_exponent`` other than 2 is available to
    demonstrate failure witnesses.
    """
    h2 = fundamental_form(system("F2"))
    h4 = fundamental_form(system("F4"))
    T = F2_TABLE
    x, y = T.var("x"), T.var("y")
    w = x + y - 2
    e = perturb_exponent
    u_map = x**e / w**e
    v_map = y**e / w**e
    # The second family's form is parameter-free, so it restates over the
    # first family's table by variable name.
    h4_in_t = tuple(coeff.subs({"x": x, "y": y}) for coeff in h4)
    pulled = _pullback_form(h4_in_t, u_map, v_map, T)
    factor = _proportional(pulled, h2)
    notes = []
    if factor is not None:
        notes.append("pullback of the second form is a single rational multiple of the first")
    return ConformalReport(
        proportional=factor is not None,
        factor=factor,
        pulled_back=pulled,
        reference=h2,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Numeric series evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AppellParams:
    """Family tag plus named parameter values (rationals or floats)."""

    family: str
    values: dict

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        for name in _lower_parameter_names(self.family):
            v = self.values[name]
            if float(v) <= 0 and float(v) == int(v):
                raise ValueError(f"lower parameter {name} must not be a nonpositive integer")


def _lower_parameter_names(family: str):
    return {
        "Gauss": ("gamma",),
        "F2": ("gamma1", "gamma2"),
        "F3": ("gamma",),
        "F4": ("gamma1", "gamma2"),
    }[family]


@dataclass(frozen=True)
class SeriesValue:
    value: float
    terms_used: int
    tail_bound: float


class SeriesError(ArithmeticError):
    """Series did not meet the tolerance within the term budget."""


def _inside_box(family: str, point) -> bool:
    if family == "Gauss":
        return abs(point) <= 0.9
    x, y = point
    if family in ("F2", "F3"):
        return abs(x) <= 0.45 and abs(y) <= 0.45
    return math.sqrt(abs(x)) + math.sqrt(abs(y)) <= 0.9


def _pochhammer_row(z: float, count: int) -> list[float]:
    out = [1.0]
    for i in range(count):
        out.append(out[-1] * (z + i))
    return out


def _series_term_table(params: AppellParams, degree: int):
    """Coefficients c[m][n] for total degree <= degree."""
    v = {k: float(val) for k, val in params.values.items()}
    N = degree + 1
    fact = _pochhammer_row(1.0, N)
    if params.family == "Gauss":
        a = _pochhammer_row(v["alpha"], N)
        b = _pochhammer_row(v["beta"], N)
        g = _pochhammer_row(v["gamma"], N)
        return [[a[m] * b[m] / (g[m] * fact[m])] for m in range(N)]
    if params.family == "F2":
        a = _pochhammer_row(v["alpha"], 2 * N)
        b1 = _pochhammer_row(v["beta1"], N)
        b2 = _pochhammer_row(v["beta2"], N)
        g1 = _pochhammer_row(v["gamma1"], N)
        g2 = _pochhammer_row(v["gamma2"], N)
        return [
            [a[m + n] * b1[m] * b2[n] / (g1[m] * g2[n] * fact[m] * fact[n]) for n in range(N)]
            for m in range(N)
        ]
    if params.family == "F3":
        a1 = _pochhammer_row(v["alpha1"], N)
        a2 = _pochhammer_row(v["alpha2"], N)
        b1 = _pochhammer_row(v["beta1"], N)
        b2 = _pochhammer_row(v["beta2"], N)
        g = _pochhammer_row(v["gamma"], 2 * N)
        return [
            [a1[m] * a2[n] * b1[m] * b2[n] / (g[m + n] * fact[m] * fact[n]) for n in range(N)]
            for m in range(N)
        ]
    a = _pochhammer_row(v["alpha"], 2 * N)
    b = _pochhammer_row(v["beta"], 2 * N)
    g1 = _pochhammer_row(v["gamma1"], N)
    g2 = _pochhammer_row(v["gamma2"], N)
    return [
        [a[m + n] * b[m + n] / (g1[m] * g2[n] * fact[m] * fact[n]) for n in range(N)]
        for m in range(N)
    ]


def series_eval(params: AppellParams, point, tol: float = 1e-12, max_terms: int = 200) -> SeriesValue:
    """Sum the series by total-degree shells until the shell magnitude
    drops below ``tol``; the last shell magnitude is the tail bound."""
    if not _inside_box(params.family, point):
        raise ValueError("evaluation point is outside the convergence-safe box")
    coeffs = _series_term_table(params, max_terms)
    if params.family == "Gauss":
        x = float(point)
        total = 0.0
        xp = 1.0
        for m in range(max_terms + 1):
            shell = coeffs[m][0] * xp
            total += shell
            xp *= x
            if abs(shell) <= tol:
                return SeriesValue(value=total, terms_used=m, tail_bound=abs(shell))
        raise SeriesError("no convergence within max_terms")
    x, y = float(point[0]), float(point[1])
    xpow = [1.0]
    ypow = [1.0]
    for _ in range(max_terms):
        xpow.append(xpow[-1] * x)
        ypow.append(ypow[-1] * y)
    total = 0.0
    for d in range(max_terms + 1):
        shell = 0.0
        for m in range(d + 1):
            n = d - m
            shell += coeffs[m][n] * xpow[m] * ypow[n]
        total += shell
        if abs(shell) <= tol and d >= 1:
            return SeriesValue(value=total, terms_used=d, tail_bound=abs(shell))
    raise SeriesError("no convergence within max_terms")


# ---------------------------------------------------------------------------
# Residuals of truncated series in the governing systems
# ---------------------------------------------------------------------------


def _partial_sums(params: AppellParams, point, truncation: int):
    """Truncated series value and derivatives up to second order."""
    coeffs = _series_term_table(params, truncation)
    x, y = float(point[0]), float(point[1])
    F = Fx = Fy = Fxx = Fyy = Fxy = 0.0
    for m in range(truncation + 1):
        for n in range(truncation + 1):
            c = coeffs[m][n]
            if c == 0.0:
                continue
            xm = x**m
            yn = y**n
            F += c * xm * yn
            if m >= 1:
                Fx += c * m * x ** (m - 1) * yn
            if n >= 1:
                Fy += c * n * xm * y ** (n - 1)
            if m >= 2:
                Fxx += c * m * (m - 1) * x ** (m - 2) * yn
            if n >= 2:
                Fyy += c * n * (n - 1) * xm * y ** (n - 2)
            if m >= 1 and n >= 1:
                Fxy += c * m * n * x ** (m - 1) * y ** (n - 1)
    return F, Fx, Fy, Fxx, Fxy, Fyy


def pde_residual(family: str, values: dict, point, truncation: int) -> float:
    """Max absolute residual of the truncated series in the family's system."""
    if family == "Gauss":
        v = {k: float(val) for k, val in values.items()}
        x = float(point)
        coeffs = _series_term_table(AppellParams("Gauss", values), truncation)
        F = dF = d2F = 0.0
        for m in range(truncation + 1):
            c = coeffs[m][0]
            F += c * x**m
            if m >= 1:
                dF += c * m * x ** (m - 1)
            if m >= 2:
                d2F += c * m * (m - 1) * x ** (m - 2)
        res = x * (1 - x) * d2F + (v["gamma"] - (v["alpha"] + v["beta"] + 1) * x) * dF - v["alpha"] * v["beta"] * F
        return abs(res)
    params = AppellParams(family, values)
    if not _inside_box(family, point):
        raise ValueError("evaluation point is outside the convergence-safe box")
    v = {k: float(val) for k, val in values.items()}
    x, y = float(point[0]), float(point[1])
    F, Fx, Fy, Fxx, Fxy, Fyy = _partial_sums(params, point, truncation)
    if family == "F2":
        r1 = (
            x * (1 - x) * Fxx
            - x * y * Fxy
            + (v["gamma1"] - (v["alpha"] + v["beta1"] + 1) * x) * Fx
            - v["beta1"] * y * Fy
            - v["alpha"] * v["beta1"] * F
        )
        r2 = (
            y * (1 - y) * Fyy
            - x * y * Fxy
            + (v["gamma2"] - (v["alpha"] + v["beta2"] + 1) * y) * Fy
            - v["beta2"] * x * Fx
            - v["alpha"] * v["beta2"] * F
        )
        return max(abs(r1), abs(r2))
    if family == "F4":
        ab1 = v["alpha"] + v["beta"] + 1
        r1 = (
            x * (x + y - 1) * Fxx
            + 2 * x * y * Fxy
            + (ab1 * x + v["gamma1"] * (y - 1)) * Fx
            + y * (v["alpha"] + v["beta"] - v["gamma2"] + 1) * Fy
            + v["alpha"] * v["beta"] * F
        )
        r2 = (
            y * (x + y - 1) * Fyy
            + 2 * x * y * Fxy
            + x * (v["alpha"] + v["beta"] - v["gamma1"] + 1) * Fx
            + (ab1 * y + v["gamma2"] * (x - 1)) * Fy
            + v["alpha"] * v["beta"] * F
        )
        return max(abs(r1), abs(r2))
    raise ValueError(f"no residual check for family {family!r}")


# ---------------------------------------------------------------------------
# Euler integral transform check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EulerTransformReport:
    lhs: float
    rhs: float
    abs_error: float
    tol: float
    passed: bool
    quadrature_points: int


def euler_transform_check(values: dict, s: float, t: float, tol: float = 1e-6, nodes: int = 80) -> EulerTransformReport:
    """Check the integral identity tying the double series at
    (1/s, 1 - t/s) to a weighted Gauss-series integral over u in (t, s).

    Requires gamma1 > beta1 > 0, gamma2 > beta2 > 0 and s > t > 1 so that
    all branch choices are real and the inner series argument 1/u stays in
    the unit disc.  The kernel's endpoint singularities are absorbed by a
    Gauss-Jacobi rule after the affine substitution u = t + (s - t) tau.
    """
    al, b1, b2 = float(values["alpha"]), float(values["beta1"]), float(values["beta2"])
    g1, g2 = float(values["gamma1"]), float(values["gamma2"])
    if not (g1 > b1 > 0 and g2 > b2 > 0):
        raise ValueError("hypothesis requires gamma_i > beta_i > 0")
    if not (s > t > 1):
        raise ValueError("requires s > t > 1 for real-positive branches")
    lhs = series_eval(
        AppellParams("F2", values),
        (1.0 / s, 1.0 - t / s),
        tol=1e-14,
        max_terms=400,
    ).value
    gauss_params = AppellParams("Gauss", {"alpha": al, "beta": b1, "gamma": g1})

    def smooth(u: float) -> float:
        return u ** (-al) * series_eval(gauss_params, 1.0 / u, tol=1e-14, max_terms=400).value

    # integral over (t, s) of (s-u)^(b2-1) (u-t)^(g2-b2-1) smooth(u) du
    # with u = t + (s - t) tau:  (s-t)^(g2-1) * B-weighted integral on (0,1).
    # Gauss-Jacobi on [-1, 1] with weight (1-xi)^(b2-1) (1+xi)^(g2-b2-1).
    xi, wts = roots_jacobi(nodes, b2 - 1.0, g2 - b2 - 1.0)
    integral01 = 0.0
    for node, weight in zip(xi, wts):
        tau = 0.5 * (node + 1.0)
        u = t + (s - t) * tau
        integral01 += weight * smooth(u)
    integral01 *= 0.5 ** (g2 - 1.0)
    # orientation flip from the (s -> t) form absorbs the leading minus sign
    prefactor = math.gamma(g2) / (math.gamma(b2) * math.gamma(g2 - b2))
    rhs = prefactor * s**al * (s - t) ** (1.0 - g2) * (s - t) ** (g2 - 1.0) * integral01
    err = abs(lhs - rhs)
    return EulerTransformReport(
        lhs=lhs,
        rhs=rhs,
        abs_error=err,
        tol=tol,
        passed=err <= tol,
        quadrature_points=nodes,
    )

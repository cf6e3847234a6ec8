"""Second-order hyperbolic PDE in the plane and their Laplace invariants.

Equations are kept in the normal form ``z_xy + a z_x + b z_y + c z = 0``
with exact rational coefficients in two coordinates.  The module provides
the covariant transformations (unknown rescaling and separable coordinate
changes), the invariant pair (h, k), the recursion for higher invariants,
and the two classical model equations.

Convention for rescaling: ``gauge_transform(eq, f)`` returns the equation
satisfied by the new unknown ``w`` defined through ``z = f * w``.  With
this reading the transformed coefficients are exactly

    a + (log f)_y,  b + (log f)_x,  c + a (log f)_x + b (log f)_y + f_xy / f.
"""

from __future__ import annotations

from dataclasses import dataclass

from projlaplace.symexpr import PowerProduct, RatExpr, VarTable

__all__ = [
    "HyperbolicEq",
    "InvariantPair",
    "DegenerateTransformError",
    "laplace_invariants",
    "gauge_transform",
    "coordinate_change",
    "higher_invariants",
    "epd_equation",
    "harmonic_equation",
]


class DegenerateTransformError(ValueError):
    """A Laplace invariant vanished; the transform at ``index`` degenerates."""

    def __init__(self, index: int, which: str):
        super().__init__(f"invariant {which} vanishes at recursion index {index}: degenerate Laplace transform")
        self.index = index
        self.which = which


@dataclass(frozen=True)
class HyperbolicEq:
    """Coefficients of ``z_xy + a z_x + b z_y + c z = 0``."""

    a: RatExpr
    b: RatExpr
    c: RatExpr

    def __post_init__(self):
        table = self.a.table
        if self.b.table != table or self.c.table != table:
            raise ValueError("coefficients must share one VarTable")
        if len(table.coords) != 2:
            raise ValueError("hyperbolic equations need exactly two coordinates")

    @property
    def table(self) -> VarTable:
        return self.a.table

    @property
    def x(self) -> str:
        return self.table.coords[0]

    @property
    def y(self) -> str:
        return self.table.coords[1]


@dataclass(frozen=True)
class InvariantPair:
    """Positive (h) and negative (k) Laplace invariants."""

    h: RatExpr
    k: RatExpr


def laplace_invariants(eq: HyperbolicEq) -> InvariantPair:
    """h = ab + a_x - c,  k = ab + b_y - c."""
    ab = eq.a * eq.b
    return InvariantPair(h=ab + eq.a.diff(eq.x) - eq.c, k=ab + eq.b.diff(eq.y) - eq.c)


def gauge_transform(eq: HyperbolicEq, f: PowerProduct) -> HyperbolicEq:
    """Equation for the rescaled unknown ``w`` with ``z = f w``."""
    lx = f.log_derivative(eq.x)
    ly = f.log_derivative(eq.y)
    # f_xy / f expressed rationally through the logarithmic derivative.
    fxy_over_f = lx.diff(eq.y) + lx * ly
    return HyperbolicEq(
        a=eq.a + ly,
        b=eq.b + lx,
        c=eq.c + eq.a * lx + eq.b * ly + fxy_over_f,
    )


def coordinate_change(
    eq: HyperbolicEq,
    u_of_x: RatExpr,
    v_of_y: RatExpr,
    x_of_u: RatExpr,
    y_of_v: RatExpr,
) -> HyperbolicEq:
    """Separable coordinate change ``(x, y) -> (u = u(x), v = v(y))``.

    Rational maps need not have rational inverses, so the caller supplies
    both directions; the composition is validated symbolically.  The new
    equation is returned in the same two coordinate names, now read as
    ``(u, v)``.
    """
    x, y = eq.x, eq.y
    table = eq.table
    for expr, coord in ((u_of_x, y), (x_of_u, y), (v_of_y, x), (y_of_v, x)):
        if coord in expr.support:
            raise ValueError("separable change must keep each map univariate")
    du_dx = u_of_x.diff(x)
    dv_dy = v_of_y.diff(y)
    if du_dx.is_zero or dv_dy.is_zero:
        raise ValueError("coordinate map is not invertible (vanishing derivative)")
    if u_of_x.subs({x: x_of_u}) != table.var(x):
        raise ValueError("x-map inverse fails validation u(x(u)) = u")
    if v_of_y.subs({y: y_of_v}) != table.var(y):
        raise ValueError("y-map inverse fails validation v(y(v)) = v")
    # dx/du and dy/dv, written in the new coordinates.
    dx_du = x_of_u.diff(x)
    dy_dv = y_of_v.diff(y)
    backward = {x: x_of_u, y: y_of_v}
    return HyperbolicEq(
        a=eq.a.subs(backward) * dy_dv,
        b=eq.b.subs(backward) * dx_du,
        c=eq.c.subs(backward) * dx_du * dy_dv,
    )


def higher_invariants(eq: HyperbolicEq, n_min: int, n_max: int) -> list[InvariantPair]:
    """Invariant pairs of the iterated Laplace transforms for n_min..n_max.

    Index 0 carries the invariants of ``eq`` itself.  Forward steps use
    ``h_{n+1} = 2 h_n - k_n - (log h_n)_xy`` with ``k_{n+1} = h_n``; the
    backward recursion mirrors the roles of h and k.  A vanishing invariant
    aborts with :class:`DegenerateTransformError` carrying the index.
    """
    if n_min > n_max:
        raise ValueError("empty index range")
    x, y = eq.x, eq.y

    def log_mixed(g: RatExpr) -> RatExpr:
        return (g.diff(x) / g).diff(y)

    base = laplace_invariants(eq)
    series: dict[int, InvariantPair] = {0: base}
    current = base
    for n in range(0, n_max):
        if current.h.is_zero:
            raise DegenerateTransformError(n, "h")
        nxt = InvariantPair(h=2 * current.h - current.k - log_mixed(current.h), k=current.h)
        series[n + 1] = nxt
        current = nxt
    current = base
    for n in range(0, -n_min):
        idx = -n
        if current.k.is_zero:
            raise DegenerateTransformError(idx, "k")
        prev = InvariantPair(h=current.k, k=2 * current.k - current.h - log_mixed(current.k))
        series[idx - 1] = prev
        current = prev
    return [series[n] for n in range(n_min, n_max + 1)]


def epd_equation(beta: RatExpr, beta_prime: RatExpr) -> HyperbolicEq:
    """Model equation ``z_xy - beta'/(x-y) z_x - beta/(x-y) z_y = 0``."""
    table = beta.table
    d = table.var(table.coords[0]) - table.var(table.coords[1])
    return HyperbolicEq(a=-beta_prime / d, b=-beta / d, c=table.zero)


def harmonic_equation(alpha: RatExpr, beta: RatExpr) -> HyperbolicEq:
    """Model equation with a = b = 0 and the classical two-pole potential."""
    table = alpha.table
    x = table.var(table.coords[0])
    y = table.var(table.coords[1])
    c = alpha * (alpha - 1) / (x - y) ** 2 - beta * (beta - 1) / (x + y) ** 2
    return HyperbolicEq(a=table.zero, b=table.zero, c=c)

"""Rank-4 linear systems, moving frames, integrability, and transport.

Three normal forms are supported:

* ``GeneralSystem``:    z_xx = l z_xy + a z_x + b z_y + p z,
                        z_yy = m z_xy + c z_x + f z_y + q z
* ``AsymptoticSystem``: z_xx = b z_y + p z,  z_yy = c z_x + q z
* ``ConjugateSystem``:  z_xy + a z_x + b z_y + c z = 0,
                        z_yy + q z_xx + m z_x + n z_y + r z = 0

The moving frame is (z, z_x, z_y, z_xy) for general systems and
(z, z_x, z_y, z_xx) for conjugate ones.  The last row of the connection
form is reconstructed by prolongation: the general frame solves a 2x2
linear system (needs 1 - l m != 0) for z_xxy and z_xyy, while the
conjugate frame obtains z_xxy by differentiating the hyperbolic row and
z_xxx from cross-derivative compatibility of the two rows (needs q != 0).

``transport`` rewrites a system under a rational change of coordinates
given by the forward map only, combined with an unknown rescaling: the
output system is satisfied by w where ``z(X(s,t), Y(s,t)) = gauge * w``.
No inverse map is needed, which matters because the natural conjugate
coordinates of the rank-4 hypergeometric systems have algebraic inverses.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from projlaplace.hyper2 import HyperbolicEq, InvariantPair, laplace_invariants
from projlaplace.symexpr import PowerProduct, RatExpr, VarTable, sum_products

__all__ = [
    "GeneralSystem",
    "AsymptoticSystem",
    "ConjugateSystem",
    "ConnectionForm",
    "CubicData",
    "SurfaceClass",
    "TransportError",
    "connection_form",
    "maurer_cartan_residual",
    "fundamental_form",
    "cubic_invariants",
    "classify",
    "asymptotic_invariants",
    "transport",
]


class TransportError(ValueError):
    """Transport failed: singular Jacobian or unsolvable target normal form."""


def _require_shared_table(exprs) -> VarTable:
    table = exprs[0].table
    for e in exprs[1:]:
        if e.table != table:
            raise ValueError("system coefficients must share one VarTable")
    if len(table.coords) != 2:
        raise ValueError("rank-4 systems need exactly two coordinates")
    return table


@dataclass(frozen=True)
class GeneralSystem:
    """Coefficients of the coupled pair solved for z_xx and z_yy."""

    ell: RatExpr
    a: RatExpr
    b: RatExpr
    p: RatExpr
    m: RatExpr
    c: RatExpr
    f: RatExpr
    q: RatExpr

    def __post_init__(self):
        _require_shared_table(self.coeffs())
        if (1 - self.ell * self.m).is_zero:
            raise ValueError("frame closure requires 1 - l m != 0")

    def coeffs(self):
        return (self.ell, self.a, self.b, self.p, self.m, self.c, self.f, self.q)

    @property
    def table(self) -> VarTable:
        return self.ell.table


@dataclass(frozen=True)
class AsymptoticSystem:
    """Canonical form in asymptotic coordinates (l = m = 0, gauge-reduced)."""

    b: RatExpr
    c: RatExpr
    p: RatExpr
    q: RatExpr

    def __post_init__(self):
        _require_shared_table([self.b, self.c, self.p, self.q])

    @property
    def table(self) -> VarTable:
        return self.b.table

    def as_general(self) -> GeneralSystem:
        zero = self.table.zero
        return GeneralSystem(ell=zero, a=zero, b=self.b, p=self.p, m=zero, c=self.c, f=zero, q=self.q)


@dataclass(frozen=True)
class ConjugateSystem:
    """Hyperbolic row plus the second row solved relative to z_yy."""

    a: RatExpr
    b: RatExpr
    c: RatExpr
    q: RatExpr
    m: RatExpr
    n: RatExpr
    r: RatExpr

    def __post_init__(self):
        _require_shared_table(self.coeffs())
        if self.q.is_zero:
            raise ValueError("conjugate form requires q != 0 (diagonal second fundamental form)")

    def coeffs(self):
        return (self.a, self.b, self.c, self.q, self.m, self.n, self.r)

    @property
    def table(self) -> VarTable:
        return self.a.table

    def hyperbolic_part(self) -> HyperbolicEq:
        return HyperbolicEq(a=self.a, b=self.b, c=self.c)

    def invariants(self) -> InvariantPair:
        return laplace_invariants(self.hyperbolic_part())


@dataclass(frozen=True)
class ConnectionForm:
    """4x4 matrix of 1-forms; each entry is a (dx, dy) coefficient pair."""

    entries: tuple
    frame: str  # "general" -> (z, z_x, z_y, z_xy); "conjugate" -> (z, z_x, z_y, z_xx)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


@dataclass(frozen=True)
class CubicData:
    """Cubic-form components and the rational part of the Fubini scalar.

    The full Fubini scalar is ``fubini_rat * q^(fubini_q_half_power / 2)``;
    the half power of q is carried as a tag so the field stays rational.
    """

    A: RatExpr
    B: RatExpr
    phi111: RatExpr
    phi112: RatExpr
    phi122: RatExpr
    phi222: RatExpr
    fubini_rat: RatExpr
    fubini_q_half_power: int


class SurfaceClass(Enum):
    QUADRIC = "Quadric"
    RULED = "Ruled"
    GENERAL = "General"


# ---------------------------------------------------------------------------
# Frame reduction: rewriting derivatives in the 4-dimensional frame
# ---------------------------------------------------------------------------


class FrameCalculus:
    """Derivative bookkeeping over a rank-4 frame.

    Frame elements are held as coefficient 4-vectors; ``ddx``/``ddy``
    differentiate a vector using the reduction rules of the underlying
    system.  Construction fails when the prolongation solve is singular.
    """

    def __init__(self, table: VarTable, dx_rules, dy_rules):
        self.table = table
        self.x, self.y = table.coords
        # dx_rules[i] / dy_rules[i]: frame vector of d(e_i)/dx resp. /dy
        self.dx_rules = dx_rules
        self.dy_rules = dy_rules

    def unit(self, i: int):
        one, zero = self.table.one, self.table.zero
        return tuple(one if j == i else zero for j in range(4))

    def _apply(self, vec, rules, coord):
        out = [component.diff(coord) for component in vec]
        for i, weight in enumerate(vec):
            if weight.is_zero:
                continue
            rule = rules[i]
            for j in range(4):
                out[j] = out[j] + weight * rule[j]
        return tuple(out)

    def ddx(self, vec):
        return self._apply(vec, self.dx_rules, self.x)

    def ddy(self, vec):
        return self._apply(vec, self.dy_rules, self.y)


def _general_frame(sys: GeneralSystem) -> FrameCalculus:
    table = sys.table
    zero, one = table.zero, table.one
    x, y = table.coords
    ell, a, b, p, m, c, f, q = sys.coeffs()
    # Frame e = (z, z_x, z_y, z_xy); the system supplies z_xx and z_yy.
    z_xx = (p, a, b, ell)
    z_yy = (q, c, f, m)
    # Prolongation: y-derivative of the first row and x-derivative of the
    # second give a 2x2 system for z_xxy and z_xyy.
    rhs1 = (
        b * q + p.diff(y),
        a.diff(y) + b * c,
        b.diff(y) + b * f + p,
        ell.diff(y) + a + b * m,
    )
    rhs2 = (
        c * p + q.diff(x),
        c.diff(x) + c * a + q,
        c * b + f.diff(x),
        m.diff(x) + c * ell + f,
    )
    det = 1 - ell * m
    if det.is_zero:
        raise ValueError("prolongation solve singular: 1 - l m = 0")
    z_xxy = tuple((r1 + ell * r2) / det for r1, r2 in zip(rhs1, rhs2))
    z_xyy = tuple((m * r1 + r2) / det for r1, r2 in zip(rhs1, rhs2))
    e1 = (zero, one, zero, zero)
    e2 = (zero, zero, one, zero)
    e3 = (zero, zero, zero, one)
    dx_rules = (e1, z_xx, e3, z_xxy)
    dy_rules = (e2, e3, z_yy, z_xyy)
    return FrameCalculus(table, dx_rules, dy_rules)


def _conjugate_frame(sys: ConjugateSystem) -> FrameCalculus:
    table = sys.table
    zero, one = table.zero, table.one
    x, y = table.coords
    a, b, c, q, m, n, r = sys.coeffs()
    # Frame e = (z, z_x, z_y, z_xx).
    z_xy = (-c, -a, -b, zero)
    z_yy = (-r, -m, -n, -q)
    # Prolonged hyperbolic row.
    z_xxy = (b * c - c.diff(x), b * a - a.diff(x) - c, b * b - b.diff(x), -a)
    # z_xxx from cross-derivative compatibility of the two rows.
    if q.is_zero:
        raise ValueError("prolongation solve singular: q = 0")
    z_xxx = (
        (n * c - r.diff(x) - a * c - b * r + c.diff(y)) / q,
        (n * a - m.diff(x) - r - a * a - b * m + a.diff(y)) / q,
        (-n.diff(x) - a * b + b.diff(y) + c) / q,
        -(q.diff(x) + m + b * q) / q,
    )
    e1 = (zero, one, zero, zero)
    e2 = (zero, zero, one, zero)
    e3 = (zero, zero, zero, one)
    dx_rules = (e1, e3, z_xy, z_xxx)
    dy_rules = (e2, z_xy, z_yy, z_xxy)
    return FrameCalculus(table, dx_rules, dy_rules)


def frame_calculus(sys) -> FrameCalculus:
    if isinstance(sys, GeneralSystem):
        return _general_frame(sys)
    if isinstance(sys, ConjugateSystem):
        return _conjugate_frame(sys)
    if isinstance(sys, AsymptoticSystem):
        return _general_frame(sys.as_general())
    raise TypeError(f"unsupported system type {type(sys)!r}")


def connection_form(sys) -> ConnectionForm:
    """Connection form of the moving frame equation de = omega e."""
    calculus = frame_calculus(sys)
    rows = []
    for i in range(4):
        e_i = calculus.unit(i)
        dx_vec = calculus.ddx(e_i)
        dy_vec = calculus.ddy(e_i)
        rows.append(tuple((dx_vec[j], dy_vec[j]) for j in range(4)))
    frame = "conjugate" if isinstance(sys, ConjugateSystem) else "general"
    return ConnectionForm(entries=tuple(rows), frame=frame)


def maurer_cartan_residual(omega: ConnectionForm):
    """dx^dy coefficient of d(omega) - omega ^ omega, entry by entry.

    The zero matrix is equivalent to integrability of the system (the
    connection is flat and the solution space has dimension four).
    """
    entries = omega.entries
    table = entries[0][0][0].table
    x, y = table.coords
    residual = []
    for i in range(4):
        row = []
        for j in range(4):
            p_ij, q_ij = entries[i][j]
            terms = [(1, (q_ij.diff(x),)), (-1, (p_ij.diff(y),))]
            for k in range(4):
                p_ik, q_ik = entries[i][k]
                p_kj, q_kj = entries[k][j]
                terms.append((-1, (p_ik, q_kj)))
                terms.append((1, (q_ik, p_kj)))
            row.append(sum_products(table, terms))
        residual.append(tuple(row))
    return tuple(residual)


def fundamental_form(sys):
    """Second fundamental form as the component triple (h_xx, h_xy, h_yy)."""
    table = sys.table
    if isinstance(sys, GeneralSystem):
        return (sys.ell, table.one, sys.m)
    if isinstance(sys, AsymptoticSystem):
        return (table.zero, table.one, table.zero)
    if isinstance(sys, ConjugateSystem):
        return (table.one, table.zero, -sys.q)
    raise TypeError(f"unsupported system type {type(sys)!r}")


def cubic_invariants(sys: ConjugateSystem) -> CubicData:
    """Cubic-form data of a conjugate system.

    A = q_x + 4 b q - 2 m and B = -q_y + (4 a - 2 n) q; the cubic
    components and the Fubini scalar follow.  A = B = 0 characterizes
    quadrics, and the vanishing of q A^2 - B^2 with (A, B) != 0
    characterizes ruled surfaces.
    """
    x, y = sys.table.coords
    A = sys.q.diff(x) + 4 * sys.b * sys.q - 2 * sys.m
    B = -sys.q.diff(y) + (4 * sys.a - 2 * sys.n) * sys.q
    fubini = (sys.table.const(8) / 5) * (sys.q * A * A - B * B)
    return CubicData(
        A=A,
        B=B,
        phi111=-A,
        phi112=B,
        phi122=-sys.q * A,
        phi222=sys.q * B,
        fubini_rat=fubini,
        fubini_q_half_power=1,
    )


def classify(sys) -> SurfaceClass:
    """Quadric / ruled / general trichotomy from the cubic-form data."""
    if isinstance(sys, ConjugateSystem):
        data = cubic_invariants(sys)
        if data.A.is_zero and data.B.is_zero:
            return SurfaceClass.QUADRIC
        if (sys.q * data.A * data.A - data.B * data.B).is_zero:
            return SurfaceClass.RULED
        return SurfaceClass.GENERAL
    if isinstance(sys, AsymptoticSystem):
        if sys.b.is_zero and sys.c.is_zero:
            return SurfaceClass.QUADRIC
        if (sys.b * sys.c).is_zero:
            return SurfaceClass.RULED
        return SurfaceClass.GENERAL
    raise TypeError("classification works on conjugate or asymptotic systems")


def asymptotic_invariants(sys: AsymptoticSystem):
    """Cubic form coefficients (-2b, -2c) and projective metric factor 8bc."""
    return ((-2 * sys.b, -2 * sys.c), 8 * sys.b * sys.c)


# ---------------------------------------------------------------------------
# Transport: change of coordinates plus gauge, forward map only
# ---------------------------------------------------------------------------


def _second_derivative_rows(sys, x_map: RatExpr, y_map: RatExpr, gauge: PowerProduct | None):
    """Rows relating (w_ss, w_st, w_tt, w_s, w_t, w) after eliminating the
    surviving old second derivative.

    Returns two independent rows, each a 6-vector of coefficients over the
    column order above, describing linear relations satisfied by w.
    """
    new_table = x_map.table
    if y_map.table != new_table:
        raise ValueError("map components must share one VarTable")
    s, t = new_table.coords
    old_table = sys.table
    ox, oy = old_table.coords

    forward = {ox: x_map, oy: y_map}

    def pull(expr: RatExpr) -> RatExpr:
        return expr.subs(forward)

    if isinstance(sys, AsymptoticSystem):
        sys = sys.as_general()

    zero, one = new_table.zero, new_table.one
    if isinstance(sys, GeneralSystem):
        # surviving second derivative D = z_xy
        red_xx = tuple(pull(e) for e in (sys.p, sys.a, sys.b, sys.ell))
        red_xy = (zero, zero, zero, one)
        red_yy = tuple(pull(e) for e in (sys.q, sys.c, sys.f, sys.m))
    elif isinstance(sys, ConjugateSystem):
        # surviving second derivative D = z_xx
        red_xx = (zero, zero, zero, one)
        red_xy = (pull(-sys.c), pull(-sys.a), pull(-sys.b), zero)
        red_yy = (pull(-sys.r), pull(-sys.m), pull(-sys.n), pull(-sys.q))
    else:
        raise TypeError(f"unsupported system type {type(sys)!r}")

    if gauge is None:
        mu_s = mu_t = zero
    else:
        if gauge.table != new_table:
            raise ValueError("gauge must live in the new coordinates")
        # z = gauge * w, so w carries the inverse factor.
        mu_s = -gauge.log_derivative(s)
        mu_t = -gauge.log_derivative(t)

    X_s, X_t = x_map.diff(s), x_map.diff(t)
    Y_s, Y_t = y_map.diff(s), y_map.diff(t)
    jac = X_s * Y_t - X_t * Y_s
    if jac.is_zero:
        raise TransportError("singular Jacobian of the coordinate map")

    def second_order_vector(da, db, X_ab, Y_ab, mu_ab):
        """Frame vector (z, z_x, z_y, D) of e^(-mu) w_ab."""
        mu_a = mu_s if da == s else mu_t
        mu_b = mu_s if db == s else mu_t
        X_a, Y_a = x_map.diff(da), y_map.diff(da)
        X_b, Y_b = x_map.diff(db), y_map.diff(db)
        vec = [
            mu_ab + mu_a * mu_b,
            X_ab + mu_a * X_b + mu_b * X_a,
            Y_ab + mu_a * Y_b + mu_b * Y_a,
            zero,
        ]
        for coeff, red in (
            (X_a * X_b, red_xx),
            (X_a * Y_b + X_b * Y_a, red_xy),
            (Y_a * Y_b, red_yy),
        ):
            for j in range(4):
                vec[j] = vec[j] + coeff * red[j]
        return tuple(vec)

    v_ss = second_order_vector(s, s, x_map.diff(s).diff(s), y_map.diff(s).diff(s), mu_s.diff(s))
    v_st = second_order_vector(s, t, x_map.diff(s).diff(t), y_map.diff(s).diff(t), mu_s.diff(t))
    v_tt = second_order_vector(t, t, x_map.diff(t).diff(t), y_map.diff(t).diff(t), mu_t.diff(t))

    # First-order inversion: z = w, and
    #   z_x = ( Y_t (w_s - mu_s w) - Y_s (w_t - mu_t w) ) / J
    #   z_y = (-X_t (w_s - mu_s w) + X_s (w_t - mu_t w) ) / J
    zx_ws, zx_wt = Y_t / jac, -Y_s / jac
    zy_ws, zy_wt = -X_t / jac, X_s / jac
    zx_w = -(zx_ws * mu_s + zx_wt * mu_t)
    zy_w = -(zy_ws * mu_s + zy_wt * mu_t)

    rows = []
    for lead, vec in ((0, v_ss), (1, v_st), (2, v_tt)):
        alpha, beta, gamma, delta = vec
        row = [zero, zero, zero, zero, zero, zero, zero]
        row[lead] = one
        row[3] = -(beta * zx_ws + gamma * zy_ws)
        row[4] = -(beta * zx_wt + gamma * zy_wt)
        row[5] = -(alpha + beta * zx_w + gamma * zy_w)
        row[6] = -delta
        rows.append(row)

    # Eliminate D (column 6).
    pivot = None
    for i, row in enumerate(rows):
        if not row[6].is_zero:
            pivot = i
            break
    if pivot is None:
        reduced = [rows[0], rows[1]]
    else:
        prow = rows[pivot]
        reduced = []
        for i, row in enumerate(rows):
            if i == pivot:
                continue
            factor = row[6] / prow[6]
            reduced.append([entry - factor * pentry for entry, pentry in zip(row, prow)])
    return [row[:6] for row in reduced]


def transport(sys, x_map: RatExpr, y_map: RatExpr, gauge: PowerProduct | None, target: str):
    """Rewrite ``sys`` in the coordinates (s, t) with x = X(s,t), y = Y(s,t).

    The output system is satisfied by w(s,t) where z(X, Y) = gauge * w.
    ``target`` selects the normal form: "general" solves for (w_ss, w_tt),
    "conjugate" isolates the hyperbolic row (which requires the new
    coordinates to be conjugate for the transported surface).
    """
    rows = _second_derivative_rows(sys, x_map, y_map, gauge)
    r1, r2 = rows
    table = x_map.table
    if target == "general":
        # Solve the pair for w_ss and w_tt.
        det = r1[0] * r2[2] - r2[0] * r1[2]
        if det.is_zero:
            raise TransportError("general normal form unsolvable: (w_ss, w_tt) minor vanishes")
        sol = []
        for col in (1, 3, 4, 5):  # w_st, w_s, w_t, w
            rhs1, rhs2 = -r1[col], -r2[col]
            sol.append(
                (
                    (rhs1 * r2[2] - rhs2 * r1[2]) / det,
                    (r1[0] * rhs2 - r2[0] * rhs1) / det,
                )
            )
        (ell, m_), (a, c), (b, f), (p, q) = sol
        return GeneralSystem(ell=ell, a=a, b=b, p=p, m=m_, c=c, f=f, q=q)
    if target == "conjugate":
        u1, v1, w1 = r1[0], r1[1], r1[2]
        u2, v2, w2 = r2[0], r2[1], r2[2]
        det = u1 * w2 - u2 * w1
        if not det.is_zero:
            raise TransportError("conjugate normal form unsolvable: coordinates are not conjugate")
        if not (u1.is_zero and u2.is_zero):
            mu1, mu2 = u2, -u1
        elif not (w1.is_zero and w2.is_zero):
            mu1, mu2 = w2, -w1
        else:
            mu1, mu2 = table.one, table.zero
        row1 = [mu1 * e1 + mu2 * e2 for e1, e2 in zip(r1, r2)]
        if row1[1].is_zero:
            raise TransportError("conjugate normal form unsolvable: w_st coefficient vanishes")
        row1 = [entry / row1[1] for entry in row1]
        nu1, nu2 = v2, -v1
        row2 = [nu1 * e1 + nu2 * e2 for e1, e2 in zip(r1, r2)]
        if row2[2].is_zero:
            raise TransportError("conjugate normal form unsolvable: w_tt coefficient vanishes")
        row2 = [entry / row2[2] for entry in row2]
        return ConjugateSystem(
            a=row1[3], b=row1[4], c=row1[5],
            q=row2[0], m=row2[3], n=row2[4], r=row2[5],
        )
    raise ValueError(f"unknown target normal form {target!r}")

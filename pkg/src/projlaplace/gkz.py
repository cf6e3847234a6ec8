"""Torus-reduction derivation of rank-4 systems from Euler-integral data.

Starting from the exponent sets of the polynomial factors of a generalized
Euler integral, the pipeline is:

1. :func:`cayley`: stack block-diagonal unit rows over the concatenated
   exponent blocks, so all factors share one homogeneity structure.
2. :func:`lattice_basis`: integer kernel of the combined matrix by
   fraction-free column reduction.
3. :func:`box_operators`: the binomial operator pair of each lattice
   vector, rewritten in normal-ordered theta form via d/dv = v^(-1) theta
   and d^2/dv^2 = v^(-2) (theta^2 - theta).
4. :func:`homogeneity_relations`: the linear equations A Theta = gamma.
5. :func:`reduce_to_system`: pin the slice of a :class:`ReductionPlan`,
   identify the theta operators of the two surviving variables, solve the
   homogeneity relations for the remaining thetas, substitute into the
   second-order box relations, expand theta into coordinate derivatives,
   and normalize to a :class:`GeneralSystem`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from projlaplace.linalg import SingularSystemError
from projlaplace.rank4 import GeneralSystem
from projlaplace.symexpr import RatExpr, VarTable

__all__ = [
    "ExponentData",
    "GkzData",
    "ThetaOperator",
    "ReductionPlan",
    "cayley",
    "lattice_basis",
    "hermite_normal_form",
    "box_operators",
    "homogeneity_relations",
    "reduce_to_system",
]


@dataclass(frozen=True)
class ExponentData:
    """Exponent blocks of the polynomial factors of an Euler integral.

    ``blocks[i]`` has one row per integration variable (k rows) and one
    column per monomial of the i-th factor.
    """

    blocks: tuple
    k: int

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(tuple(row) for row in blk) for blk in self.blocks))
        if not self.blocks:
            raise ValueError("need at least one exponent block")
        for blk in self.blocks:
            if len(blk) != self.k:
                raise ValueError("every block needs exactly k rows")
            widths = {len(row) for row in blk}
            if len(widths) != 1:
                raise ValueError("ragged exponent block")

    @property
    def m(self) -> int:
        return len(self.blocks)


def cayley(data: ExponentData) -> list[list[int]]:
    """Combined matrix: unit rows tagging each factor over the stacked blocks."""
    widths = [len(blk[0]) for blk in data.blocks]
    n_cols = sum(widths)
    rows: list[list[int]] = []
    offset = 0
    for i, width in enumerate(widths):
        row = [0] * n_cols
        for j in range(width):
            row[offset + j] = 1
        rows.append(row)
        offset += width
    for rr in range(data.k):
        row = []
        for blk in data.blocks:
            row.extend(blk[rr])
        rows.append(row)
    return rows


def lattice_basis(A: list[list[int]]) -> list[list[int]]:
    """Basis of null(A) over the integers, by unimodular column reduction.

    Column operations are tracked on an identity block; columns whose
    A-part vanishes after reduction generate the full integer kernel.
    """
    if not A:
        return []
    n, N = len(A), len(A[0])
    # columns of [A; I]
    cols = [[A[i][j] for i in range(n)] + [1 if idx == j else 0 for idx in range(N)] for j in range(N)]
    active = list(range(N))
    for r in range(n):
        live = [j for j in active if cols[j][r] != 0]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda j: abs(cols[j][r]))
            base = live[0]
            for j in live[1:]:
                f = cols[j][r] // cols[base][r]
                if f:
                    cols[j] = [cj - f * cb for cj, cb in zip(cols[j], cols[base])]
            live = [j for j in live if cols[j][r] != 0]
        pivot = live[0]
        active.remove(pivot)
    kernel = []
    for j in active:
        if all(cols[j][i] == 0 for i in range(n)):
            kernel.append(cols[j][n:])
    return kernel


def hermite_normal_form(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form (canonical form of the row lattice).

    Pivots are positive, entries above a pivot are reduced to [0, pivot),
    zero rows are dropped.  Two integer matrices span the same row lattice
    exactly when their forms agree.
    """
    mat = [list(r) for r in rows]
    if not mat:
        return []
    n_cols = len(mat[0])
    pivot_row = 0
    pivots = []
    for col in range(n_cols):
        live = [i for i in range(pivot_row, len(mat)) if mat[i][col] != 0]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda i: abs(mat[i][col]))
            base = live[0]
            for i in live[1:]:
                f = mat[i][col] // mat[base][col]
                if f:
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[base])]
            live = [i for i in live if mat[i][col] != 0]
        i = live[0]
        mat[pivot_row], mat[i] = mat[i], mat[pivot_row]
        if mat[pivot_row][col] < 0:
            mat[pivot_row] = [-a for a in mat[pivot_row]]
        for i in range(pivot_row):
            f = mat[i][col] // mat[pivot_row][col]
            if f:
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[pivot_row])]
        pivots.append(col)
        pivot_row += 1
    return [row for row in mat[:pivot_row]]


@dataclass(frozen=True)
class GkzData:
    """Combined exponent matrix, parameter vector, and relation lattice."""

    A: tuple
    gamma: tuple
    lattice: tuple
    m: int
    k: int

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(row) for row in self.A))
        object.__setattr__(self, "lattice", tuple(tuple(v) for v in self.lattice))
        object.__setattr__(self, "gamma", tuple(self.gamma))
        n = len(self.A)
        if n != self.m + self.k or len(self.gamma) != n:
            raise ValueError("dimension mismatch between A and gamma")
        for vec in self.lattice:
            if sum(vec) != 0:
                raise ValueError("lattice vector entries must sum to zero")
            for row in self.A:
                if sum(e * v for e, v in zip(row, vec)) != 0:
                    raise ValueError("lattice vector is not in the kernel of A")
        for j in range(len(self.A[0])):
            if sum(self.A[i][j] for i in range(self.m)) != 1:
                raise ValueError("factor-tag rows of each column must sum to 1")

    @property
    def n_vars(self) -> int:
        return len(self.A[0])


# ---------------------------------------------------------------------------
# Normal-ordered theta operators
# ---------------------------------------------------------------------------


class ThetaOperator:
    """Sum of terms coef * v^a * theta^b in normal order (v left of theta).

    ``a`` may carry negative entries; ``b`` is nonnegative.  Multiplication
    uses theta_i v_i = v_i (theta_i + 1), so operators over the same
    variable count form an associative algebra with unique normal forms.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms):
        self.n = n
        merged: dict[tuple, RatExpr] = {}
        for coef, v_exp, th_exp in terms:
            key = (tuple(v_exp), tuple(th_exp))
            if key in merged:
                merged[key] = merged[key] + coef
            else:
                merged[key] = coef
        self.terms = tuple(
            (coef, key[0], key[1])
            for key, coef in sorted(merged.items())
            if not coef.is_zero
        )

    @classmethod
    def from_term(cls, n: int, coef: RatExpr, v_exp, th_exp) -> "ThetaOperator":
        return cls(n, [(coef, tuple(v_exp), tuple(th_exp))])

    def __add__(self, other: "ThetaOperator") -> "ThetaOperator":
        return ThetaOperator(self.n, list(self.terms) + list(other.terms))

    def __sub__(self, other: "ThetaOperator") -> "ThetaOperator":
        return self + other.scale(-1)

    def scale(self, factor) -> "ThetaOperator":
        return ThetaOperator(self.n, [(coef * factor, a, b) for coef, a, b in self.terms])

    def __mul__(self, other: "ThetaOperator") -> "ThetaOperator":
        out = []
        for c1, a1, b1 in self.terms:
            for c2, a2, b2 in other.terms:
                # theta^b1 v^a2 = v^a2 * prod_i (theta_i + a2_i)^b1_i
                coef = c1 * c2
                v_exp = tuple(x + y for x, y in zip(a1, a2))
                # expand the shifted powers into theta monomials
                expanded = [(coef, [0] * self.n)]
                for i in range(self.n):
                    if b1[i] == 0:
                        continue
                    shift = a2[i]
                    new_terms = []
                    for cc, th in expanded:
                        # (theta_i + shift)^b1[i]
                        poly = _binomial_power(shift, b1[i])
                        for power, weight in poly:
                            th2 = list(th)
                            th2[i] += power
                            new_terms.append((cc * weight, th2))
                    expanded = new_terms
                for cc, th in expanded:
                    th_total = tuple(u + v for u, v in zip(th, b2))
                    out.append((cc, v_exp, th_total))
        return ThetaOperator(self.n, out)

    def __eq__(self, other):
        return isinstance(other, ThetaOperator) and self.n == other.n and self.terms == other.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"

        def mono(label, exps):
            out = []
            for i, e in enumerate(exps):
                if e == 1:
                    out.append(f"{label}{i + 1}")
                elif e:
                    out.append(f"{label}{i + 1}^{e}")
            return out

        parts = []
        for coef, a, b in self.terms:
            factors = mono("v", a) + mono("th", b)
            body = "*".join(factors) if factors else "1"
            parts.append(f"({coef})*{body}")
        return " + ".join(parts)

    __repr__ = __str__


def _binomial_power(shift: int, power: int):
    """(theta + shift)^power as [(theta_power, integer weight)]."""
    coeffs = {0: 1}
    for _ in range(power):
        nxt: dict[int, int] = {}
        for p, w in coeffs.items():
            nxt[p + 1] = nxt.get(p + 1, 0) + w
            if shift:
                nxt[p] = nxt.get(p, 0) + w * shift
        coeffs = nxt
    return list(coeffs.items())


def _partial_power(n: int, index: int, power: int, table: VarTable) -> ThetaOperator:
    """(d/dv_index)^power = v^(-power) * theta (theta-1) ... (theta-power+1)."""
    v_exp = [0] * n
    v_exp[index] = -power
    terms = [(table.one, tuple(v_exp), tuple([0] * n))]
    op = ThetaOperator(n, terms)
    unit_th = [0] * n
    unit_th[index] = 1
    for step in range(power):
        shifted = ThetaOperator(
            n,
            [
                (table.one, tuple([0] * n), tuple(unit_th)),
                (table.const(-step), tuple([0] * n), tuple([0] * n)),
            ],
        )
        op = op * shifted
    return op


def box_operators(lattice, table: VarTable) -> list[tuple[ThetaOperator, ThetaOperator]]:
    """For each lattice vector, the (positive, negative) derivative products
    rewritten in normal-ordered theta/v form."""
    pairs = []
    for vec in lattice:
        n = len(vec)
        lhs = ThetaOperator.from_term(n, table.one, [0] * n, [0] * n)
        rhs = ThetaOperator.from_term(n, table.one, [0] * n, [0] * n)
        for j, e in enumerate(vec):
            if e > 0:
                lhs = lhs * _partial_power(n, j, e, table)
            elif e < 0:
                rhs = rhs * _partial_power(n, j, -e, table)
        pairs.append((lhs, rhs))
    return pairs


def homogeneity_relations(data: GkzData):
    """Rows of A Theta = gamma as (integer coefficient vector, rhs)."""
    return [(tuple(row), g) for row, g in zip(data.A, data.gamma)]


# ---------------------------------------------------------------------------
# Reduction plan and the torus reduction itself
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionPlan:
    """Slice of the coefficient torus selecting the two output variables.

    ``variable_defs`` names each new variable together with the lattice
    row whose monomial ``prod v_j^(l_j)`` the variable equals; ``slice``
    maps every 0-based v-index to a rational constant or to the monomial
    of one new variable.
    """

    variable_defs: tuple
    slice: dict

    def __post_init__(self):
        object.__setattr__(self, "variable_defs", tuple(tuple(d) for d in self.variable_defs))
        if len(self.variable_defs) != 2:
            raise ValueError("a rank-4 reduction needs exactly two new variables")


def _validate_plan(data: GkzData, plan: ReductionPlan, table: VarTable):
    names = [name for name, _ in plan.variable_defs]
    if tuple(names) != tuple(table.coords):
        raise ValueError("plan variables must match the output coordinate names")
    N = data.n_vars
    if set(plan.slice.keys()) != set(range(N)):
        raise ValueError("slice must assign every v index")
    distinguished = {}
    for name, _ in plan.variable_defs:
        hits = [j for j in range(N) if plan.slice[j] == table.var(name)]
        if len(hits) != 1:
            raise ValueError(f"slice must send exactly one v to {name}")
        distinguished[name] = hits[0]
    for name, row_idx in plan.variable_defs:
        vec = data.lattice[row_idx]
        value = table.one
        for j, e in enumerate(vec):
            if e == 0:
                continue
            img = plan.slice[j]
            if img.is_zero:
                raise ValueError("slice zero appears in a defining monomial")
            value = value * img**e
        if value != table.var(name):
            raise ValueError(f"slice does not reproduce {name} from its lattice row")
    return distinguished


def _theta_poly_substitute(op: ThetaOperator, plan: ReductionPlan, theta_map, table: VarTable):
    """Specialise an N-variable operator to the slice: v-monomials become
    rational functions of the output coordinates (kept on the left) and
    each theta becomes an affine combination of theta_x, theta_y.

    Result: dict (i, j) -> RatExpr, the coefficient of theta_x^i theta_y^j.
    """
    result: dict[tuple[int, int], RatExpr] = {}
    for coef, v_exp, th_exp in op.terms:
        factor = coef
        for j, e in enumerate(v_exp):
            if e == 0:
                continue
            # RatExpr.__pow__ rejects zero slices at negative powers.
            factor = factor * plan.slice[j] ** e
        # product of affine forms; affine = (const, cx, cy) triple
        poly: dict[tuple[int, int], RatExpr] = {(0, 0): factor}
        for j, e in enumerate(th_exp):
            if e == 0:
                continue
            const, cx, cy = theta_map[j]
            for _ in range(e):
                nxt: dict[tuple[int, int], RatExpr] = {}
                for (i1, j1), cc in poly.items():
                    for (di, dj), aff in (((0, 0), const), ((1, 0), cx), ((0, 1), cy)):
                        if aff.is_zero:
                            continue
                        key = (i1 + di, j1 + dj)
                        add = cc * aff
                        nxt[key] = nxt[key] + add if key in nxt else add
                poly = nxt
        for key, value in poly.items():
            result[key] = result[key] + value if key in result else value
    return {key: value for key, value in result.items() if not value.is_zero}


def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def _theta_to_partials(theta_poly, table: VarTable):
    """Expand theta_x^i theta_y^j into x^p d_x^p y^r d_y^r terms.

    Returns dict (p, r) -> RatExpr over derivative orders.
    """
    x = table.var(table.coords[0])
    y = table.var(table.coords[1])
    out: dict[tuple[int, int], RatExpr] = {}
    for (i, j), coef in theta_poly.items():
        for p in range(i + 1):
            sp_ = _stirling2(i, p)
            if sp_ == 0:
                continue
            for rr in range(j + 1):
                sr = _stirling2(j, rr)
                if sr == 0:
                    continue
                term = coef * (x**p) * (y**rr) * sp_ * sr
                key = (p, rr)
                out[key] = out[key] + term if key in out else term
    return {key: value for key, value in out.items() if not value.is_zero}


def reduce_to_system(data: GkzData, plan: ReductionPlan, table: VarTable) -> GeneralSystem:
    """Carry out the torus reduction and return the rank-4 system.

    ``table`` fixes the output coordinates (the plan's two variables) and
    the parameter names used by ``data.gamma``.
    """
    distinguished = _validate_plan(data, plan, table)
    N = data.n_vars
    zero, one = table.zero, table.one
    x_name, y_name = table.coords
    # Affine images of each theta_j: (const, coef theta_x, coef theta_y).
    theta_map: dict[int, tuple[RatExpr, RatExpr, RatExpr]] = {
        distinguished[x_name]: (zero, one, zero),
        distinguished[y_name]: (zero, zero, one),
    }
    second_order = []
    for vec in data.lattice:
        pos_degree = sum(e for e in vec if e > 0)
        if pos_degree == 1:
            i = next(j for j, e in enumerate(vec) if e > 0)
            j = next(j for j, e in enumerate(vec) if e < 0)
            # theta_i / v_i = theta_j / v_j under the slice
            vi, vj = plan.slice[i], plan.slice[j]
            if vj.is_zero and not vi.is_zero:
                theta_map[j] = (zero, zero, zero)
            elif vi.is_zero and not vj.is_zero:
                theta_map[i] = (zero, zero, zero)
            elif vi.is_zero and vj.is_zero:
                raise ValueError("first-order relation with both slice values zero")
            # nonzero/nonzero carries no vanishing information here
        elif pos_degree == 2:
            second_order.append(vec)
        else:
            raise ValueError("lattice rows of order three or higher are not supported")
    if len(second_order) != 2:
        raise ValueError("reduction needs exactly two second-order lattice rows")
    # Solve the homogeneity relations for the remaining thetas.
    unknowns = [j for j in range(N) if j not in theta_map]
    rows = []
    rhs = []
    for row, g in homogeneity_relations(data):
        coeffs = [Fraction(row[j]) for j in unknowns]
        acc = [g, zero, zero]
        for j in range(N):
            if j in theta_map and row[j]:
                const, cx, cy = theta_map[j]
                acc[0] = acc[0] - row[j] * const
                acc[1] = acc[1] - row[j] * cx
                acc[2] = acc[2] - row[j] * cy
        rows.append(coeffs)
        rhs.append(acc)
    solution = _solve_affine(rows, rhs, table)
    for pos, j in enumerate(unknowns):
        theta_map[j] = tuple(solution[pos])
    # Substitute into the second-order box relations.
    pairs = box_operators(second_order, table)
    equations = []
    for vec, (lhs, rhs_op) in zip(second_order, pairs):
        v_pos = tuple(e if e > 0 else 0 for e in vec)
        mono = ThetaOperator.from_term(N, one, v_pos, [0] * N)
        relation = mono * lhs - mono * rhs_op
        theta_poly = _theta_poly_substitute(relation, plan, theta_map, table)
        equations.append(_theta_to_partials(theta_poly, table))
    # Normalize to the coupled form solved for z_xx and z_yy.
    def coeff(eq, key):
        return eq.get(key, zero)

    for eq in equations:
        for key in eq:
            if key[0] + key[1] > 2:
                raise ValueError("reduction produced derivatives of order > 2")
    e1, e2 = equations
    a11, a12 = coeff(e1, (2, 0)), coeff(e1, (0, 2))
    a21, a22 = coeff(e2, (2, 0)), coeff(e2, (0, 2))
    det = a11 * a22 - a12 * a21
    if det.is_zero:
        raise SingularSystemError("cannot solve for the two pure second derivatives")
    out = {}
    for key in ((1, 1), (1, 0), (0, 1), (0, 0)):
        r1, r2 = -coeff(e1, key), -coeff(e2, key)
        out[key] = (
            (r1 * a22 - r2 * a12) / det,
            (a11 * r2 - a21 * r1) / det,
        )
    return GeneralSystem(
        ell=out[(1, 1)][0],
        a=out[(1, 0)][0],
        b=out[(0, 1)][0],
        p=out[(0, 0)][0],
        m=out[(1, 1)][1],
        c=out[(1, 0)][1],
        f=out[(0, 1)][1],
        q=out[(0, 0)][1],
    )


def _solve_affine(rows, rhs, table: VarTable):
    """Solve an integer-coefficient linear system whose right-hand sides are
    affine triples (const, cx, cy) of rational expressions."""
    m, n = len(rows), len(rows[0]) if rows else 0
    aug = [[Fraction(v) for v in row] + list(r) for row, r in zip(rows, rhs)]
    row_at = 0
    pivots = []
    for col in range(n):
        pivot = None
        for i in range(row_at, m):
            if aug[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            raise SingularSystemError(f"homogeneity solve: no pivot for theta unknown {col}")
        aug[row_at], aug[pivot] = aug[pivot], aug[row_at]
        inv = aug[row_at][col]
        aug[row_at] = [entry / inv if isinstance(entry, Fraction) else entry / table.const(inv) for entry in aug[row_at][:n]] + [
            entry / table.const(inv) for entry in aug[row_at][n:]
        ]
        for i in range(m):
            if i != row_at and aug[i][col] != 0:
                f = aug[i][col]
                fr = table.const(f)
                aug[i] = [entry - f * lead for entry, lead in zip(aug[i][:n], aug[row_at][:n])] + [
                    entry - fr * lead for entry, lead in zip(aug[i][n:], aug[row_at][n:])
                ]
        pivots.append(row_at)
        row_at += 1
        if row_at == m:
            break
    if row_at < n:
        raise SingularSystemError("homogeneity solve: underdetermined")
    for i in range(row_at, m):
        if any(not entry.is_zero for entry in aug[i][n:]):
            raise SingularSystemError("homogeneity solve: inconsistent equations")
    solution = [None] * n
    for col, prow in enumerate(pivots):
        solution[col] = [aug[prow][n], aug[prow][n + 1], aug[prow][n + 2]]
    return solution

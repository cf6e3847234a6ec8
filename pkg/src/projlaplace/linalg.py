"""Small exact linear algebra over the rational-function field."""

from __future__ import annotations

from projlaplace.symexpr import RatExpr

__all__ = ["solve_linear", "determinant", "SingularSystemError"]


class SingularSystemError(ValueError):
    """A linear solve had no unique solution; carries the failing stage."""


def solve_linear(rows: list[list[RatExpr]], rhs: list[RatExpr]) -> list[RatExpr]:
    """Solve ``rows * x = rhs`` exactly by Gaussian elimination.

    ``rows`` may have more equations than unknowns; redundant equations must
    be consistent or :class:`SingularSystemError` is raised.  Pivots are
    chosen as the first symbolically nonzero entry in each column.
    """
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    aug = [list(row) + [r] for row, r in zip(rows, rhs)]
    pivot_rows: list[int] = []
    row = 0
    for col in range(n):
        pivot = None
        for i in range(row, m):
            if not aug[i][col].is_zero:
                pivot = i
                break
        if pivot is None:
            raise SingularSystemError(f"no pivot in column {col}")
        aug[row], aug[pivot] = aug[pivot], aug[row]
        inv = aug[row][col]
        aug[row] = [entry / inv for entry in aug[row]]
        for i in range(m):
            if i != row and not aug[i][col].is_zero:
                factor = aug[i][col]
                aug[i] = [entry - factor * lead for entry, lead in zip(aug[i], aug[row])]
        pivot_rows.append(row)
        row += 1
        if row == m:
            if col != n - 1:
                raise SingularSystemError("underdetermined system")
            break
    for i in range(row, m):
        if not aug[i][n].is_zero:
            raise SingularSystemError(f"inconsistent equation {i}")
    solution = [None] * n
    for col, prow in enumerate(pivot_rows):
        solution[col] = aug[prow][n]
    return solution


def determinant(rows: list[list[RatExpr]]) -> RatExpr:
    """Exact determinant by cofactor expansion (intended for n <= 4)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for j in range(n):
        entry = rows[0][j]
        if entry.is_zero:
            continue
        minor = [[row[k] for k in range(n) if k != j] for row in rows[1:]]
        term = entry * determinant(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return rows[0][0].table.zero
    return total

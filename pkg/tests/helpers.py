"""Shared test utilities: random expression corpora and evaluation oracles."""

from __future__ import annotations

import random
from fractions import Fraction

from projlaplace.symexpr import RatExpr, VarTable

TABLE = VarTable(coords=("x", "y"), params=("u1", "u2"))


def random_point(rng: random.Random, names, lo=-9, hi=9) -> dict[str, Fraction]:
    return {n: Fraction(rng.randint(lo, hi), rng.randint(1, 7)) for n in names}


class ExprTree:
    """Plain expression tree evaluated with stdlib Fractions.

    Keeps an evaluation route that never touches the polynomial kernel, so
    it can serve as an independent oracle for RatExpr canonicalization.
    """

    def __init__(self, op, *children, value=None):
        self.op = op
        self.children = children
        self.value = value

    def eval(self, point: dict[str, Fraction]) -> Fraction:
        if self.op == "const":
            return Fraction(self.value)
        if self.op == "var":
            return point[self.value]
        vals = [c.eval(point) for c in self.children]
        if self.op == "add":
            return vals[0] + vals[1]
        if self.op == "sub":
            return vals[0] - vals[1]
        if self.op == "mul":
            return vals[0] * vals[1]
        if self.op == "div":
            return vals[0] / vals[1]
        if self.op == "neg":
            return -vals[0]
        if self.op == "pow":
            return vals[0] ** self.value
        raise AssertionError(self.op)

    def to_ratexpr(self, table: VarTable) -> RatExpr:
        if self.op == "const":
            return table.const(self.value)
        if self.op == "var":
            return table.var(self.value)
        vals = [c.to_ratexpr(table) for c in self.children]
        if self.op == "add":
            return vals[0] + vals[1]
        if self.op == "sub":
            return vals[0] - vals[1]
        if self.op == "mul":
            return vals[0] * vals[1]
        if self.op == "div":
            return vals[0] / vals[1]
        if self.op == "neg":
            return -vals[0]
        if self.op == "pow":
            return vals[0] ** self.value
        raise AssertionError(self.op)


def random_tree(rng: random.Random, table: VarTable, depth: int) -> ExprTree:
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return ExprTree("const", value=rng.randint(-5, 5))
        return ExprTree("var", value=rng.choice(table.names))
    op = rng.choice(["add", "add", "sub", "mul", "mul", "div", "neg", "pow"])
    if op == "neg":
        return ExprTree("neg", random_tree(rng, table, depth - 1))
    if op == "pow":
        node = ExprTree("pow", random_tree(rng, table, depth - 1))
        node.value = rng.randint(1, 3)
        return node
    left = random_tree(rng, table, depth - 1)
    right = random_tree(rng, table, depth - 1)
    if op == "div":
        # Keep denominators away from the zero polynomial.
        r = right.to_ratexpr(table)
        if r.is_zero:
            right = ExprTree("const", value=rng.randint(1, 5))
    return ExprTree(op, left, right)


def random_ratexpr(rng: random.Random, table: VarTable, depth: int = 3) -> RatExpr:
    while True:
        tree = random_tree(rng, table, depth)
        try:
            return tree.to_ratexpr(table)
        except ZeroDivisionError:
            continue


def random_nonzero(rng: random.Random, table: VarTable, depth: int = 3) -> RatExpr:
    while True:
        e = random_ratexpr(rng, table, depth)
        if not e.is_zero:
            return e


def lean_univariate(rng: random.Random, table: VarTable, name: str, quadratic_ok: bool = True) -> RatExpr:
    v = table.var(name)
    c0, c1 = rng.randint(1, 3), rng.randint(1, 2)
    if quadratic_ok and rng.random() < 0.3:
        return table.const(c0) + c1 * v + v * v
    return table.const(c0) + c1 * v


def random_integrable_conjugate(rng: random.Random):
    """Random integrable conjugate system with nonzero Laplace invariants.

    Built by transporting an integrable canonical system z_xx = p(x) z,
    z_yy = q(y) z along a conjugate-compatible map (u(s)+v(t), u(s)-v(t))
    with a rational gauge; transport preserves integrability, and generic
    p, q make h and k nonzero.
    """
    from projlaplace.rank4 import GeneralSystem, transport
    from projlaplace.symexpr import PowerProduct

    xy = VarTable(coords=("x", "y"))
    st = VarTable(coords=("s", "t"))
    while True:
        p = lean_univariate(rng, xy, "x")
        q = lean_univariate(rng, xy, "y")
        zero = xy.zero
        src = GeneralSystem(ell=zero, a=zero, b=zero, p=p, m=zero, c=zero, f=zero, q=q)
        s, t = st.var("s"), st.var("t")
        u = lean_univariate(rng, st, "s", quadratic_ok=False)
        v = lean_univariate(rng, st, "t", quadratic_ok=False)
        gauge = PowerProduct(st, ((s + t + rng.randint(1, 4), st.const(rng.choice([-1, 1]))),))
        sys = transport(src, u + v, u - v, gauge, target="conjugate")
        inv = sys.invariants()
        if not inv.h.is_zero and not inv.k.is_zero:
            return sys


def oracle_equal(lhs: RatExpr, rhs: RatExpr, rng: random.Random, samples: int = 20) -> bool:
    """Randomized equality: compare values at rational sample points."""
    names = lhs.table.names
    found = 0
    while found < samples:
        point = random_point(rng, names, lo=-50, hi=50)
        try:
            lv = lhs.eval_fraction(point)
            rv = rhs.eval_fraction(point)
        except ZeroDivisionError:
            continue
        if lv != rv:
            return False
        found += 1
    return True

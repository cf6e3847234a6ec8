"""Exact multivariate rational-function arithmetic over the rationals.

The universal scalar of this library is :class:`RatExpr`, a quotient of two
multivariate polynomials with arbitrary-precision rational coefficients.
Variables are split into *coordinates* (differentiation is allowed) and
*parameters* (constants for differentiation), both registered in a
:class:`VarTable`.

Canonical form: numerator and denominator are coprime, and the denominator
is monic with respect to the lexicographic leading coefficient.  Zero is
uniquely ``0/1``.  Equality of canonical forms is mathematical equality,
so ``==`` is a structural comparison.

Polynomial arithmetic (including GCD cancellation) is delegated to
``sympy.polys.rings``; everything above that layer, in particular the
expression grammar, the printer and the canonicalization policy, is local
to this module.

Grammar accepted by :func:`parse` (whitespace insignificant)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := ('+' | '-') factor | atom ('^' exponent)?
    atom    := INTEGER | NAME | '(' expr ')'
    exponent:= ('-')? INTEGER

The printer emits a deterministic parenthesized form (terms in descending
lexicographic monomial order); ``parse`` of a printed canonical form
returns the identical canonical form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from sympy.polys.domains import QQ
from sympy.polys.rings import ring

__all__ = [
    "ParseError",
    "VarTable",
    "RatExpr",
    "PowerProduct",
    "parse",
    "arith",
    "diff",
    "substitute",
    "equals",
    "log_derivative",
    "sum_products",
]

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_RING_CACHE: dict[tuple[str, ...], object] = {}


class ParseError(ValueError):
    """Syntax or lookup error while parsing an expression string."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _get_ring(names: tuple[str, ...]):
    R = _RING_CACHE.get(names)
    if R is None:
        R = ring(",".join(names), QQ)[0]
        _RING_CACHE[names] = R
    return R


@dataclass(frozen=True)
class VarTable:
    """Ordered registry of coordinate and parameter names.

    Coordinates admit differentiation; parameters are symbolic constants.
    The two name sets must be disjoint.
    """

    coords: tuple[str, ...]
    params: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "params", tuple(self.params))
        names = self.coords + self.params
        for name in names:
            if not _NAME_RE.match(name):
                raise ValueError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise ValueError("coordinate and parameter names must be distinct")

    @property
    def names(self) -> tuple[str, ...]:
        return self.coords + self.params

    @property
    def ring(self):
        return _get_ring(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def is_coord(self, name: str) -> bool:
        return name in self.coords

    def var(self, name: str) -> RatExpr:
        if name not in self.names:
            raise ValueError(f"unknown variable {name!r}")
        return RatExpr._make(self, self.ring.gens[self.index(name)], self.ring.one)

    def const(self, value) -> RatExpr:
        value = Fraction(value)
        num = self.ring.ground_new(QQ(value.numerator, value.denominator))
        return RatExpr._make(self, num, self.ring.one)

    @property
    def zero(self) -> RatExpr:
        return self.const(0)

    @property
    def one(self) -> RatExpr:
        return self.const(1)

    def parse(self, text: str) -> RatExpr:
        return parse(text, self)


class RatExpr:
    """Canonical multivariate rational function over a :class:`VarTable`."""

    __slots__ = ("table", "num", "den")

    def __init__(self, table: VarTable, num, den):
        # Internal: use VarTable factories or parse(); num/den must already
        # be canonical (coprime, monic denominator).
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *_):
        raise AttributeError("RatExpr is immutable")

    @classmethod
    def _make(cls, table: VarTable, num, den) -> RatExpr:
        if not den:
            raise ZeroDivisionError("division by the zero polynomial")
        if not num:
            return cls(table, table.ring.zero, table.ring.one)
        num, den = num.cancel(den)
        lc = den.LC
        if lc != 1:
            num = num.quo_ground(lc)
            den = den.quo_ground(lc)
        return cls(table, num, den)

    # -- predicates ---------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError("expression is not constant")
        if self.is_zero:
            return Fraction(0)
        c = self.num.LC / self.den.LC
        return Fraction(int(c.numerator), int(c.denominator))

    def numer(self) -> "RatExpr":
        """Numerator of the canonical form, as an expression over 1."""
        return RatExpr(self.table, self.num, self.table.ring.one)

    def denom(self) -> "RatExpr":
        """Denominator of the canonical form, as an expression over 1."""
        return RatExpr(self.table, self.den, self.table.ring.one)

    @property
    def support(self) -> frozenset[str]:
        """Names of variables actually appearing in the canonical form."""
        names = self.table.names
        used = set()
        for poly in (self.num, self.den):
            for mono in poly.monoms():
                for i, e in enumerate(mono):
                    if e:
                        used.add(names[i])
        return frozenset(used)

    def depends_on_coords(self) -> bool:
        return any(self.table.is_coord(n) for n in self.support)

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RatExpr):
            if other.table is not self.table and other.table != self.table:
                raise ValueError("operands use different VarTables")
            return other
        if isinstance(other, (int, Fraction)):
            return self.table.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        num = self.num * other.den + other.num * self.den
        return RatExpr._make(self.table, num, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        num = self.num * other.den - other.num * self.den
        return RatExpr._make(self.table, num, self.den * other.den)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatExpr._make(self.table, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        return RatExpr._make(self.table, self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        return RatExpr(self.table, -self.num, self.den)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError("only integer exponents are supported")
        if exponent == 0:
            return self.table.one
        if exponent < 0:
            if self.is_zero:
                raise ZeroDivisionError("division by the zero polynomial")
            return RatExpr._make(self.table, self.den ** (-exponent), self.num ** (-exponent))
        return RatExpr(self.table, self.num ** exponent, self.den ** exponent)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.table.const(other)
        if not isinstance(other, RatExpr):
            return NotImplemented
        return self.table == other.table and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.table, tuple(self.num.terms()), tuple(self.den.terms())))

    # -- calculus -----------------------------------------------------
    def diff(self, name: str) -> RatExpr:
        """Exact partial derivative with respect to a coordinate."""
        if not self.table.is_coord(name):
            raise ValueError(f"cannot differentiate with respect to non-coordinate {name!r}")
        gen = self.table.ring.gens[self.table.index(name)]
        num = self.num.diff(gen) * self.den - self.num * self.den.diff(gen)
        return RatExpr._make(self.table, num, self.den * self.den)

    def subs(self, mapping: dict[str, "RatExpr"]) -> RatExpr:
        """Substitute variables by expressions sharing one common VarTable.

        Unmapped variables are carried over by name; the result lives in the
        images' table.  Raises ``ZeroDivisionError`` if the substituted
        denominator vanishes identically.
        """
        if mapping:
            target = next(iter(mapping.values())).table
        else:
            target = self.table
        images = {}
        for name in self.support:
            if name in mapping:
                img = mapping[name]
                if img.table != target:
                    raise ValueError("substitution images use different VarTables")
                images[name] = img
            else:
                images[name] = target.var(name)
        num = _poly_subs(self.num, self.table, images, target)
        den = _poly_subs(self.den, self.table, images, target)
        if den.is_zero:
            raise ZeroDivisionError("substitution produced an identically zero denominator")
        return num / den

    # -- evaluation ---------------------------------------------------
    def eval_fraction(self, point: dict[str, Fraction]) -> Fraction:
        """Evaluate exactly at a rational point (every used variable set)."""
        num = _poly_eval(self.num, self.table, point, Fraction)
        den = _poly_eval(self.den, self.table, point, Fraction)
        if den == 0:
            raise ZeroDivisionError("evaluation point lies on the denominator zero set")
        return num / den

    def eval_float(self, point: dict[str, float]) -> float:
        num = _poly_eval(self.num, self.table, point, float)
        den = _poly_eval(self.den, self.table, point, float)
        return num / den

    # -- printing -----------------------------------------------------
    def __str__(self) -> str:
        num = _poly_str(self.num, self.table)
        if self.den == self.table.ring.one:
            return num
        return f"({num})/({_poly_str(self.den, self.table)})"

    def __repr__(self) -> str:
        return f"RatExpr({self})"


def _poly_subs(poly, table: VarTable, images: dict[str, RatExpr], target: VarTable) -> RatExpr:
    result = target.zero
    names = table.names
    pow_cache: dict[tuple[int, int], RatExpr] = {}

    def power(i: int, e: int) -> RatExpr:
        key = (i, e)
        if key not in pow_cache:
            pow_cache[key] = images[names[i]] ** e
        return pow_cache[key]

    for mono, coef in poly.terms():
        term = target.const(Fraction(int(coef.numerator), int(coef.denominator)))
        for i, e in enumerate(mono):
            if e:
                term = term * power(i, e)
        result = result + term
    return result


def _poly_eval(poly, table: VarTable, point: dict, numtype):
    names = table.names
    total = numtype(0)
    for mono, coef in poly.terms():
        value = numtype(Fraction(int(coef.numerator), int(coef.denominator)))
        for i, e in enumerate(mono):
            if e:
                value *= point[names[i]] ** e
        total += value
    return total


def _coef_str(coef) -> str:
    if coef.denominator == 1:
        return str(coef.numerator)
    return f"{coef.numerator}/{coef.denominator}"


def _poly_str(poly, table: VarTable) -> str:
    if not poly:
        return "0"
    names = table.names
    pieces = []
    for mono, coef in sorted(poly.terms(), key=lambda t: t[0], reverse=True):
        factors = []
        for i, e in enumerate(mono):
            if e == 1:
                factors.append(names[i])
            elif e > 1:
                factors.append(f"{names[i]}^{e}")
        neg = coef < 0
        mag = -coef if neg else coef
        if factors and mag == 1:
            body = "*".join(factors)
        elif factors:
            body = "*".join([_coef_str(mag)] + factors)
        else:
            body = _coef_str(mag)
        pieces.append(("-" if neg else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([()+\-*/^]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    _BINARY = {"+": 1, "-": 1, "*": 2, "/": 2}

    def __init__(self, tokens, table: VarTable):
        self.tokens = tokens
        self.table = table
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> RatExpr:
        expr = self.expression(0)
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos)
        return expr

    def expression(self, min_prec: int) -> RatExpr:
        left = self.prefix()
        while True:
            kind, value, _ = self.peek()
            if kind != "op":
                break
            prec = self._BINARY.get(value)
            if prec is None or prec < min_prec:
                break
            self.advance()
            right = self.expression(prec + 1)
            if value == "+":
                left = left + right
            elif value == "-":
                left = left - right
            elif value == "*":
                left = left * right
            else:
                left = left / right
        return left

    def prefix(self) -> RatExpr:
        kind, value, pos = self.advance()
        if kind == "op" and value == "-":
            return -self.prefix()
        if kind == "op" and value == "+":
            return self.prefix()
        return self.atom(kind, value, pos)

    def atom(self, kind, value, pos) -> RatExpr:
        if kind == "int":
            expr = self.table.const(value)
        elif kind == "name":
            if value not in self.table.names:
                raise ParseError(f"unknown identifier {value!r}", pos)
            expr = self.table.var(value)
        elif kind == "op" and value == "(":
            expr = self.expression(0)
            kind2, value2, pos2 = self.advance()
            if not (kind2 == "op" and value2 == ")"):
                raise ParseError("expected ')'", pos2)
        else:
            raise ParseError("expected a value", pos)
        while True:
            kind2, value2, _ = self.peek()
            if kind2 == "op" and value2 == "^":
                self.advance()
                expr = expr ** self.exponent()
            else:
                break
        return expr

    def exponent(self) -> int:
        kind, value, pos = self.advance()
        sign = 1
        if kind == "op" and value == "-":
            sign = -1
            kind, value, pos = self.advance()
        if kind != "int":
            raise ParseError("exponent must be an integer literal", pos)
        return sign * value


def parse(text: str, table: VarTable) -> RatExpr:
    """Parse an expression string to a canonical :class:`RatExpr`."""
    return _Parser(_tokenize(text), table).parse()


def arith(op: str, lhs: RatExpr, rhs: RatExpr) -> RatExpr:
    """Field operation dispatcher: ``op`` is one of add, sub, mul, div."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "div":
        return lhs / rhs
    raise ValueError(f"unknown operation {op!r}")


def diff(expr: RatExpr, name: str) -> RatExpr:
    return expr.diff(name)


def substitute(expr: RatExpr, mapping: dict[str, RatExpr]) -> RatExpr:
    return expr.subs(mapping)


def equals(lhs: RatExpr, rhs: RatExpr) -> bool:
    """Exact equality: identical canonical forms."""
    if lhs.table != rhs.table:
        raise ValueError("operands use different VarTables")
    return lhs == rhs


# ---------------------------------------------------------------------------
# Power products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerProduct:
    """Formal product of rational bases raised to parameter-only exponents.

    Non-rational gauge factors such as ``s^alpha * (s-t)^(1-gamma2)`` live
    here; only their logarithmic derivatives (always rational) feed back
    into :class:`RatExpr` computations.
    """

    table: VarTable
    factors: tuple[tuple[RatExpr, RatExpr], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))
        for base, exponent in self.factors:
            if base.table != self.table or exponent.table != self.table:
                raise ValueError("factor uses a different VarTable")
            if base.is_zero:
                raise ValueError("power product base must be nonzero")
            if exponent.depends_on_coords():
                raise ValueError("exponents may not involve coordinates")

    def __mul__(self, other: "PowerProduct") -> "PowerProduct":
        if other.table != self.table:
            raise ValueError("operands use different VarTables")
        return PowerProduct(self.table, self.factors + other.factors)

    def inverse(self) -> "PowerProduct":
        return PowerProduct(self.table, tuple((b, -e) for b, e in self.factors))

    def log_derivative(self, name: str) -> RatExpr:
        """d/dname of log of the product, as a rational expression."""
        total = self.table.zero
        for base, exponent in self.factors:
            total = total + exponent * (base.diff(name) / base)
        return total

    def eval_float(self, point: dict[str, float]) -> float:
        value = 1.0
        for base, exponent in self.factors:
            value *= base.eval_float(point) ** exponent.eval_float(point)
        return value

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return " * ".join(f"({base})^({exponent})" for base, exponent in self.factors)


def log_derivative(product: PowerProduct, name: str) -> RatExpr:
    return product.log_derivative(name)


def sum_products(table: VarTable, terms) -> RatExpr:
    """Sum of signed products with one final canonicalization.

    ``terms`` yields (sign, factors) with integer sign and a sequence of
    RatExpr factors.  Intermediate sums keep denominators close to the
    running lcm (gcd on denominators only) and skip the full numerator
    cancellation until the end, which is much cheaper for long
    accumulations of structured fractions such as curvature entries.
    """
    ring = table.ring
    num, den = ring.zero, ring.one
    for sign, factors in terms:
        n2, d2 = ring.one, ring.one
        for factor in factors:
            if factor.table != table:
                raise ValueError("operands use different VarTables")
            n2 = n2 * factor.num
            d2 = d2 * factor.den
        if not n2:
            continue
        if sign < 0:
            n2 = -n2
        g = den.gcd(d2)
        d2g = d2.exquo(g)
        num = num * d2g + n2 * den.exquo(g)
        den = den * d2g
    return RatExpr._make(table, num, den)

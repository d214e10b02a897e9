"""Canonical rational normal form for expressions.

A :class:`RationalForm` is ``num / prod(base**e)``: a sparse polynomial over
Q in a set of *atoms* (jet variables and ``Apply`` subterms, the latter
treated as independent indeterminates) divided by a factored denominator.

Denominator bases are kept primitive with a positive leading coefficient;
monomial factors are split off into single-atom bases. After every
operation each base is trial-divided out of the numerator, so no base
divides the numerator. That makes zero-testing exact (``num == 0``) without
a multivariate GCD.

Monomial order is graded lexicographic with atoms ordered
``x < y1 < .. < p1 < .. < q1 < .. < Apply atoms``.
"""
from __future__ import annotations

import heapq
import math
import random
from fractions import Fraction
from functools import lru_cache
from operator import add as _iadd

from .errors import DivisionByZeroExpr, EvalSingular
from .expr import (
    KINDS,
    Apply,
    Const,
    Expr,
    IntPow,
    Product,
    Sum,
    Var,
    Variable,
    add,
    apply,
    as_expr,
    diff,
    evaluate,
    mul,
    power,
    render,
    variables,
)

# ---------------------------------------------------------------------------
# atoms


def atom_key(atom) -> tuple:
    if isinstance(atom, Var):
        return (0,) + atom.sort_key
    if isinstance(atom, Variable):
        return (0,) + atom.var.sort_key
    if isinstance(atom, Apply):
        return (1, atom.fn, render(atom.arg), atom)
    raise TypeError(f"not an atom: {atom!r}")


def atom_expr(key: tuple) -> Expr:
    if key[0] == 0:
        return Variable(Var(KINDS[key[1]], key[2]))
    return key[3]


def _mono_key(e: tuple):
    return (sum(e), e[::-1])


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Sparse multivariate polynomial over Q.

    ``gens`` is the sorted tuple of atom keys actually used; ``terms`` maps
    dense exponent tuples to nonzero Fractions. Instances are treated as
    immutable.
    """

    __slots__ = ("gens", "terms", "_hash", "_skey")

    def __init__(self, gens: tuple, terms: dict):
        self.gens = gens
        self.terms = terms
        self._hash = None
        self._skey = None

    # construction -----------------------------------------------------
    @classmethod
    def make(cls, gens, terms) -> "Poly":
        terms = {e: c for e, c in terms.items() if c}
        if not terms:
            return ZERO_POLY
        n = len(gens)
        used = [False] * n
        for e in terms:
            for i in range(n):
                if e[i]:
                    used[i] = True
        if not all(used):
            idx = [i for i in range(n) if used[i]]
            gens = tuple(gens[i] for i in idx)
            terms = {tuple(e[i] for i in idx): c for e, c in terms.items()}
        return cls(tuple(gens), terms)

    @classmethod
    def const(cls, c) -> "Poly":
        c = Fraction(c)
        return cls((), {(): c}) if c else ZERO_POLY

    @classmethod
    def atom(cls, key) -> "Poly":
        return cls((key,), {(1,): Fraction(1)})

    # basic queries ----------------------------------------------------
    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Poly)
            and self.gens == other.gens
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gens, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.gens

    def constant_value(self) -> Fraction:
        return self.terms.get((), Fraction(0)) if not self.gens else None

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self) -> dict:
        out = {}
        for i, g in enumerate(self.gens):
            out[g] = max(e[i] for e in self.terms)
        return out

    def leading(self):
        e = max(self.terms, key=_mono_key)
        return e, self.terms[e]

    def sort_key(self):
        if self._skey is None:
            self._skey = (
                self.total_degree(),
                len(self.terms),
                self.gens,
                tuple(sorted(self.terms.items(), key=lambda t: _mono_key(t[0]), reverse=True)),
            )
        return self._skey

    def __repr__(self):
        return f"Poly({render(self.to_expr())})"

    # arithmetic -------------------------------------------------------
    def _unify(self, other):
        if self.gens == other.gens:
            return self.gens, self.terms, other.terms
        gens = tuple(sorted(set(self.gens) | set(other.gens)))
        return gens, _embed(self, gens), _embed(other, gens)

    def __add__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        gens, ta, tb = self._unify(other)
        out = dict(ta)
        for e, c in tb.items():
            out[e] = out.get(e, 0) + c
        return Poly.make(gens, out)

    def __neg__(self) -> "Poly":
        return Poly(self.gens, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if not c:
            return ZERO_POLY
        if c == 1:
            return self
        return Poly(self.gens, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return ZERO_POLY
        if not self.gens:
            return other.scale(self.terms[()])
        if not other.gens:
            return self.scale(other.terms[()])
        gens, ta, tb = self._unify(other)
        out: dict = {}
        get = out.get
        for ea, ca in ta.items():
            for eb, cb in tb.items():
                e = tuple(map(_iadd, ea, eb))
                out[e] = get(e, 0) + ca * cb
        return Poly.make(gens, out)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = ONE_POLY
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def diff_index(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Poly.make(self.gens, out)

    def exact_div(self, other: "Poly"):
        """Quotient if ``other`` divides ``self`` exactly, else ``None``."""
        if not self.terms:
            return ZERO_POLY
        if not other.gens:
            return self.scale(1 / other.terms[()])
        if not set(other.gens) <= set(self.gens):
            return None
        da = self.degree_in()
        for g, k in other.degree_in().items():
            if da[g] < k:
                return None
        gens, ta, tb = self._unify(other)
        lb, lbc = max(tb.items(), key=lambda t: _mono_key(t[0]))
        rem = dict(ta)
        heap = [(_neg_key(e), e) for e in rem]
        heapq.heapify(heap)
        quo = {}
        while rem:
            while True:
                _, le = heapq.heappop(heap)
                if le in rem:
                    break
            lc = rem[le]
            qe = tuple(a - b for a, b in zip(le, lb))
            if min(qe) < 0:
                return None
            qc = lc / lbc
            quo[qe] = qc
            for eb, cb in tb.items():
                e = tuple(map(_iadd, qe, eb))
                v = rem.get(e)
                if v is None:
                    rem[e] = -qc * cb
                    heapq.heappush(heap, (_neg_key(e), e))
                else:
                    v -= qc * cb
                    if v:
                        rem[e] = v
                    else:
                        del rem[e]
        return Poly.make(gens, quo)

    def primitive(self):
        """``(c, P)`` with ``self == c*P``, P integral, content 1, leading coefficient > 0."""
        coeffs = list(self.terms.values())
        den = math.lcm(*(c.denominator for c in coeffs))
        g = math.gcd(*(c.numerator * (den // c.denominator) for c in coeffs))
        c = Fraction(g, den)
        if self.leading()[1] < 0:
            c = -c
        if c == 1:
            return c, self
        return c, Poly(self.gens, {e: v / c for e, v in self.terms.items()})

    def monomial_content(self) -> tuple:
        return tuple(min(col) for col in zip(*self.terms)) if self.gens else ()

    def shift_down(self, mono: tuple) -> "Poly":
        return Poly.make(self.gens, {tuple(a - b for a, b in zip(e, mono)): c for e, c in self.terms.items()})

    def to_expr(self) -> Expr:
        if not self.terms:
            return Const(0)
        atoms = [atom_expr(g) for g in self.gens]
        out = []
        for e in sorted(self.terms, key=_mono_key, reverse=True):
            out.append(mul(Const(self.terms[e]), *(power(a, k) for a, k in zip(atoms, e) if k)))
        return add(*out)


def _neg_key(e):
    d, rev = _mono_key(e)
    return (-d, tuple(-x for x in rev))


def _embed(p: Poly, gens: tuple) -> dict:
    where = {g: i for i, g in enumerate(gens)}
    pos = [where[g] for g in p.gens]
    n = len(gens)
    out = {}
    for e, c in p.terms.items():
        v = [0] * n
        for i, k in zip(pos, e):
            v[i] = k
        out[tuple(v)] = c
    return out


ZERO_POLY = Poly((), {})
ONE_POLY = Poly((), {(): Fraction(1)})


@lru_cache(maxsize=8192)
def _ppow(base: Poly, k: int) -> Poly:
    return base**k


# ---------------------------------------------------------------------------
# rational forms


class RationalForm:
    """``num / prod(base**exp)`` in reduced form (no base divides ``num``)."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: dict):
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def const(cls, c) -> "RationalForm":
        return cls(Poly.const(c), {})

    @classmethod
    def atom(cls, key) -> "RationalForm":
        return cls(Poly.atom(key), {})

    @classmethod
    def from_poly(cls, p: Poly) -> "RationalForm":
        return cls(p, {})

    @property
    def numerator(self) -> Poly:
        return self.num

    @property
    def denominator(self) -> Poly:
        out = ONE_POLY
        for b, e in self.den.items():
            out = out * _ppow(b, e)
        return out

    def bases(self):
        return sorted(self.den.items(), key=lambda t: t[0].sort_key())

    def is_zero(self) -> bool:
        return not self.num.terms

    def is_constant(self) -> bool:
        return not self.den and self.num.is_constant()

    def constant_value(self):
        return self.num.constant_value() if not self.den else None

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, RationalForm)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, frozenset(self.den.items())))
        return self._hash

    def __repr__(self):
        return f"RationalForm({render(self.to_expr())})"

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _rf(other)
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        if self.den == other.den:
            return _reduced(self.num + other.num, dict(self.den))
        lcm = dict(self.den)
        for b, e in other.den.items():
            if lcm.get(b, 0) < e:
                lcm[b] = e
        na = self.num * _cofactor(lcm, self.den)
        nb = other.num * _cofactor(lcm, other.den)
        return _reduced(na + nb, lcm)

    __radd__ = __add__

    def __neg__(self):
        return RationalForm(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_rf(other))

    def __rsub__(self, other):
        return _rf(other) + (-self)

    def __mul__(self, other):
        other = _rf(other)
        if not self.num.terms or not other.num.terms:
            return ZERO
        if not other.den and other.num.is_constant():
            return RationalForm(self.num.scale(other.num.terms[()]), self.den)
        if not self.den and self.num.is_constant():
            return RationalForm(other.num.scale(self.num.terms[()]), other.den)
        na, da = self.num, dict(self.den)
        nb, db = other.num, dict(other.den)
        na, db = _cross_cancel(na, db)
        nb, da = _cross_cancel(nb, da)
        den = da
        for b, e in db.items():
            den[b] = den.get(b, 0) + e
        return _reduced(na * nb, den, skip_check=not (da and db))

    __rmul__ = __mul__

    def inverse(self) -> "RationalForm":
        if not self.num.terms:
            raise DivisionByZeroExpr("division by an expression that normalizes to 0")
        c, prim = self.num.primitive()
        den = {}
        mono = prim.monomial_content()
        if any(mono):
            for g, k in zip(prim.gens, mono):
                if k:
                    den[Poly.atom(g)] = k
            prim = prim.shift_down(mono)
        if not prim.is_constant():
            den[prim] = den.get(prim, 0) + 1
        num = self.denominator.scale(1 / c)
        return _reduced(num, den)

    def __truediv__(self, other):
        return self * _rf(other).inverse()

    def __rtruediv__(self, other):
        return _rf(other) * self.inverse()

    def __pow__(self, n: int) -> "RationalForm":
        if n == 0:
            return ONE
        if n < 0:
            return self.inverse() ** (-n)
        return RationalForm(_ppow(self.num, n), {b: e * n for b, e in self.den.items()})

    # calculus ---------------------------------------------------------
    def diff(self, v: Var) -> "RationalForm":
        dnum = _poly_diff(self.num, v)
        if not self.den:
            return dnum
        involved = []
        for b, e in self.den.items():
            db = _poly_diff(b, v)
            if db.num.terms:
                involved.append((b, e, db))
        if not involved:
            if not dnum.num.terms:
                return ZERO
            return dnum * RationalForm(ONE_POLY, self.den)
        if not dnum.den and all(not db.den for _, _, db in involved):
            bases = [b for b, _, _ in involved]
            big = ONE_POLY
            for b in bases:
                big = big * b
            acc = dnum.num * big
            for k, (b, e, db) in enumerate(involved):
                others = ONE_POLY
                for j, o in enumerate(bases):
                    if j != k:
                        others = others * o
                acc = acc - self.num * db.num.scale(e) * others
            den = dict(self.den)
            for b in bases:
                den[b] += 1
            return _reduced(acc, den)
        inv_den = RationalForm(ONE_POLY, self.den)
        out = dnum * inv_den
        numer = RationalForm(self.num, {})
        for b, e, db in involved:
            out = out - numer * db * RationalForm.const(e) * RationalForm(ONE_POLY, {b: 1}) * inv_den
        return out

    def to_expr(self) -> Expr:
        ne = self.num.to_expr()
        if not self.den:
            return ne
        return mul(ne, *(power(b.to_expr(), -e) for b, e in self.bases()))


def _rf(x) -> RationalForm:
    if isinstance(x, RationalForm):
        return x
    if isinstance(x, Poly):
        return RationalForm(x, {})
    return RationalForm.const(x)


ZERO = RationalForm(ZERO_POLY, {})
ONE = RationalForm(ONE_POLY, {})


def _cofactor(lcm: dict, den: dict) -> Poly:
    out = ONE_POLY
    for b, e in lcm.items():
        k = e - den.get(b, 0)
        if k:
            out = out * _ppow(b, k)
    return out


def _cross_cancel(num: Poly, den: dict):
    for b in list(den):
        while den[b]:
            q = num.exact_div(b)
            if q is None:
                break
            num = q
            den[b] -= 1
        if not den[b]:
            del den[b]
    return num, den


def _reduced(num: Poly, den: dict, skip_check=False) -> RationalForm:
    if not num.terms:
        return ZERO
    den = {b: e for b, e in den.items() if e}
    if den and not skip_check:
        num, den = _cross_cancel(num, den)
    return RationalForm(num, den)


@lru_cache(maxsize=4096)
def _apply_derivative(key: tuple, v: Var) -> RationalForm:
    return normalize(diff(key[3], v))


def _poly_diff(p: Poly, v: Var) -> RationalForm:
    vk = (0,) + v.sort_key
    out = None
    for i, g in enumerate(p.gens):
        if g[0] == 0:
            if g == vk:
                term = RationalForm(p.diff_index(i), {})
            else:
                continue
        else:
            da = _apply_derivative(g, v)
            if not da.num.terms:
                continue
            term = RationalForm(p.diff_index(i), {}) * da
        out = term if out is None else out + term
    return ZERO if out is None else out


# ---------------------------------------------------------------------------
# public entry points

_EXACT_FOLDS = {("sin", 0): 0, ("cos", 0): 1, ("exp", 0): 1, ("ln", 1): 0}


def normalize(e) -> RationalForm:
    """Canonical rational normal form of ``e``.

    Raises :class:`DivisionByZeroExpr` if a denominator normalizes to 0.
    """
    if isinstance(e, RationalForm):
        return e
    e = as_expr(e)
    memo: dict = {}

    def nf(node) -> RationalForm:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            r = RationalForm.const(node.value)
        elif isinstance(node, Variable):
            r = RationalForm.atom(atom_key(node.var))
        elif isinstance(node, Sum):
            r = ZERO
            for t in node.terms:
                r = r + nf(t)
        elif isinstance(node, Product):
            r = ONE
            for f in node.factors:
                r = r * nf(f)
        elif isinstance(node, IntPow):
            r = nf(node.base) ** node.exp
        elif isinstance(node, Apply):
            arg = nf(node.arg)
            cv = arg.constant_value()
            if cv is not None and (node.fn, cv) in _EXACT_FOLDS:
                r = RationalForm.const(_EXACT_FOLDS[node.fn, cv])
            else:
                r = RationalForm.atom(atom_key(apply(node.fn, arg.to_expr())))
        else:
            raise TypeError(node)
        memo[node] = r
        return r

    return nf(e)


def is_zero(e) -> bool:
    """Exact on the rational fragment; ``Apply`` atoms are free indeterminates.

    Sound (``True`` implies the expression vanishes) but conservative when a
    zero only follows from transcendental identities such as sin^2+cos^2=1.
    """
    return normalize(e).is_zero()


def simplify(e) -> Expr:
    return normalize(e).to_expr()


def canonical_string(e) -> str:
    return render(normalize(e).to_expr())


def equal(a, b) -> bool:
    return (normalize(a) - normalize(b)).is_zero()


def sample_vanishes(e: Expr, points: int = 20, seed: int = 0, tol: float = 1e-9):
    """Advisory numeric probe: does ``e`` look like 0 at random points?

    Returns ``True``/``False``, or ``None`` when too few points were
    evaluable. Never used to decide :func:`is_zero`.
    """
    vs = sorted(variables(e))
    rng = random.Random(seed)
    hits = 0
    for _ in range(points * 5):
        vals = {v: rng.uniform(-2.0, 2.0) for v in vs}
        try:
            val = evaluate(e, vals)
        except (EvalSingular, ValueError, OverflowError, ZeroDivisionError):
            continue
        if abs(val) > tol:
            return False
        hits += 1
        if hits == points:
            return True
    return None

"""Systems y_i''' = f_i(x, y, p, q), jet points and the total derivative."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Sequence

from .errors import DimensionTooSmall, IndexOutOfRange
from .expr import ZERO, Expr, P, Q, Var, X, Y, add, as_expr, diff, mul, power, substitute, var, variables
from .rational import RationalForm, atom_key, normalize


@dataclass(frozen=True)
class OdeSystem:
    m: int
    f: tuple

    def __post_init__(self):
        if self.m < 2:
            raise DimensionTooSmall(f"m = {self.m}; systems need m >= 2")
        f = tuple(as_expr(e) for e in self.f)
        if len(f) != self.m:
            raise ValueError(f"expected {self.m} right-hand sides, got {len(f)}")
        for i, e in enumerate(f, 1):
            for v in variables(e):
                if v.index > self.m:
                    raise IndexOutOfRange(f"f{i} uses {v} but m = {self.m}")
        object.__setattr__(self, "f", f)

    def jet_vars(self) -> list:
        m = self.m
        return [X()] + [Y(i) for i in range(1, m + 1)] + [P(i) for i in range(1, m + 1)] + [
            Q(i) for i in range(1, m + 1)
        ]


@dataclass(frozen=True)
class JetPoint:
    x: float
    y: tuple
    p: tuple
    q: tuple

    def __post_init__(self):
        for name in ("y", "p", "q"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not len(self.y) == len(self.p) == len(self.q):
            raise ValueError("y, p, q must have the same length")

    @property
    def m(self) -> int:
        return len(self.y)

    def values(self) -> dict:
        out = {X(): self.x}
        for i in range(self.m):
            out[Y(i + 1)] = self.y[i]
            out[P(i + 1)] = self.p[i]
            out[Q(i + 1)] = self.q[i]
        return out

    def flat(self) -> list:
        return [self.x, *self.y, *self.p, *self.q]

    @classmethod
    def from_flat(cls, m: int, values: Sequence) -> "JetPoint":
        values = list(values)
        if len(values) != 1 + 3 * m:
            raise ValueError(f"a jet point for m = {m} needs {1 + 3 * m} numbers, got {len(values)}")
        return cls(values[0], values[1 : m + 1], values[m + 1 : 2 * m + 1], values[2 * m + 1 :])

    @classmethod
    def from_values(cls, m: int, vals) -> "JetPoint":
        return cls(
            vals[X()],
            [vals[Y(i)] for i in range(1, m + 1)],
            [vals[P(i)] for i in range(1, m + 1)],
            [vals[Q(i)] for i in range(1, m + 1)],
        )


def total_derivative(sys: OdeSystem, e: Expr) -> Expr:
    """D = d/dx + p_i d/dy_i + q_i d/dp_i + f_i d/dq_i applied to ``e``."""
    e = as_expr(e)
    terms = [diff(e, X())]
    for i in range(1, sys.m + 1):
        terms.append(mul(var(P(i)), diff(e, Y(i))))
        terms.append(mul(var(Q(i)), diff(e, P(i))))
        terms.append(mul(sys.f[i - 1], diff(e, Q(i))))
    return add(*terms)


# ---------------------------------------------------------------------------
# reference systems


def circles_system(m: int) -> OdeSystem:
    """f_i = 3 q_i (sum p_j q_j) / (1 + sum p_j^2)."""
    if m < 2:
        raise DimensionTooSmall(f"m = {m}; systems need m >= 2")
    pq = add(*(mul(var(P(j)), var(Q(j))) for j in range(1, m + 1)))
    den = add(1, *(power(var(P(j)), 2) for j in range(1, m + 1)))
    return OdeSystem(m, tuple(mul(3, var(Q(i)), pq, power(den, -1)) for i in range(1, m + 1)))


def trivial_system(m: int) -> OdeSystem:
    if m < 2:
        raise DimensionTooSmall(f"m = {m}; systems need m >= 2")
    return OdeSystem(m, (ZERO,) * m)


def diagonal_system(g: Expr, m: int = 2) -> OdeSystem:
    """m copies of a scalar equation written in x, y1, p1, q1."""
    out = []
    for i in range(1, m + 1):
        out.append(substitute(g, {Y(1): var(Y(i)), P(1): var(P(i)), Q(1): var(Q(i))}))
    return OdeSystem(m, tuple(out))


def _small_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 3))


def random_polynomial_system(rng: random.Random, m: int = 2, degree: int = 2, density: float = 0.5) -> OdeSystem:
    """Polynomial f of total degree <= ``degree`` in (p, q).

    Each monomial coefficient is a small polynomial in (x, y), sometimes
    cubic, so x- and y-derivatives are exercised and central differences
    are not exact.
    """
    pq = [P(i) for i in range(1, m + 1)] + [Q(i) for i in range(1, m + 1)]
    xy = [X()] + [Y(i) for i in range(1, m + 1)]
    monos = [()]
    for d in range(1, degree + 1):
        monos += list(combinations_with_replacement(pq, d))
    fs = []
    for _ in range(m):
        terms = []
        for mono in monos:
            if rng.random() > density:
                continue
            coef = [_small_rational(rng)]
            if rng.random() < 0.5:
                coef.append(mul(_small_rational(rng), var(rng.choice(xy))))
            if rng.random() < 0.3:
                coef.append(mul(_small_rational(rng), *(var(rng.choice(xy)) for _ in range(3))))
            terms.append(mul(add(*coef), *(var(v) for v in mono)))
        fs.append(add(*terms))
    return OdeSystem(m, tuple(fs))


def random_jet_point(rng: random.Random, m: int, scale: float = 1.0) -> JetPoint:
    return JetPoint.from_flat(m, [rng.uniform(-scale, scale) for _ in range(1 + 3 * m)])


# ---------------------------------------------------------------------------
# memoized calculus on normal forms


class JetCalculus:
    """Partial and total derivatives of normal forms for one system.

    Results are memoized per instance; one instance serves one computation.
    """

    def __init__(self, sys: OdeSystem):
        self.sys = sys
        self.m = sys.m
        self.f = [normalize(e) for e in sys.f]
        rng = range(1, self.m + 1)
        self.p = [RationalForm.atom(atom_key(P(i))) for i in rng]
        self.q = [RationalForm.atom(atom_key(Q(i))) for i in rng]
        self._d: dict = {}
        self._D: dict = {}

    def d(self, rf: RationalForm, v: Var) -> RationalForm:
        key = (rf, v)
        hit = self._d.get(key)
        if hit is None:
            hit = self._d[key] = rf.diff(v)
        return hit

    def D(self, rf: RationalForm) -> RationalForm:
        hit = self._D.get(rf)
        if hit is not None:
            return hit
        out = self.d(rf, X())
        for i in range(self.m):
            for coef, v in ((self.p[i], Y(i + 1)), (self.q[i], P(i + 1)), (self.f[i], Q(i + 1))):
                dv = self.d(rf, v)
                if not dv.is_zero():
                    out = out + coef * dv
        self._D[rf] = out
        return out

    def jacobian(self, kind: str) -> list:
        """Matrix [i][j] = d f_i / d kind_j for kind in y, p, q."""
        mk = {"y": Y, "p": P, "q": Q}[kind]
        return [[self.d(self.f[i], mk(j + 1)) for j in range(self.m)] for i in range(self.m)]

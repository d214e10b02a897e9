"""Finite-difference oracle for the invariants.

Every derivative in the closed-form invariants is replaced by a central
difference applied to a black-box right-hand side; total derivatives are
composed from those stencils. Nothing here touches the symbolic kernel
except :meth:`NumericRhs.from_system`, which only evaluates f.

Nested stencils go four levels deep, so arithmetic runs in a private
mpmath context (``FdConfig.dps`` digits). With float64 the roundoff at
h = 1e-4 would be of order eps/h^4 ~ 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from .errors import EvalSingular, StencilOutOfDomain
from .expr import FLOAT, MpLib, P, Q, Var, X, Y, compile_expr


@dataclass(frozen=True)
class FdConfig:
    step: float = 1e-4
    tolerance: float = 1e-6
    relaxed_tolerance: float = 1e-4  # W3 and I4 carry second total derivatives
    dps: int = 50

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not (self.tolerance > 0 and self.relaxed_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.dps < 15:
            raise ValueError("dps must be at least 15")

    def tolerance_for(self, name: str) -> float:
        return self.relaxed_tolerance if name in ("W3", "I4") else self.tolerance

    def context(self):
        ctx = mpmath.MPContext()
        ctx.dps = self.dps
        return ctx


class NumericRhs:
    """Black-box f: ``fn(values, i)`` returns f^i (i is 1-based).

    ``values`` maps :class:`Var` to numbers. ``bind(ctx)`` may supply a
    variant of ``fn`` that computes in a given mpmath context; without it,
    ``fn`` is called with mpmath numbers and must cope with them.
    """

    def __init__(self, m: int, fn: Callable, bind: Callable | None = None):
        self.m = m
        self.fn = fn
        self._bind = bind

    def __call__(self, values, i):
        return self.fn(values, i)

    def bound(self, ctx) -> Callable:
        return self._bind(ctx) if self._bind is not None else self.fn

    @classmethod
    def from_system(cls, sys) -> "NumericRhs":
        exprs = sys.f

        def make(lib):
            funcs = [compile_expr(e, lib) for e in exprs]
            return lambda values, i: funcs[i - 1](values)

        return cls(sys.m, make(FLOAT), lambda ctx: make(MpLib(ctx)))


class _Stencils:
    def __init__(self, rhs: NumericRhs, cfg: FdConfig):
        self.cfg = cfg
        self.m = rhs.m
        self.ctx = cfg.context()
        self.h = self.ctx.mpf(cfg.step)
        fn = rhs.bound(self.ctx)
        order = [X()] + [V(i) for V in (Y, P, Q) for i in range(1, self.m + 1)]
        cache: dict = {}

        # nested stencils revisit the same shifted points many times
        def cached(vals, i):
            key = (i, *(vals[v] for v in order))
            hit = cache.get(key)
            if hit is None:
                hit = cache[key] = fn(vals, i)
            return hit

        self.f = [(lambda vals, i=i: cached(vals, i)) for i in range(1, self.m + 1)]

    def point(self, pt) -> dict:
        mpf = self.ctx.mpf
        return {v: mpf(val) for v, val in pt.values().items()}

    def partial(self, g, v: Var):
        h = self.h

        def dg(vals):
            hi = dict(vals)
            hi[v] = vals[v] + h
            lo = dict(vals)
            lo[v] = vals[v] - h
            try:
                return (g(hi) - g(lo)) / (2 * h)
            except (EvalSingular, ZeroDivisionError, ValueError) as exc:
                raise StencilOutOfDomain(f"stencil along {v} leaves the domain: {exc}") from exc

        return dg

    def total(self, g):
        m = self.m
        dx = self.partial(g, X())
        dy = [self.partial(g, Y(i)) for i in range(1, m + 1)]
        dp = [self.partial(g, P(i)) for i in range(1, m + 1)]
        dq = [self.partial(g, Q(i)) for i in range(1, m + 1)]
        f = self.f

        def Dg(vals):
            out = dx(vals)
            for i in range(m):
                out += vals[P(i + 1)] * dy[i](vals) + vals[Q(i + 1)] * dp[i](vals) + f[i](vals) * dq[i](vals)
            return out

        return Dg


def fd_partial(rhs: NumericRhs, i: int, v: Var, pt, cfg: FdConfig = FdConfig()) -> float:
    """Central difference of f^i along ``v`` at ``pt``."""
    st = _Stencils(rhs, cfg)
    vals = st.point(pt)
    st.f[i - 1](vals)
    return float(st.partial(st.f[i - 1], v)(vals))


def fd_total_derivative(rhs: NumericRhs, g: Callable, pt, cfg: FdConfig = FdConfig()) -> float:
    """Numeric D g = g_x + p_i g_{y_i} + q_i g_{p_i} + f^i g_{q_i} at ``pt``."""
    st = _Stencils(rhs, cfg)
    return float(st.total(g)(st.point(pt)))


@dataclass
class NumericInvariants:
    W2: np.ndarray
    I2: np.ndarray
    W3: np.ndarray
    I4: np.ndarray
    Hx: float
    Hm1: np.ndarray

    def components(self):
        return {"W2": self.W2, "I2": self.I2, "W3": self.W3, "I4": self.I4}


def _to_array(x) -> np.ndarray:
    return np.array(x, dtype=object).astype(float)


def fd_invariants(rhs: NumericRhs, pt, cfg: FdConfig = FdConfig()) -> NumericInvariants:
    """Numeric W2, I2, W3, I4, H^x and H^-1 at ``pt`` from stencils alone."""
    raw = _fd_raw(_Stencils(rhs, cfg), pt)
    return NumericInvariants(**{k: (float(v) if k == "Hx" else _to_array(v)) for k, v in raw.items()})


def _fd_raw(st: _Stencils, pt) -> dict:
    m = st.m
    rng = range(m)
    vals = st.point(pt)
    for fi in st.f:
        fi(vals)  # singular centre raises EvalSingular, not StencilOutOfDomain

    fq = [[st.partial(st.f[i], Q(j + 1)) for j in rng] for i in rng]
    fp = [[st.partial(st.f[i], P(j + 1)) for j in rng] for i in rng]
    Dfq = [[st.total(fq[i][j]) for j in rng] for i in rng]

    FQ = st.ctx.matrix([[fq[i][j](vals) for j in rng] for i in rng])
    FP = st.ctx.matrix([[fp[i][j](vals) for j in rng] for i in rng])
    FY = st.ctx.matrix([[st.partial(st.f[i], Y(j + 1))(vals) for j in rng] for i in rng])
    DFQ = st.ctx.matrix([[Dfq[i][j](vals) for j in rng] for i in rng])
    DFP = st.ctx.matrix([[st.total(fp[i][j])(vals) for j in rng] for i in rng])
    DDFQ = st.ctx.matrix([[st.total(Dfq[i][j])(vals) for j in rng] for i in rng])

    third = Fraction(1, 3)
    mpq = lambda q: st.ctx.mpf(q.numerator) / q.denominator
    M = FP - DFQ + FQ * FQ * mpq(third)
    trM = sum(M[i, i] for i in rng)
    W2 = [[M[i, j] - (trM / m if i == j else 0) for j in rng] for i in rng]

    S = [[[st.partial(fq[i][j], Q(k + 1))(vals) for k in rng] for j in rng] for i in rng]
    T = [sum(S[l][l][k] for l in rng) for k in rng]
    I2 = [
        [[S[i][j][k] - ((T[k] if i == j else 0) + (T[j] if i == k else 0)) / (m + 1) for k in rng] for j in rng]
        for i in rng
    ]

    W3 = (
        FY
        + FQ * FP * mpq(third)
        - DFP * mpq(Fraction(1, 2))
        + DDFQ * mpq(Fraction(1, 6))
        + FQ * FQ * FQ * mpq(Fraction(2, 27))
        - FQ * DFQ * mpq(Fraction(5, 18))
        - DFQ * FQ * mpq(Fraction(1, 18))
    )

    def Hx_fn(v):
        acc = 0
        for i in rng:
            acc += fp[i][i](v) - Dfq[i][i](v) + sum(fq[i][k](v) * fq[k][i](v) for k in rng) / 3
        return -acc / (4 * m)

    fqq = [[st.partial(fq[i][i], Q(j + 1)) for j in rng] for i in rng]
    H1 = [(lambda v, j=j: sum(fqq[i][j](v) for i in rng) / (6 * (m + 1))) for j in rng]
    H1_at = [h(vals) for h in H1]

    I4 = []
    for j in rng:
        DH1j = st.total(H1[j])
        H1fq = lambda v, j=j: sum(H1[l](v) * fq[l][j](v) for l in rng)
        Hx_qj = st.partial(Hx_fn, Q(j + 1))
        row = []
        for k in rng:
            qk = Q(k + 1)
            row.append(
                -st.partial(H1[k], P(j + 1))(vals)
                + st.partial(Hx_qj, qk)(vals)
                - st.partial(DH1j, qk)(vals)
                - st.partial(H1fq, qk)(vals)
                + 2 * H1_at[j] * H1_at[k]
            )
        I4.append(row)

    return {"W2": W2, "I2": I2, "W3": W3.tolist(), "I4": I4, "Hx": Hx_fn(vals), "Hm1": H1_at}


def max_relative_deviation(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - b| / max(1, |b|), elementwise; ``b`` is the reference."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


@dataclass
class OracleComparison:
    deviations: dict
    tolerances: dict

    @property
    def passed(self) -> bool:
        return all(self.deviations[k] <= self.tolerances[k] for k in self.deviations)


def compare_with_symbolic(inv, rhs: NumericRhs, pt, cfg: FdConfig = FdConfig()) -> OracleComparison:
    """Symbolic ``InvariantSet`` evaluated at ``pt`` against the oracle."""
    sym = inv.numeric(pt)
    num = fd_invariants(rhs, pt, cfg)
    devs = {k: max_relative_deviation(v, sym[k]) for k, v in num.components().items()}
    return OracleComparison(devs, {k: cfg.tolerance_for(k) for k in devs})


def _flatten(x):
    if isinstance(x, (list, tuple)):
        return [y for e in x for y in _flatten(e)]
    return [x]


def richardson_factor(inv, rhs: NumericRhs, pt, cfg: FdConfig = FdConfig(), floor: float = 1e-25):
    """Error reduction when h is halved, max over all W2, I2, W3, I4 entries.

    Both sides are compared at ``cfg.dps`` digits. Returns ``None`` when the
    error at h is already below ``floor``: the stencils are exact for that
    input and there is nothing to reduce.
    """
    half = FdConfig(cfg.step / 2, cfg.tolerance, cfg.relaxed_tolerance, cfg.dps)
    ctx = cfg.context()
    lib = MpLib(ctx)
    vals = {v: ctx.mpf(x) for v, x in pt.values().items()}
    sym = {}
    for name, t in inv.components().items():
        sym[name] = [compile_expr(f.to_expr(), lib)(vals) for f in t.flat_forms()]

    def err(c):
        raw = _fd_raw(_Stencils(rhs, c), pt)
        worst = ctx.mpf(0)
        for name, ref in sym.items():
            for a, b in zip(_flatten(raw[name]), ref):
                worst = max(worst, abs(ctx.mpf(a) - b))
        return float(worst)

    e1, e2 = err(cfg), err(half)
    if e1 < floor:
        return None
    return e1 / e2 if e2 > 0 else float("inf")

"""Fundamental differential invariants W2, I2, W3, I4 of a third-order system.

Notation: f_q, f_p, f_y are the Jacobian matrices (row i = equation,
column j = variable), products are matrix products and D is the total
derivative. With

    M  = f_p - D f_q + 1/3 f_q f_q
    H^x  = -tr(M) / (4m)
    H^-1_j = 1/(6(m+1)) sum_i d^2 f^i / dq_i dq_j

the invariants are

    W2 = tr0(M)
    I2 = tr0(d^2 f^i / dq_j dq_k)
    W3 = f_y + 1/3 f_q f_p - 1/2 D f_p + 1/6 D^2 f_q
         + 2/27 f_q^3 - 5/18 f_q (D f_q) - 1/18 (D f_q) f_q
    I4_jk = -dH^-1_k/dp_j + d^2 H^x/dq_j dq_k - d(D H^-1_j)/dq_k
            - d(H^-1_l df^l/dq_j)/dq_k + 2 H^-1_j H^-1_k

The system is point-equivalent to y''' = 0 iff all four vanish.
"""
from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotSymmetric
from .expr import FLOAT, Expr, P, Q, compile_expr, render
from .jet import JetCalculus, OdeSystem
from .rational import ONE, ZERO, RationalForm, normalize, sample_vanishes

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# tensors


def _form(e) -> RationalForm:
    return e if isinstance(e, RationalForm) else normalize(e)


class _TensorBase:
    """Nested tuple of normal forms; Expr views are built on demand."""

    rank = 0

    def __init__(self, forms, roles: str = ""):
        self.forms = self._freeze(forms, self.rank)
        self.roles = roles
        self._exprs = None

    @staticmethod
    def _freeze(x, depth):
        if depth == 0:
            return _form(x)
        return tuple(_TensorBase._freeze(r, depth - 1) for r in x)

    @property
    def m(self) -> int:
        return len(self.forms)

    def flat_forms(self):
        stack = [self.forms]
        for _ in range(self.rank):
            stack = [c for s in stack for c in s]
        return stack

    def _map(self, fn, x=None, depth=None):
        x = self.forms if x is None else x
        depth = self.rank if depth is None else depth
        if depth == 0:
            return fn(x)
        return [self._map(fn, r, depth - 1) for r in x]

    @property
    def entries(self):
        if self._exprs is None:
            self._exprs = self._map(lambda f: f.to_expr())
        return self._exprs

    def __getitem__(self, idx):
        out = self.forms
        for i in idx if isinstance(idx, tuple) else (idx,):
            out = out[i]
        return out.to_expr() if isinstance(out, RationalForm) else out

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.flat_forms())

    def nonzero_entries(self):
        for idx in itertools.product(range(self.m), repeat=self.rank):
            if not self.form(*idx).is_zero():
                yield idx

    def form(self, *idx) -> RationalForm:
        out = self.forms
        for i in idx:
            out = out[i]
        return out

    def to_json(self):
        return self._map(lambda f: render(f.to_expr()))

    def numeric(self, values, lib=FLOAT) -> np.ndarray:
        def ev(f):
            return float(compile_expr(f.to_expr(), lib)(values))

        return np.array(self._map(ev), dtype=float)

    def __eq__(self, other):
        return type(self) is type(other) and self.forms == other.forms

    def __hash__(self):
        return hash(self.forms)

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()!r})"


class Tensor2(_TensorBase):
    """m x m array; ``roles`` labels index placement, e.g. ``"^i_j"`` or ``"_jk"``."""

    rank = 2

    def __init__(self, forms, roles: str = "^i_j"):
        super().__init__(forms, roles)

    def trace(self) -> RationalForm:
        out = ZERO
        for i in range(self.m):
            out = out + self.forms[i][i]
        return out

    def transpose(self) -> "Tensor2":
        m = self.m
        return Tensor2([[self.forms[j][i] for j in range(m)] for i in range(m)], self.roles)

    def is_symmetric(self) -> bool:
        m = self.m
        return all((self.forms[i][j] - self.forms[j][i]).is_zero() for i in range(m) for j in range(i + 1, m))

    @classmethod
    def zeros(cls, m, roles="^i_j") -> "Tensor2":
        return cls([[ZERO] * m for _ in range(m)], roles)


class Tensor3(_TensorBase):
    """m x m x m array indexed [i][j][k] (upper i, lower j, k)."""

    rank = 3

    def __init__(self, forms, roles: str = "^i_jk"):
        super().__init__(forms, roles)

    def contraction(self, which: str) -> list:
        """``"ij"``: sum_l S^l_lk (vector in k); ``"ik"``: sum_l S^l_jl (vector in j)."""
        m = self.m
        out = []
        for a in range(m):
            acc = ZERO
            for l in range(m):
                acc = acc + (self.forms[l][l][a] if which == "ij" else self.forms[l][a][l])
            out.append(acc)
        return out

    def is_symmetric(self) -> bool:
        m = self.m
        return all(
            (self.forms[i][j][k] - self.forms[i][k][j]).is_zero()
            for i in range(m)
            for j in range(m)
            for k in range(j + 1, m)
        )


def _delta(i, j) -> RationalForm:
    return ONE if i == j else ZERO


def traceless2(T: Tensor2) -> Tensor2:
    """T - tr(T)/m * delta."""
    m = T.m
    t = T.trace() * Fraction(1, m)
    return Tensor2([[T.forms[i][j] - t * _delta(i, j) for j in range(m)] for i in range(m)], T.roles)


def traceless3(S: Tensor3) -> Tensor3:
    """Trace-free part of a tensor symmetric in its two lower indices.

    S^i_jk - (delta^i_j T_k + delta^i_k T_j)/(m+1), with T_j = sum_l S^l_lj.
    Both contractions of the result vanish.
    """
    if not S.is_symmetric():
        raise NotSymmetric("tensor is not symmetric in its lower indices")
    m = S.m
    tr = [t * Fraction(1, m + 1) for t in S.contraction("ij")]
    out = [
        [[S.forms[i][j][k] - _delta(i, j) * tr[k] - _delta(i, k) * tr[j] for k in range(m)] for j in range(m)]
        for i in range(m)
    ]
    return Tensor3(out, S.roles)


# ---------------------------------------------------------------------------
# matrix helpers over normal forms


def matmul(a, b):
    m = len(a)
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            acc = ZERO
            for k in range(m):
                if not a[i][k].is_zero() and not b[k][j].is_zero():
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def matlin(*pairs):
    """sum of c * M for (c, M) pairs."""
    m = len(pairs[0][1])
    out = [[ZERO] * m for _ in range(m)]
    for c, mat in pairs:
        c = RationalForm.const(c) if not isinstance(c, RationalForm) else c
        for i in range(m):
            for j in range(m):
                if not mat[i][j].is_zero():
                    out[i][j] = out[i][j] + c * mat[i][j]
    return out


def matmap(fn, mat):
    return [[fn(e) for e in row] for row in mat]


def _calc(sys, calc):
    if calc is not None:
        return calc
    return JetCalculus(sys)


# ---------------------------------------------------------------------------
# invariants


def _M(c: JetCalculus):
    fq, fp = c.jacobian("q"), c.jacobian("p")
    Dfq = matmap(c.D, fq)
    return matlin((1, fp), (-1, Dfq), (Fraction(1, 3), matmul(fq, fq)))


def compute_Hx_form(sys: OdeSystem, calc: JetCalculus | None = None) -> RationalForm:
    c = _calc(sys, calc)
    M = _M(c)
    tr = ZERO
    for i in range(c.m):
        tr = tr + M[i][i]
    return tr * Fraction(-1, 4 * c.m)


def compute_Hm1_forms(sys: OdeSystem, calc: JetCalculus | None = None) -> list:
    c = _calc(sys, calc)
    m = c.m
    out = []
    for j in range(m):
        acc = ZERO
        for i in range(m):
            acc = acc + c.d(c.d(c.f[i], Q(i + 1)), Q(j + 1))
        out.append(acc * Fraction(1, 6 * (m + 1)))
    return out


def compute_Hx(sys: OdeSystem, calc=None) -> Expr:
    return compute_Hx_form(sys, calc).to_expr()


def compute_Hm1(sys: OdeSystem, calc=None) -> list:
    return [h.to_expr() for h in compute_Hm1_forms(sys, calc)]


def compute_W2(sys: OdeSystem, calc=None) -> Tensor2:
    return traceless2(Tensor2(_M(_calc(sys, calc))))


def second_q_tensor(sys: OdeSystem, calc=None) -> Tensor3:
    c = _calc(sys, calc)
    m = c.m
    return Tensor3(
        [[[c.d(c.d(c.f[i], Q(j + 1)), Q(k + 1)) for k in range(m)] for j in range(m)] for i in range(m)]
    )


def compute_I2(sys: OdeSystem, calc=None) -> Tensor3:
    return traceless3(second_q_tensor(sys, calc))


def compute_W3(sys: OdeSystem, calc=None) -> Tensor2:
    c = _calc(sys, calc)
    fq, fp, fy = c.jacobian("q"), c.jacobian("p"), c.jacobian("y")
    Dfq = matmap(c.D, fq)
    W3 = matlin(
        (1, fy),
        (Fraction(1, 3), matmul(fq, fp)),
        (Fraction(-1, 2), matmap(c.D, fp)),
        (Fraction(1, 6), matmap(c.D, Dfq)),
        (Fraction(2, 27), matmul(fq, matmul(fq, fq))),
        (Fraction(-5, 18), matmul(fq, Dfq)),
        (Fraction(-1, 18), matmul(Dfq, fq)),
    )
    return Tensor2(W3)


def compute_I4(sys: OdeSystem, calc=None) -> Tensor2:
    c = _calc(sys, calc)
    m = c.m
    Hx = compute_Hx_form(sys, c)
    H1 = compute_Hm1_forms(sys, c)
    fq = c.jacobian("q")
    DH1 = [c.D(h) for h in H1]
    out = []
    for j in range(m):
        Hj_fq = ZERO
        for l in range(m):
            Hj_fq = Hj_fq + H1[l] * fq[l][j]
        Hx_qj = c.d(Hx, Q(j + 1))
        row = []
        for k in range(m):
            qk = Q(k + 1)
            e = (
                -c.d(H1[k], P(j + 1))
                + c.d(Hx_qj, qk)
                - c.d(DH1[j], qk)
                - c.d(Hj_fq, qk)
                + H1[j] * H1[k] * 2
            )
            row.append(e)
        out.append(row)
    return Tensor2(out, "_jk")


@dataclass
class InvariantSet:
    m: int
    W2: Tensor2
    I2: Tensor3
    W3: Tensor2
    I4: Tensor2
    Hx: RationalForm
    Hm1: list
    diagnostics: list = field(default_factory=list)

    @property
    def I4_symmetric(self) -> bool:
        return self.I4.is_symmetric()

    def components(self):
        return {"W2": self.W2, "I2": self.I2, "W3": self.W3, "I4": self.I4}

    def is_trivializable(self) -> bool:
        return all(t.is_zero() for t in self.components().values())

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "m": self.m,
            "W2": self.W2.to_json(),
            "I2": self.I2.to_json(),
            "W3": self.W3.to_json(),
            "I4": self.I4.to_json(),
            "Hx": render(self.Hx.to_expr()),
            "Hm1": [render(h.to_expr()) for h in self.Hm1],
            "trivializable": self.is_trivializable(),
            "I4_symmetric": self.I4_symmetric,
        }

    def numeric(self, pt) -> dict:
        vals = pt.values()
        return {
            "W2": self.W2.numeric(vals),
            "I2": self.I2.numeric(vals),
            "W3": self.W3.numeric(vals),
            "I4": self.I4.numeric(vals),
            "Hx": float(compile_expr(self.Hx.to_expr())(vals)),
            "Hm1": np.array([float(compile_expr(h.to_expr())(vals)) for h in self.Hm1]),
        }


def compute_all(sys: OdeSystem, calc: JetCalculus | None = None, threads: int = 1) -> InvariantSet:
    """All invariants from one shared calculus.

    With ``threads > 1`` the four tensors are computed concurrently; the
    result does not depend on the schedule.
    """
    c = _calc(sys, calc)
    jobs = {
        "W2": compute_W2,
        "I2": compute_I2,
        "W3": compute_W3,
        "I4": compute_I4,
        "Hx": compute_Hx_form,
        "Hm1": compute_Hm1_forms,
    }
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = {k: pool.submit(fn, sys, c) for k, fn in jobs.items()}
            parts = {k: fut.result() for k, fut in futs.items()}
    else:
        parts = {k: fn(sys, c) for k, fn in jobs.items()}
    return InvariantSet(m=sys.m, **parts)


def _has_apply_atoms(rf: RationalForm) -> bool:
    polys = [rf.num, *rf.den]
    return any(g[0] == 1 for poly in polys for g in poly.gens)


def trivializability_report(sys: OdeSystem, inv: InvariantSet | None = None):
    """Exact verdict plus advisory diagnostics.

    A diagnostic is added (and a warning issued) when an entry is nonzero
    for the exact kernel but vanishes numerically at random points, which
    usually means a transcendental identity the kernel does not know.
    """
    inv = inv or compute_all(sys)
    verdict = inv.is_trivializable()
    diags = []
    for name, t in inv.components().items():
        for idx in t.nonzero_entries():
            if _has_apply_atoms(t.form(*idx)) and sample_vanishes(t[idx]):
                msg = f"{name}{list(idx)} is nonzero symbolically but vanishes at sampled points"
                diags.append(msg)
                warnings.warn(msg, stacklevel=2)
    inv.diagnostics = diags
    return verdict, diags


def is_trivializable(sys: OdeSystem) -> bool:
    """True iff W2, I2, W3 and I4 all vanish identically (exact test)."""
    return trivializability_report(sys)[0]

"""Coefficients of the characteristic Cartan connection in the standard section.

Coefficients are produced in degree order; each only uses earlier ones::

    A = Gx = B/2 = -f_q/3                    alpha = beta = id, D = F^-1 = G^-1 = 0
    H^x  = -(tr f_p + 3 tr DA + 3 tr A^2) / (4m)
    C    = -(f_p + 2 DA + 2 H^x id + 2 A A)
    F^-2_k = H^-1_k = -1/(2(m+1)) sum_i dA^i_i/dq_k,   E = -2 F^-2
    G^-2 ^i_jk = dA^i_j/dq_k
    H^-2_j = dH^x/dq_j - D H^-1_j - H^-1_k df^k/dq_j
    F^-3 = H^-2 - D F^-2
    G^-3 ^i_jk = dA^i_j/dp_k - D G^-2 ^i_jk - Gx^i_l G^-2 ^l_jk + G^-2 ^i_lk Gx^l_j
    H^-3_j = dH^x/dp_j - D H^-2_j - H^-1_k df^k/dp_j - 2 F^-2_j H^x
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .expr import P, Q, render
from .invariants import (
    Tensor2,
    Tensor3,
    compute_Hm1_forms,
    compute_Hx_form,
    compute_I4,
    compute_W2,
    compute_W3,
    matlin,
    matmap,
    matmul,
)
from .jet import JetCalculus, OdeSystem
from .rational import ZERO, RationalForm


@dataclass
class ConnectionCoefficients:
    m: int
    A: Tensor2
    B: Tensor2
    C: Tensor2
    Gx: Tensor2
    Gm2: Tensor3
    Gm3: Tensor3
    E: list
    Fm2: list
    Fm3: list
    Hx: RationalForm
    Hm1: list
    Hm2: list
    Hm3: list
    # alpha = beta = identity; D = F^-1 = G^-1 = 0
    structural: dict = field(
        default_factory=lambda: {"alpha": "identity", "beta": "identity", "D": 0, "Fm1": 0, "Gm1": 0}
    )

    def vectors(self):
        return {"E": self.E, "Fm2": self.Fm2, "Fm3": self.Fm3, "Hm1": self.Hm1, "Hm2": self.Hm2, "Hm3": self.Hm3}

    def tensors(self):
        return {"A": self.A, "B": self.B, "C": self.C, "Gx": self.Gx, "Gm2": self.Gm2, "Gm3": self.Gm3}

    def is_zero(self) -> bool:
        return (
            all(t.is_zero() for t in self.tensors().values())
            and all(v.is_zero() for vec in self.vectors().values() for v in vec)
            and self.Hx.is_zero()
        )

    def to_json(self) -> dict:
        out = {k: t.to_json() for k, t in self.tensors().items()}
        out.update({k: [render(v.to_expr()) for v in vec] for k, vec in self.vectors().items()})
        out["Hx"] = render(self.Hx.to_expr())
        return dict(sorted(out.items(), key=lambda kv: _JSON_ORDER.index(kv[0])))


_JSON_ORDER = ["A", "B", "C", "Gx", "Gm2", "Gm3", "E", "Fm2", "Fm3", "Hx", "Hm1", "Hm2", "Hm3"]


def _trace(mat):
    out = ZERO
    for i in range(len(mat)):
        out = out + mat[i][i]
    return out


def compute_connection(sys: OdeSystem, calc: JetCalculus | None = None) -> ConnectionCoefficients:
    c = calc or JetCalculus(sys)
    m = c.m
    rng = range(m)
    fq, fp = c.jacobian("q"), c.jacobian("p")

    A = matlin((Fraction(-1, 3), fq))
    DA = matmap(c.D, A)
    AA = matmul(A, A)
    Hx = (_trace(fp) + _trace(DA) * 3 + _trace(AA) * 3) * Fraction(-1, 4 * m)
    ident = [[RationalForm.const(1 if i == j else 0) for j in rng] for i in rng]
    C = matlin((-1, fp), (-2, DA), (Hx * -2, ident), (-2, AA))

    Hm1 = []
    for k in rng:
        acc = ZERO
        for i in rng:
            acc = acc + c.d(A[i][i], Q(k + 1))
        Hm1.append(acc * Fraction(-1, 2 * (m + 1)))
    Fm2 = list(Hm1)
    E = [h * -2 for h in Fm2]

    Gm2 = [[[c.d(A[i][j], Q(k + 1)) for k in rng] for j in rng] for i in rng]

    Hm2 = []
    for j in rng:
        acc = c.d(Hx, Q(j + 1)) - c.D(Hm1[j])
        for k in rng:
            acc = acc - Hm1[k] * fq[k][j]
        Hm2.append(acc)
    Fm3 = [Hm2[j] - c.D(Fm2[j]) for j in rng]

    Gm3 = []
    for i in rng:
        plane = []
        for j in rng:
            row = []
            for k in rng:
                acc = c.d(A[i][j], P(k + 1)) - c.D(Gm2[i][j][k])
                for l in rng:
                    acc = acc - A[i][l] * Gm2[l][j][k] + Gm2[i][l][k] * A[l][j]
                row.append(acc)
            plane.append(row)
        Gm3.append(plane)

    Hm3 = []
    for j in rng:
        acc = c.d(Hx, P(j + 1)) - c.D(Hm2[j]) - Fm2[j] * Hx * 2
        for k in rng:
            acc = acc - Hm1[k] * fp[k][j]
        Hm3.append(acc)

    return ConnectionCoefficients(
        m=m,
        A=Tensor2(A),
        B=Tensor2(matlin((2, A))),
        C=Tensor2(C),
        Gx=Tensor2(A),
        Gm2=Tensor3(Gm2),
        Gm3=Tensor3(Gm3),
        E=E,
        Fm2=Fm2,
        Fm3=Fm3,
        Hx=Hx,
        Hm1=Hm1,
        Hm2=Hm2,
        Hm3=Hm3,
    )


# ---------------------------------------------------------------------------
# residual identities


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ResidualReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def failures(self):
        return [ch for ch in self.checks if not ch.passed]

    def to_json(self):
        return {"passed": self.passed, "checks": [vars(ch) for ch in self.checks]}

    def __str__(self):
        return "\n".join(f"{'PASS' if ch.passed else 'FAIL'}  {ch.name}{'  ' + ch.detail if ch.detail else ''}" for ch in self.checks)


def _all_zero(forms, label):
    bad = [idx for idx, f in forms if not f.is_zero()]
    return Check(label, not bad, f"nonzero at {bad[:4]}" if bad else "")


def verify_residuals(sys: OdeSystem, curvature: bool = True) -> ResidualReport:
    """Identities that hold for every system; a failure means a bug."""
    from . import curvature as curv

    c = JetCalculus(sys)
    m = c.m
    rng = range(m)
    conn = compute_connection(sys, c)
    checks = []

    Hm1_t2 = compute_Hm1_forms(sys, c)
    checks.append(
        _all_zero(
            [((j, k), c.d(Hm1_t2[j], Q(k + 1)) - c.d(Hm1_t2[k], Q(j + 1))) for j in rng for k in rng if j < k],
            "antisymmetry dH-1_j/dq_k - dH-1_k/dq_j",
        )
    )
    checks.append(_all_zero([((), conn.Hx - compute_Hx_form(sys, c))], "Hx: connection form = invariant form"))
    checks.append(_all_zero([((j,), conn.Hm1[j] - Hm1_t2[j]) for j in rng], "H-1: connection form = invariant form"))

    I4 = compute_I4(sys, c)
    alt = [
        ((j, k), -c.d(conn.Hm1[k], P(j + 1)) + c.d(conn.Hm2[j], Q(k + 1)) + conn.Hm1[j] * conn.Hm1[k] * 2 - I4.form(j, k))
        for j in rng
        for k in rng
    ]
    checks.append(_all_zero(alt, "I4: H-2 form = closed form"))

    A, B, Gx = conn.A, conn.B, conn.Gx
    checks.append(_all_zero([((i, j), B.form(i, j) - A.form(i, j) * 2) for i in rng for j in rng], "B = 2A"))
    checks.append(_all_zero([((i, j), Gx.form(i, j) - A.form(i, j)) for i in rng for j in rng], "Gx = A"))
    checks.append(_all_zero([((j,), conn.E[j] + conn.Fm2[j] * 2) for j in rng], "E = -2 F-2"))
    checks.append(_all_zero([((j,), conn.Fm2[j] - conn.Hm1[j]) for j in rng], "F-2 = H-1"))

    if curvature:
        Om = curv.structure_function(c, conn)
        for name, items in curv.characteristic_conditions(Om, m).items():
            checks.append(_all_zero(items, f"curvature: {name}"))
        W2 = compute_W2(sys, c)
        W3 = compute_W3(sys, c)
        for label, pairs in curv.invariant_slots(Om, c, W2, W3, I4).items():
            checks.append(_all_zero(pairs, label))
    return ResidualReport(checks)

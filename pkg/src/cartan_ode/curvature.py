"""Curvature of the characteristic connection pulled back by the standard section.

Verification only: nothing else in the package depends on it. Forms are
written in the coframe

    theta_x = dx,  theta_-1^i = dq_i - f^i dx,
    theta_-2^i = dp_i - q_i dx,  theta_-3^i = dy_i - p_i dx

with slots 0 (theta_x), 1..m (theta_-1), m+1..2m (theta_-2) and
2m+1..3m (theta_-3). A 1-form is ``{slot: coefficient}``, a 2-form is
``{(a, b): coefficient}`` with ``a < b``. Every coefficient is a
RationalForm.
"""
from __future__ import annotations

from .expr import P, Q, Y
from .jet import JetCalculus
from .rational import ZERO

# weights of the coframe and of the curvature components
_COMP_DEG = {"-3": -3, "-2": -2, "-1": -1, "x": -1, "h": 0, "g": 0, "y": 1}


class Frame:
    def __init__(self, calc: JetCalculus):
        self.c = calc
        m = self.m = calc.m
        self.TX = 0
        self.deg = {0: -1}
        for i in range(m):
            self.deg[self.t1(i)] = -1
            self.deg[self.t2(i)] = -2
            self.deg[self.t3(i)] = -3
        self.dtheta = {0: {}}
        for i in range(m):
            df = self.d0(calc.f[i])
            self.dtheta[self.t1(i)] = {k: v for a, c in df.items() if a != 0 for k, v in _wedge({a: -c}, {0: None}).items()}
            self.dtheta[self.t2(i)] = _wedge({self.t1(i): -_one()}, {0: None})
            self.dtheta[self.t3(i)] = _wedge({self.t2(i): -_one()}, {0: None})

    def t1(self, i):
        return 1 + i

    def t2(self, i):
        return 1 + self.m + i

    def t3(self, i):
        return 1 + 2 * self.m + i

    def d0(self, g) -> dict:
        """d of a function."""
        c = self.c
        out = {0: c.D(g)}
        for i in range(self.m):
            out[self.t3(i)] = c.d(g, Y(i + 1))
            out[self.t2(i)] = c.d(g, P(i + 1))
            out[self.t1(i)] = c.d(g, Q(i + 1))
        return {k: v for k, v in out.items() if not v.is_zero()}

    def d1(self, w: dict) -> dict:
        """d of a 1-form."""
        out: dict = {}
        for a, coef in w.items():
            if coef.is_zero():
                continue
            _acc(out, _wedge(self.d0(coef), {a: None}))
            for k, v in self.dtheta[a].items():
                _acc(out, {k: coef * v})
        return out


def _one():
    from .rational import ONE

    return ONE


def _wedge(a: dict, b: dict) -> dict:
    # a coefficient of None in b stands for 1
    out: dict = {}
    for i, ai in a.items():
        for j, bj in b.items():
            if i == j:
                continue
            c = ai if bj is None else ai * bj
            if c.is_zero():
                continue
            if i < j:
                out[(i, j)] = out.get((i, j), ZERO) + c
            else:
                out[(j, i)] = out.get((j, i), ZERO) - c
    return out


def _acc(out: dict, form: dict, scale=1):
    for k, v in form.items():
        out[k] = out.get(k, ZERO) + (v if scale == 1 else v * scale)


def _sum(*terms) -> dict:
    out: dict = {}
    for scale, form in terms:
        _acc(out, form, scale)
    return out


def coefficient(form: dict, a: int, b: int):
    if a < b:
        return form.get((a, b), ZERO)
    return -form.get((b, a), ZERO)


def structure_function(calc: JetCalculus, conn) -> dict:
    """All curvature 2-forms, keyed ("-3", i), ("-2", i), ("-1", i), ("x",), ("h",), ("g", i, j), ("y",)."""
    fr = Frame(calc)
    m = fr.m
    rng = range(m)
    w3 = [{fr.t3(i): _one()} for i in rng]
    w2 = [{fr.t2(i): _one(), **{fr.t3(j): conn.A.form(i, j) for j in rng}} for i in rng]
    w1 = [
        {fr.t1(i): _one(), **{fr.t2(j): conn.B.form(i, j) for j in rng}, **{fr.t3(j): conn.C.form(i, j) for j in rng}}
        for i in rng
    ]
    wx = {0: -_one(), **{fr.t3(j): conn.E[j] for j in rng}}
    wh = {**{fr.t2(j): conn.Fm2[j] for j in rng}, **{fr.t3(j): conn.Fm3[j] for j in rng}}
    wg = [
        [
            {
                0: conn.Gx.form(i, j),
                **{fr.t2(k): conn.Gm2.form(i, j, k) for k in rng},
                **{fr.t3(k): conn.Gm3.form(i, j, k) for k in rng},
            }
            for j in rng
        ]
        for i in rng
    ]
    wy = {
        0: conn.Hx,
        **{fr.t1(j): conn.Hm1[j] for j in rng},
        **{fr.t2(j): conn.Hm2[j] for j in rng},
        **{fr.t3(j): conn.Hm3[j] for j in rng},
    }
    W = _wedge
    Om = {}
    for i in rng:
        Om["-3", i] = _sum((1, fr.d1(w3[i])), (1, W(wx, w2[i])), (2, W(wh, w3[i])), *[(1, W(wg[i][j], w3[j])) for j in rng])
        Om["-2", i] = _sum((1, fr.d1(w2[i])), (1, W(wx, w1[i])), *[(1, W(wg[i][j], w2[j])) for j in rng], (2, W(wy, w3[i])))
        Om["-1", i] = _sum((1, fr.d1(w1[i])), (-2, W(wh, w1[i])), *[(1, W(wg[i][j], w1[j])) for j in rng], (2, W(wy, w2[i])))
    Om["x",] = _sum((1, fr.d1(wx)), (2, W(wh, wx)))
    Om["h",] = _sum((1, fr.d1(wh)), (1, W(wx, wy)))
    for i in rng:
        for j in rng:
            Om["g", i, j] = _sum((1, fr.d1(wg[i][j])), *[(1, W(wg[i][k], wg[k][j])) for k in rng])
    Om["y",] = _sum((1, fr.d1(wy)), (-2, W(wh, wy)))
    Om["_frame"] = fr
    return Om


def characteristic_conditions(Om: dict, m: int) -> dict:
    """Coefficients that the normalization forces to vanish, grouped by degree."""
    fr = Om["_frame"]
    groups = {"degree <= 1": [], "degree 2": [], "degree 3": [], "degree 4": []}
    for key, form in Om.items():
        if key == "_frame":
            continue
        for (a, b), v in form.items():
            if _COMP_DEG[key[0]] - fr.deg[a] - fr.deg[b] <= 1:
                groups["degree <= 1"].append(((key, a, b), v))
    rng = range(m)
    for j in rng:
        groups["degree 2"].append((("h", 0, fr.t1(j)), coefficient(Om["h",], 0, fr.t1(j))))
        groups["degree 2"].append((("x", 0, fr.t2(j)), coefficient(Om["x",], 0, fr.t2(j))))
        groups["degree 3"].append((("y", 0, fr.t1(j)), coefficient(Om["y",], 0, fr.t1(j))))
        groups["degree 3"].append((("h", 0, fr.t2(j)), coefficient(Om["h",], 0, fr.t2(j))))
        groups["degree 4"].append((("y", 0, fr.t2(j)), coefficient(Om["y",], 0, fr.t2(j))))
        for i in rng:
            groups["degree 2"].append(((("-1", i), 0, fr.t2(j)), coefficient(Om["-1", i], 0, fr.t2(j))))
            for k in rng:
                g = Om["g", i, j]
                groups["degree 2"].append(((("g", i, j), 0, fr.t1(k)), coefficient(g, 0, fr.t1(k))))
                groups["degree 3"].append(((("g", i, j), 0, fr.t2(k)), coefficient(g, 0, fr.t2(k))))
    return groups


def invariant_slots(Om: dict, calc: JetCalculus, W2, W3, I4) -> dict:
    """Residuals between curvature slots and the closed-form invariants.

    W2 = Omega_-2[x, -3],  W3 = Omega_-1[x, -3] + D W2 / 2,  I4_jk = Omega_y[-1_k, -2_j].
    """
    fr = Om["_frame"]
    rng = range(fr.m)
    w2, w3, i4 = [], [], []
    for i in rng:
        for j in rng:
            o2 = coefficient(Om["-2", i], 0, fr.t3(j))
            o1 = coefficient(Om["-1", i], 0, fr.t3(j))
            w2.append(((i, j), o2 - W2.form(i, j)))
            w3.append(((i, j), o1 + calc.D(W2.form(i, j)) * _half() - W3.form(i, j)))
            i4.append(((i, j), coefficient(Om["y",], fr.t1(j), fr.t2(i)) - I4.form(i, j)))
    return {"curvature slot = W2": w2, "curvature slot + D W2/2 = W3": w3, "curvature slot = I4": i4}


def _half():
    from fractions import Fraction

    from .rational import RationalForm

    return RationalForm.const(Fraction(1, 2))

"""Immutable expression trees over jet coordinates.

Nodes are built through the smart constructors :func:`add`, :func:`mul`,
:func:`power` and :func:`apply`, which flatten nested sums/products, fold
rational constants and keep constants in front. The arithmetic operators on
:class:`Expr` call those constructors, so ``x + 1`` and ``add(x, 1)`` build
the same tree.

Trees are hashed once at construction; equality is structural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Mapping

from .errors import DivisionByZeroExpr, EvalSingular

KINDS = ("x", "y", "p", "q")
FUNCTIONS = ("sin", "cos", "exp", "ln")

SINGULAR_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class Var:
    """A jet coordinate: ``x`` or one of ``y_i``, ``p_i = y_i'``, ``q_i = y_i''``."""

    kind: str
    index: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind == "x":
            if self.index != 0:
                raise ValueError("x carries no index")
        elif self.index < 1:
            raise ValueError(f"{self.kind} needs an index >= 1")

    @property
    def sort_key(self):
        return (KINDS.index(self.kind), self.index)

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __str__(self):
        return "x" if self.kind == "x" else f"{self.kind}{self.index}"


def X() -> Var:
    return Var("x")


def Y(i: int) -> Var:
    return Var("y", i)


def P(i: int) -> Var:
    return Var("p", i)


def Q(i: int) -> Var:
    return Var("q", i)


# ---------------------------------------------------------------------------
# nodes


class Expr:
    __slots__ = ("_hash",)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __hash__(self):
        return self._hash

    def __init_subclass__(cls, **kw):
        super().__init_subclass__(**kw)
        # defining __eq__ resets __hash__ to None
        cls.__hash__ = Expr.__hash__

    def _init(self, **fields):
        for k, v in fields.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + tuple(fields.values())))

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return power(self, n)

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"<{type(self).__name__} {render(self)}>"


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self._init(value=Fraction(value))

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value


class Variable(Expr):
    __slots__ = ("var",)

    def __init__(self, var: Var):
        self._init(var=var)

    def __eq__(self, other):
        return isinstance(other, Variable) and self.var == other.var


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        self._init(terms=tuple(terms))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Sum) and self._hash == other._hash and self.terms == other.terms
        )


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        self._init(factors=tuple(factors))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Product)
            and self._hash == other._hash
            and self.factors == other.factors
        )


class IntPow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        if exp == 0:
            raise ValueError("IntPow exponent must be nonzero")
        self._init(base=base, exp=int(exp))

    def __eq__(self, other):
        return self is other or (
            isinstance(other, IntPow)
            and self._hash == other._hash
            and self.exp == other.exp
            and self.base == other.base
        )


class Apply(Expr):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: str, arg: Expr):
        if fn not in FUNCTIONS:
            raise ValueError(f"unsupported function {fn!r}")
        self._init(fn=fn, arg=arg)

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Apply)
            and self._hash == other._hash
            and self.fn == other.fn
            and self.arg == other.arg
        )


ZERO = Const(0)
ONE = Const(1)


def as_expr(obj) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, Var):
        return Variable(obj)
    if isinstance(obj, (int, Fraction, Rational)):
        return Const(obj)
    raise TypeError(f"cannot convert {type(obj).__name__} to Expr")


def var(v: Var) -> Variable:
    return Variable(v)


# ---------------------------------------------------------------------------
# smart constructors


def add(*terms) -> Expr:
    flat = []
    c = Fraction(0)
    for t in terms:
        t = as_expr(t)
        for u in t.terms if isinstance(t, Sum) else (t,):
            if isinstance(u, Const):
                c += u.value
            else:
                flat.append(u)
    if c:
        flat.insert(0, Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors) -> Expr:
    flat = []
    c = Fraction(1)
    for f in factors:
        f = as_expr(f)
        for u in f.factors if isinstance(f, Product) else (f,):
            if isinstance(u, Const):
                c *= u.value
            else:
                flat.append(u)
    if c == 0:
        return ZERO
    if c != 1:
        flat.insert(0, Const(c))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def power(base, n: int) -> Expr:
    base = as_expr(base)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise DivisionByZeroExpr("0 raised to a negative power")
        return Const(base.value**n)
    if isinstance(base, IntPow):
        return power(base.base, base.exp * n)
    return IntPow(base, n)


def apply(fn: str, arg) -> Expr:
    return Apply(fn, as_expr(arg))


def sin(a) -> Expr:
    return apply("sin", a)


def cos(a) -> Expr:
    return apply("cos", a)


def exp(a) -> Expr:
    return apply("exp", a)


def ln(a) -> Expr:
    return apply("ln", a)


# ---------------------------------------------------------------------------
# traversal


def variables(e: Expr) -> frozenset:
    """All jet variables occurring in ``e``."""
    out = set()
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        if isinstance(node, Variable):
            out.add(node.var)
        else:
            stack.extend(_children(node))
    return frozenset(out)


def _children(e: Expr):
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, IntPow):
        return (e.base,)
    if isinstance(e, Apply):
        return (e.arg,)
    return ()


def diff(e: Expr, v: Var) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``v``."""
    memo: dict = {}

    def d(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            r = ZERO
        elif isinstance(node, Variable):
            r = ONE if node.var == v else ZERO
        elif isinstance(node, Sum):
            r = add(*(d(t) for t in node.terms))
        elif isinstance(node, Product):
            parts = []
            fs = node.factors
            for k, f in enumerate(fs):
                df = d(f)
                if df == ZERO:
                    continue
                parts.append(mul(*fs[:k], df, *fs[k + 1:]))
            r = add(*parts)
        elif isinstance(node, IntPow):
            db = d(node.base)
            r = ZERO if db == ZERO else mul(node.exp, power(node.base, node.exp - 1), db)
        elif isinstance(node, Apply):
            du = d(node.arg)
            if du == ZERO:
                r = ZERO
            elif node.fn == "sin":
                r = mul(cos(node.arg), du)
            elif node.fn == "cos":
                r = mul(-1, sin(node.arg), du)
            elif node.fn == "exp":
                r = mul(node, du)
            else:
                r = mul(du, power(node.arg, -1))
        else:
            raise TypeError(node)
        memo[node] = r
        return r

    return d(e)


def substitute(e: Expr, bindings: Mapping[Var, object]) -> Expr:
    """Simultaneous substitution of variables; replacements are not revisited."""
    table = {v: as_expr(r) for v, r in bindings.items()}
    if not table:
        return e
    memo: dict = {}

    def s(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Variable):
            r = table.get(node.var, node)
        elif isinstance(node, Const):
            r = node
        elif isinstance(node, Sum):
            r = add(*(s(t) for t in node.terms))
        elif isinstance(node, Product):
            r = mul(*(s(f) for f in node.factors))
        elif isinstance(node, IntPow):
            r = power(s(node.base), node.exp)
        else:
            r = apply(node.fn, s(node.arg))
        memo[node] = r
        return r

    return s(e)


# ---------------------------------------------------------------------------
# numeric evaluation


class _FloatLib:
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)
    exp = staticmethod(math.exp)
    ln = staticmethod(math.log)

    @staticmethod
    def const(q: Fraction):
        return q.numerator / q.denominator


class MpLib:
    """Adapter evaluating expressions in a given mpmath context."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.sin = ctx.sin
        self.cos = ctx.cos
        self.exp = ctx.exp
        self.ln = ctx.log

    def const(self, q: Fraction):
        return self.ctx.mpf(q.numerator) / q.denominator


FLOAT = _FloatLib()


def compile_expr(e: Expr, lib=FLOAT) -> Callable[[Mapping[Var, object]], object]:
    """Turn ``e`` into a closure ``values -> number`` using ``lib`` for arithmetic.

    Raises :class:`EvalSingular` at call time when a negative power meets a base
    with ``|b| <= 1e-12`` or ``ln`` meets a non-positive argument.
    """
    memo: dict = {}

    def build(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Const):
            c = lib.const(node.value)
            fn = lambda vals, c=c: c
        elif isinstance(node, Variable):
            v = node.var
            fn = lambda vals, v=v: vals[v]
        elif isinstance(node, Sum):
            parts = tuple(build(t) for t in node.terms)

            def fn(vals, parts=parts):
                acc = parts[0](vals)
                for g in parts[1:]:
                    acc = acc + g(vals)
                return acc

        elif isinstance(node, Product):
            parts = tuple(build(t) for t in node.factors)

            def fn(vals, parts=parts):
                acc = parts[0](vals)
                for g in parts[1:]:
                    acc = acc * g(vals)
                return acc

        elif isinstance(node, IntPow):
            b, n = build(node.base), node.exp
            if n > 0:
                fn = lambda vals, b=b, n=n: b(vals) ** n
            else:

                def fn(vals, b=b, n=n):
                    bv = b(vals)
                    if abs(bv) <= SINGULAR_EPS:
                        raise EvalSingular(f"denominator {render(node.base)} vanishes")
                    return 1 / bv**-n

        else:
            a = build(node.arg)
            if node.fn == "ln":

                def fn(vals, a=a, arg=node.arg):
                    av = a(vals)
                    if av <= 0:
                        raise EvalSingular(f"ln of non-positive value at {render(arg)}")
                    return lib.ln(av)

            else:
                f = getattr(lib, node.fn)
                fn = lambda vals, a=a, f=f: f(a(vals))
        memo[node] = fn
        return fn

    return build(e)


def evaluate(e: Expr, values: Mapping[Var, object], lib=FLOAT):
    return compile_expr(e, lib)(values)


def eval_at(e: Expr, pt) -> float:
    """Float value of ``e`` at a :class:`~cartan_ode.jet.JetPoint`."""
    return float(evaluate(e, pt.values()))


# ---------------------------------------------------------------------------
# rendering

_SUM, _PROD, _POW, _ATOM = 1, 2, 3, 4


def _fmt_const(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _negated(t: Expr):
    """If ``t`` carries a leading negative constant, return ``-t``; else None."""
    if isinstance(t, Const) and t.value < 0:
        return Const(-t.value)
    if isinstance(t, Product) and isinstance(t.factors[0], Const) and t.factors[0].value < 0:
        return mul(-t.factors[0].value, *t.factors[1:])
    return None


def _prec(e: Expr) -> int:
    if isinstance(e, Sum):
        return _SUM
    if isinstance(e, Product):
        return _PROD
    if isinstance(e, Const):
        if e.value < 0:
            return _SUM
        return _ATOM if e.value.denominator == 1 else _PROD
    if isinstance(e, IntPow):
        return _POW
    return _ATOM


def render(e: Expr) -> str:
    """Infix rendering that :func:`cartan_ode.parser.parse_expr` reads back unchanged."""

    def r(node, need):
        s = raw(node)
        return f"({s})" if _prec(node) < need else s

    def raw(node):
        if isinstance(node, Const):
            return _fmt_const(node.value)
        if isinstance(node, Variable):
            return str(node.var)
        if isinstance(node, Sum):
            out = [r(node.terms[0], _SUM)]
            for t in node.terms[1:]:
                n = _negated(t)
                out.append(f" - {r(n, _PROD)}" if n is not None else f" + {r(t, _PROD)}")
            return "".join(out)
        if isinstance(node, Product):
            fs = list(node.factors)
            sign = ""
            if isinstance(fs[0], Const):
                c = fs[0].value
                if c == -1:
                    sign = "-"
                    fs = fs[1:]
                elif c < 0:
                    sign = "-"
                    fs[0] = Const(-c)
            return sign + "*".join(
                _fmt_const(f.value) if isinstance(f, Const) else r(f, _POW) for f in fs
            )
        if isinstance(node, IntPow):
            ex = str(node.exp) if node.exp > 0 else f"({node.exp})"
            return f"{r(node.base, _ATOM)}^{ex}"
        return f"{node.fn}({raw(node.arg)})"

    return raw(e)

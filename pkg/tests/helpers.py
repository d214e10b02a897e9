"""Shared fixtures data: a corpus of systems and a seeded random expression generator."""
import random
from fractions import Fraction

from cartan_ode.expr import Const, P, Q, X, Y, apply, var
from cartan_ode.jet import circles_system, random_polynomial_system, trivial_system
from cartan_ode.parser import parse_system

JET_VARS_2 = [X(), Y(1), Y(2), P(1), P(2), Q(1), Q(2)]

# point transformations of y''' = 0, obtained by hand/CAS and kept as data
EXP_DIAGONAL = """
m = 2
f1 = 3*p1*q1/y1 - 2*p1^3/y1^2
f2 = 3*p2*q2/y2 - 2*p2^3/y2^2
"""
FIBER_SHEAR = """
m = 2
f1 = 6*p2*q2
f2 = 0
"""
COUPLED = """
m = 2
f1 = (-6*p1*q1*x - 6*p1*q1*y1 + 3*p1*q2 + 3*p2*q1 + 3*q2)/(2*x*y1 + 2*y1^2 - y2)
f2 = (6*p1*q1*y2 - 6*p1*q2*y1 - 6*p2*q1*y1 - 6*q2*y1)/(2*x*y1 + 2*y1^2 - y2)
"""

TRIVIALIZABLE_TEXTS = {"exp_diagonal": EXP_DIAGONAL, "fiber_shear": FIBER_SHEAR, "coupled": COUPLED}


def corpus(include_m3=True):
    out = {
        "trivial2": trivial_system(2),
        "circles2": circles_system(2),
        "linear_p": parse_system("m=2\nf1 = p2\nf2 = 0"),
        "q2_squared": parse_system("m=2\nf1 = q2^2\nf2 = 0"),
        "x_only": parse_system("m=2\nf1 = x\nf2 = x"),
        "mixed_rational": parse_system("m=2\nf1 = q1^2*q2/(1 + y1^2)\nf2 = x*p1*q2 - y2*q1"),
        "transcendental": parse_system("m=2\nf1 = sin(x)*q1 + exp(y2)*p1\nf2 = ln(1 + p1^2)*q2"),
    }
    out.update({k: parse_system(t) for k, t in TRIVIALIZABLE_TEXTS.items()})
    rng = random.Random(2024)
    for n in range(3):
        out[f"random{n}"] = random_polynomial_system(rng)
    if include_m3:
        out["trivial3"] = trivial_system(3)
        out["circles3"] = circles_system(3)
    return out


def random_expr(rng: random.Random, leaves: int = 6, variables=JET_VARS_2, apply_atoms=True):
    """Random expression whose denominators are 1 + (...)^2, so it is finite everywhere."""
    if leaves <= 1:
        if rng.random() < 0.7:
            return var(rng.choice(variables))
        return Const(Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
    left = rng.randint(1, leaves - 1)
    a = random_expr(rng, left, variables, apply_atoms)
    b = random_expr(rng, leaves - left, variables, apply_atoms)
    r = rng.random()
    if r < 0.35:
        return a + b
    if r < 0.7:
        return a * b
    if r < 0.8:
        return a ** rng.randint(2, 3)
    if r < 0.92 or not apply_atoms:
        return a / (1 + b**2)
    fn = rng.choice(["sin", "cos", "exp", "ln"])
    return apply(fn, 1 + b**2) if fn == "ln" else apply(fn, b)

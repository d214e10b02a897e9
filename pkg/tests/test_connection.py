import dataclasses
import random
from fractions import Fraction

import pytest

from cartan_ode import curvature
from cartan_ode.connection import compute_connection, verify_residuals
from cartan_ode.expr import P, Q, X, Y, substitute, var
from cartan_ode.invariants import compute_all
from cartan_ode.jet import JetCalculus, OdeSystem, circles_system, random_polynomial_system, trivial_system
from cartan_ode.rational import is_zero

from helpers import corpus

q1, q2 = var(Q(1)), var(Q(2))

KEYS = ["A", "B", "C", "Gx", "Gm2", "Gm3", "E", "Fm2", "Fm3", "Hx", "Hm1", "Hm2", "Hm3"]


@pytest.mark.parametrize("m", [2, 3])
def test_trivial_connection_vanishes(m):
    conn = compute_connection(trivial_system(m))
    assert conn.is_zero()
    js = conn.to_json()
    assert list(js) == KEYS
    assert js["Hx"] == "0" and set(js["Hm3"]) == {"0"}


def test_A_for_q2_squared():
    conn = compute_connection(OdeSystem(2, (q2**2, 0)))
    assert is_zero(conn.A[0, 1] + Fraction(2, 3) * q2)
    assert is_zero(conn.A[0, 0]) and is_zero(conn.A[1, 1]) and is_zero(conn.A[1, 0])
    assert is_zero(conn.B[0, 1] + Fraction(4, 3) * q2)


def test_circles_Fm2_equals_Hm1():
    conn = compute_connection(circles_system(2))
    assert all((a - b).is_zero() for a, b in zip(conn.Fm2, conn.Hm1))
    assert all((e + 2 * f).is_zero() for e, f in zip(conn.E, conn.Fm2))


def test_structural_flags():
    conn = compute_connection(circles_system(2))
    assert conn.structural["alpha"] == "identity"
    assert conn.structural["D"] == conn.structural["Fm1"] == conn.structural["Gm1"] == 0


def test_connection_agrees_with_invariant_forms_on_circles():
    sys = circles_system(3)
    inv = compute_all(sys)
    conn = compute_connection(sys)
    assert (inv.Hx - conn.Hx).is_zero()
    assert all((h - c).is_zero() for h, c in zip(inv.Hm1, conn.Hm1))
    assert not inv.Hx.is_zero()


@pytest.mark.parametrize("name,sys", sorted(corpus().items()))
def test_residuals_on_corpus(name, sys):
    report = verify_residuals(sys)
    assert report.passed, str(report)


@pytest.mark.parametrize("seed", range(25))
def test_residuals_on_random_systems(seed):
    sys = random_polynomial_system(random.Random(1000 + seed))
    report = verify_residuals(sys, curvature=seed < 5)
    assert report.passed, str(report)


def test_report_shape():
    report = verify_residuals(trivial_system(2))
    names = [ch.name for ch in report.checks]
    assert "B = 2A" in names and any(n.startswith("curvature: degree 4") for n in names)
    js = report.to_json()
    assert js["passed"] is True and len(js["checks"]) == len(names)
    assert str(report).splitlines()[0].startswith("PASS")


def _degree4_residual(sys, conn):
    c = JetCalculus(sys)
    Om = curvature.structure_function(c, conn)
    items = curvature.characteristic_conditions(Om, sys.m)["degree 4"]
    return [idx for idx, f in items if not f.is_zero()]


def test_alternative_Hm3_breaks_degree4_normalization():
    # The other reading, -dHx/dp_j + D H-2_j + H-1_k df^k/dq_j, leaves a
    # nonzero degree-4 coefficient once Hx is not identically zero.
    sys = circles_system(2)
    c = JetCalculus(sys)
    conn = compute_connection(sys, c)
    assert not _degree4_residual(sys, conn)
    fq = c.jacobian("q")
    alt = []
    for j in range(2):
        acc = -c.d(conn.Hx, P(j + 1)) + c.D(conn.Hm2[j])
        for k in range(2):
            acc = acc + conn.Hm1[k] * fq[k][j]
        alt.append(acc)
    assert not all((a - b).is_zero() for a, b in zip(alt, conn.Hm3))
    assert _degree4_residual(sys, dataclasses.replace(conn, Hm3=alt))


def test_curvature_slots_reproduce_invariants():
    sys = OdeSystem(2, (var(X()) * q1 * q2 + var(Y(2)), var(P(1)) ** 2))
    report = verify_residuals(sys)
    slots = [ch for ch in report.checks if ch.name.startswith("curvature slot")]
    assert slots and all(ch.passed for ch in slots)


@pytest.mark.parametrize("seed", range(5))
def test_low_degree_coefficients_only_see_q_derivatives(seed):
    # Shifting f by any h(x, y, p) leaves f_q alone, so A, B, Gx, Gm2 and
    # H-1 (built from f_q and f_qq only) must not move.
    rng = random.Random(seed)
    base = random_polynomial_system(rng)
    shift = random_polynomial_system(rng, degree=3)
    h = [substitute(f, {Q(1): 0, Q(2): 0}) for f in shift.f]
    moved = OdeSystem(2, tuple(f + g for f, g in zip(base.f, h)))
    a, b = compute_connection(base), compute_connection(moved)
    for key in ("A", "B", "Gx", "Gm2"):
        assert getattr(a, key) == getattr(b, key), key
    assert all((u - v).is_zero() for u, v in zip(a.Hm1, b.Hm1))


"""
Checking the symbolic pipeline numerically
==========================================

The oracle rebuilds every invariant from nested central differences of a
black-box f, so it shares no code with the symbolic kernel. On a random
polynomial system both agree to the expected accuracy, and halving the step
cuts the error by about four, as a second-order scheme should.
"""
import random

from cartan_ode import P, Q, Y, NumericRhs, compute_all, random_polynomial_system, render_system
from cartan_ode.jet import random_jet_point
from cartan_ode.oracle import FdConfig, compare_with_symbolic, fd_invariants, richardson_factor

rng = random.Random(2)
sys = random_polynomial_system(rng)
print(render_system(sys))

inv = compute_all(sys)
rhs = NumericRhs.from_system(sys)
cfg = FdConfig()

for _ in range(3):
    pt = random_jet_point(rng, 2)
    cmp = compare_with_symbolic(inv, rhs, pt, cfg)
    devs = ", ".join(f"{k} {v:.1e}" for k, v in cmp.deviations.items())
    print(f"{'ok  ' if cmp.passed else 'FAIL'} {devs}")

# None would mean the stencils are exact for this f (no cubic terms drawn)
print("error ratio for h -> h/2:", richardson_factor(inv, rhs, pt, cfg))

# A black box need not come from an expression at all
box = NumericRhs(2, lambda v, i: v[Q(1)] * v[P(2)] / (1 + v[Y(1)] ** 2) if i == 1 else 0)
print(fd_invariants(box, random_jet_point(rng, 2)).W2)

"""
Deciding point-equivalence to y''' = 0
======================================

A system is point-equivalent to the trivial one exactly when W2, I2, W3
and I4 all vanish. Three systems that look nontrivial, and one that is.
"""
from cartan_ode import compute_all, parse_system

# Y = exp(y) applied to Y''' = 0, written back in y
exp_diagonal = parse_system("""
m = 2
f1 = 3*p1*q1/y1 - 2*p1^3/y1^2
f2 = 3*p2*q2/y2 - 2*p2^3/y2^2
""")

# a fiber shear: y1 -> y1 + y2^3 mixes the two components
shear = parse_system("m = 2; f1 = 6*p2*q2; f2 = 0")

# a right-hand side depending on x only is a pure forcing term
forced = parse_system("m = 2; f1 = sin(x); f2 = x^2")

# quadratic coupling between second derivatives
coupled_q = parse_system("m = 2; f1 = q2^2; f2 = 0")

for label, s in [("exp", exp_diagonal), ("shear", shear), ("forced", forced), ("q2^2", coupled_q)]:
    inv = compute_all(s)
    nonzero = [k for k, t in inv.components().items() if not t.is_zero()]
    verdict = "trivializable" if not nonzero else f"not trivializable, nonzero: {nonzero}"
    print(f"{label:7s} {verdict}")

# The obstruction for q2^2 sits in I2, the traceless part of d2f/dq dq
print(compute_all(coupled_q).I2.to_json())

"""
Circles in space
================

Curves that are circles (or lines) in R^{m+1} satisfy a third-order system.
Here we compute its invariants and see that only I4 survives.
"""
from cartan_ode import circles_system, compute_all, render, render_system
from cartan_ode.jet import JetPoint

sys = circles_system(2)
print(render_system(sys))

inv = compute_all(sys)
for name, t in inv.components().items():
    print(f"{name} vanishes identically: {t.is_zero()}")

# I4 is a rational function of the slopes p only
for j in range(2):
    for k in range(2):
        print(f"I4[{j + 1}][{k + 1}] = {render(inv.I4[j, k])}")

# numbers at p = (1, 0)
pt = JetPoint(0.0, (0.0, 0.0), (1.0, 0.0), (0.0, 0.0))
print(inv.numeric(pt)["I4"] + 0.0)

print("trivializable:", inv.is_trivializable())

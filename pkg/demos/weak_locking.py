"""Sit exactly on a step edge (Delta = 0) and watch the 1/j convergence of C_j."""

import math

import numpy as np
from scipy.optimize import brentq

from phaselock import BiasSpec, build, integrate_ground
from phaselock import propagation as prop
from phaselock.sweep import delta_at

T = 2 * math.pi / 0.47
family = BiasSpec.rect_pulse_train(0.0, 3.5, 0.2, T, area="lobe")

edge = brentq(lambda x: delta_at(family, x), 1.30, 1.33, xtol=1e-15)
g = integrate_ground(family.with_dc(edge))
m = build(g)
print(f"edge at iota_dc = {edge:.12f}, Delta = {m.delta:.2e}, regime {m.regime}")

limit = (m.a - m.d) / (2 * m.c)
print("C_lim =", limit, " j (C_j - C_lim) should tend to", (m.a + m.d) / (2 * m.c))
seq = prop.c_sequence(prop.plan(g, c0=0.0), 4000, check_tol=None)
for j in (10, 100, 1000, 4000):
    print(f"  j = {j:5d}  j (C_j - C_lim) = {j * (seq[j].value - limit):.6f}")

# from the wrong side the sequence first runs off through C = infinity
for dc in (1e-3, -1e-3):
    p = prop.plan(g, c0=limit + dc)
    if prop.weak_wrong_side(p):
        est = prop.weak_convergence_time(p)
        off = np.array([c.value - limit for c in prop.c_sequence(p, int(2 * est), check_tol=None)])
        back = np.nonzero((np.sign(off) != np.sign(dc)) & (np.abs(off) <= abs(dc)))[0][0]
        print(f"wrong side dC = {dc:+g}: back within |dC| after {back} periods, estimate {est:.1f}")

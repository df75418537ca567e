"""One pulse bias, start to finish: ground solution, monodromy, regime, long-time phase."""

import math

import numpy as np

import phaselock as pl
from phaselock import propagation as prop

T = 2 * math.pi / 0.47
bias = pl.BiasSpec.rect_pulse_train(1.25, 3.5, 0.2, T, area="lobe")

# one period of phi0, P0, Q0 is all the closed forms need
g = pl.integrate_ground(bias)
print("phi0(T), P0(T), Q0(T) =", g.boundary)

m = pl.build(g)
print("monodromy\n", m.matrix, "\ndet =", m.det, " Delta =", m.delta, " regime:", m.regime)

rep = pl.analyze(g)
print("k =", rep.k, " kappa =", rep.kappa, " C_inf =", rep.c_infinity, " C_bowtie =", rep.c_bowtie)

# phase after 200 periods without integrating 200 periods
p = prop.plan(g, phi_init=0.3)
t = np.array([0.5, 50.5, 200.5]) * T
print("closed form phi:", prop.phase_on_grid(p, t))
ode = pl.integrate_phase(bias, 0.3, t[-1], t_eval=np.r_[0.0, t])
print("brute force phi:", ode.phi[1:])

# a start near the unstable constant leaves it at rate exp(2 kappa) per period
q = prop.plan(g, c0=rep.c_bowtie.value + 1e-9)
d = [c.distance(rep.c_bowtie) for c in prop.c_sequence(q, 5)]
print("distance from C_bowtie:", np.array(d))
print("per-period growth:", np.exp(np.diff(np.log(d[:4]))), " exp(2 kappa) =", math.exp(2 * rep.kappa))

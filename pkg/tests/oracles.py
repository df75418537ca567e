"""Independent reference computations: fixed-step RK4 and closed forms.

Nothing here imports the package's integrator or algebra.
"""

import math

import numpy as np


def rk4_ground(f, T, steps, breaks=()):
    """phi, P, Q at T from zero, classic RK4 with equal steps inside each smooth piece.

    ``f(t)`` must give the value inside the piece; ``breaks`` are the jump times.
    """
    edges = [0.0, *sorted(b for b in breaks if 0 < b < T), T]
    y = np.zeros(3)

    def rhs(t, y, fv):
        s = math.sin(y[0])
        return np.array([fv(t) - s, math.cos(y[0]), math.exp(-y[1]) * s])

    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(1, round(steps * (hi - lo) / T))
        h = (hi - lo) / n
        mid = 0.5 * (lo + hi)
        fv = (lambda t, m=mid: f(m)) if breaks else f
        t = lo
        for _ in range(n):
            k1 = rhs(t, y, fv)
            k2 = rhs(t + h / 2, y + h / 2 * k1, fv)
            k3 = rhs(t + h / 2, y + h / 2 * k2, fv)
            k4 = rhs(t + h, y + h * k3, fv)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
    return y


def constant_rate(B):
    """Mean phase rate of phi' = B - sin phi."""
    return math.copysign(math.sqrt(B * B - 1), B) if abs(B) > 1 else 0.0


def riemann_mean(f, T, n=2_000_000):
    t = (np.arange(n) + 0.5) * (T / n)
    return float(np.mean(f(t)))


def pulse_levels(iota, integral, duty, T, area):
    """(base, top) of a zero-mean-AC rectangular pulse, derived from scratch."""
    width = duty * T
    h = integral / width if area == "plateau" else integral / (width * (1 - duty))
    # mean = base + h * duty must equal iota
    return iota - h * duty, iota - h * duty + h

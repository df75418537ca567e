"""One-period ground solution and brute-force phase integration.

All integration is split at the bias jump points so that no step crosses
a discontinuity of f.  Phases are kept lifted (never reduced mod 2 pi).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .bias import BiasSpec, evaluate, segment_edges, segment_value
from .errors import StepSizeUnderflow


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None  # None means T/200
    dense_samples: int = 2048

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if self.dense_samples < 2:
            raise ValueError("dense_samples must be >= 2")

    def step_for(self, period: float) -> float:
        return self.max_step if self.max_step is not None else period / 200.0


def _solve(rhs, lo, hi, y0, cfg, period, vectorized=False):
    sol = solve_ivp(
        rhs,
        (lo, hi),
        y0,
        method="DOP853",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.step_for(period),
        dense_output=True,
        vectorized=vectorized,
    )
    if sol.status < 0:
        raise StepSizeUnderflow(float(sol.t[-1]), sol.message)
    return sol


def period_grid(bias: BiasSpec, dense_samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Jump-aligned sample times covering [0, T].

    Each smooth piece gets an even number of intervals (for Simpson's rule).
    Returns the grid and the index of each piece's first point, plus a final
    entry for the last point.
    """
    T = bias.period
    edges = segment_edges(bias)
    pts, starts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = max(2, 2 * math.ceil(dense_samples * (hi - lo) / T / 2))
        seg = np.linspace(lo, hi, n + 1)
        starts.append(sum(len(p) for p in pts) - len(starts))
        pts.append(seg)
    grid = np.concatenate([pts[0]] + [p[1:] for p in pts[1:]])
    starts.append(len(grid) - 1)
    return grid, np.asarray(starts)


@dataclass(frozen=True)
class GroundBoundary:
    phi0_T: float
    P0_T: float
    Q0_T: float


@dataclass(frozen=True, eq=False)
class GroundSolution:
    """phi0, P0, Q0 on [0, T] from phi0(0) = P0(0) = Q0(0) = 0."""

    bias: BiasSpec
    grid: np.ndarray
    phi0: np.ndarray
    P0: np.ndarray
    Q0: np.ndarray
    boundary: GroundBoundary
    piece_starts: np.ndarray
    cfg: SolverConfig = field(default_factory=SolverConfig)
    _dense: tuple = field(default=(), repr=False)

    @property
    def period(self) -> float:
        return self.bias.period

    @property
    def F0(self) -> np.ndarray:
        """F0 = Q0 + i exp(-P0) on the grid."""
        return self.Q0 + 1j * np.exp(-self.P0)

    def at(self, t):
        """(phi0, P0, Q0) at arbitrary t in [0, T] from the dense output."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        edges = np.array([s.t_min for s in self._dense] + [self._dense[-1].t_max])
        which = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(self._dense) - 1)
        out = np.empty((3, t.size))
        for k in np.unique(which):
            mask = which == k
            out[:, mask] = self._dense[k](t[mask])
        return out

    def F0_at(self, t):
        _, P, Q = self.at(t)
        return Q + 1j * np.exp(-P)

    def to_csv(self, path, extra: dict | None = None):
        cols = {"t": self.grid, "phi": self.phi0, "P": self.P0, "Q": self.Q0}
        cols.update(extra or {})
        write_columns(path, cols)


def integrate_ground(bias: BiasSpec, cfg: SolverConfig | None = None,
                     phi_init: float = 0.0) -> GroundSolution:
    """Solve phi' = f - sin phi, P' = cos phi, Q' = exp(-P) sin phi on [0, T].

    The ground solution proper has phi_init = 0; other starts give a
    reference solution with its own P, Q (used for antisymmetry checks).
    """
    cfg = cfg or SolverConfig()
    grid, starts = period_grid(bias, cfg.dense_samples)
    edges = segment_edges(bias)
    y0 = np.array([float(phi_init), 0.0, 0.0])
    y = y0.copy()
    samples = np.empty((3, grid.size))
    dense = []
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        f = segment_value(bias, lo, hi)
        sin, cos, exp = math.sin, math.cos, math.exp

        def rhs(t, y, f=f):
            s = sin(y[0])
            return [f(t) - s, cos(y[0]), exp(-y[1]) * s]

        sol = _solve(rhs, lo, hi, y, cfg, bias.period)
        sl = slice(starts[i], starts[i + 1] + 1)
        samples[:, sl] = sol.sol(grid[sl])
        # pin the piece ends to the integrator's own endpoint values
        samples[:, starts[i]] = y
        y = sol.y[:, -1].copy()
        samples[:, starts[i + 1]] = y
        dense.append(sol.sol)
    samples[:, 0] = y0
    return GroundSolution(
        bias=bias,
        grid=grid,
        phi0=samples[0],
        P0=samples[1],
        Q0=samples[2],
        boundary=GroundBoundary(*(float(v) for v in y)),
        piece_starts=starts,
        cfg=cfg,
        _dense=tuple(dense),
    )


def integrate_window(bias: BiasSpec, phi_init: float, t_start: float, t_end: float,
                     cfg: SolverConfig | None = None, samples: int = 1025):
    """(phi, P, Q) on [t_start, t_end] with P = Q = 0 at t_start.

    Used for the start-point independent locking criterion, which needs F
    along an arbitrary solution and window.
    """
    cfg = cfg or SolverConfig()
    T = bias.period
    cuts = _cuts(bias, t_start, t_end)
    y = np.array([phi_init, 0.0, 0.0])
    dense = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        f = _piece_value(bias, lo, hi)

        def rhs(t, y, f=f):
            s = math.sin(y[0])
            return [f(t) - s, math.cos(y[0]), math.exp(-y[1]) * s]

        sol = _solve(rhs, lo, hi, y, cfg, T)
        y = sol.y[:, -1].copy()
        dense.append((lo, hi, sol.sol))
    t = np.linspace(t_start, t_end, samples)
    out = np.empty((3, t.size))
    for lo, hi, s in dense:
        mask = (t >= lo) & (t <= hi)
        out[:, mask] = s(t[mask])
    out[:, -1] = y
    return t, out


def _cuts(bias: BiasSpec, t_start: float, t_end: float) -> list[float]:
    """t_start, every bias jump strictly inside, t_end."""
    T = bias.period
    jumps = [x for x in segment_edges(bias)[:-1]]
    cuts = {t_start, t_end}
    for j in range(math.floor(t_start / T) - 1, math.ceil(t_end / T) + 1):
        for x in jumps:
            tj = j * T + x
            if t_start < tj < t_end:
                cuts.add(tj)
    return sorted(cuts)


def _piece_value(bias: BiasSpec, lo: float, hi: float):
    if bias.is_piecewise_constant:
        val = evaluate(bias, 0.5 * (lo + hi))
        return lambda t: val
    return lambda t: evaluate(bias, t)


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray | None = None
    _dense: tuple = field(default=(), repr=False)

    def phi_at(self, t):
        """Lifted phase at arbitrary t: dense output if present, else linear interpolation."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if not self._dense:
            return np.interp(t, self.grid, self.phi)
        out = np.empty(t.size)
        his = np.array([hi for _, hi, _ in self._dense])
        which = np.clip(np.searchsorted(his, t, side="left"), 0, len(self._dense) - 1)
        for k in np.unique(which):
            mask = which == k
            out[mask] = np.atleast_2d(self._dense[k][2](t[mask]))[0]
        return out

    def __call__(self, t):
        return self.phi_at(t)

    def to_csv(self, path):
        cols = {"t": self.grid, "phi": self.phi}
        if self.dphi is not None:
            cols["dphi"] = self.dphi
        write_columns(path, cols)


def default_t_eval(bias: BiasSpec, horizon: float, dense_samples: int) -> np.ndarray:
    """The ground grid repeated over every (possibly partial) period."""
    T = bias.period
    base, _ = period_grid(bias, dense_samples)
    n = math.ceil(horizon / T - 1e-12)
    parts = [base[:-1] + j * T for j in range(n)]
    t = np.concatenate(parts + [np.array([n * T])])
    return t[t <= horizon * (1 + 1e-14)] if n * T > horizon else t


def integrate_phases(bias: BiasSpec, phi_inits, horizon: float,
                     cfg: SolverConfig | None = None, t_eval=None):
    """Lifted phases for several initial values at once.

    Returns ``(t, phi)`` with ``phi.shape == (len(phi_inits), len(t))``.
    """
    cfg = cfg or SolverConfig()
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    y = np.atleast_1d(np.asarray(phi_inits, dtype=float)).copy()
    t = default_t_eval(bias, horizon, cfg.dense_samples) if t_eval is None else np.asarray(t_eval)
    out = np.empty((y.size, t.size))
    cuts = _cuts(bias, 0.0, horizon)
    dense = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        f = _piece_value(bias, lo, hi)

        def rhs(tt, yy, f=f):
            return f(tt) - np.sin(yy)

        sol = _solve(rhs, lo, hi, y, cfg, bias.period, vectorized=True)
        mask = (t >= lo) & (t <= hi)
        if mask.any():
            out[:, mask] = sol.sol(t[mask])
        y = sol.y[:, -1].copy()
        dense.append((lo, hi, sol.sol))
    end = np.isclose(t, horizon, rtol=0, atol=1e-12 * max(1.0, horizon))
    out[:, end] = y[:, None]
    start = t == 0.0
    out[:, start] = np.atleast_1d(np.asarray(phi_inits, dtype=float))[:, None]
    return t, out, tuple(dense)


def integrate_phase(bias: BiasSpec, phi_init: float, horizon: float,
                    cfg: SolverConfig | None = None, t_eval=None) -> Trajectory:
    """Brute-force lifted solution of phi' = f - sin phi from phi(0) = phi_init."""
    t, phi, dense = integrate_phases(bias, [phi_init], horizon, cfg, t_eval)
    return Trajectory(grid=t, phi=phi[0], _dense=dense)


def integrate_rsj(bias: BiasSpec, beta: float, phi_init: float, dphi_init: float,
                  horizon: float, cfg: SolverConfig | None = None, t_eval=None) -> Trajectory:
    """beta phi'' + phi' + sin phi = f as a first-order system in (phi, phi')."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    cfg = cfg or SolverConfig()
    t = default_t_eval(bias, horizon, cfg.dense_samples) if t_eval is None else np.asarray(t_eval)
    out = np.empty((2, t.size))
    y = np.array([phi_init, dphi_init], dtype=float)
    cuts = _cuts(bias, 0.0, horizon)
    dense = []
    inv_beta = 1.0 / beta
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        f = _piece_value(bias, lo, hi)

        def rhs(tt, yy, f=f):
            return [yy[1], (f(tt) - yy[1] - math.sin(yy[0])) * inv_beta]

        sol = _solve(rhs, lo, hi, y, cfg, bias.period)
        mask = (t >= lo) & (t <= hi)
        if mask.any():
            out[:, mask] = sol.sol(t[mask])
        y = sol.y[:, -1].copy()
        dense.append((lo, hi, sol.sol))
    out[:, t == 0.0] = np.array([[phi_init], [dphi_init]])
    return Trajectory(grid=t, phi=out[0], dphi=out[1], _dense=tuple(dense))


def write_columns(path, cols: dict):
    names = list(cols)
    arrays = [np.asarray(cols[n]) for n in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*arrays):
            w.writerow([repr(float(v)) if not isinstance(v, (int, np.integer)) else int(v) for v in row])

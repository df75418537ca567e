"""Closed-form phase at any time from one period of ground data.

A solution is labelled by C_0; after j periods it is labelled by
C_j = Phi^j C_0 (projectively) and its phase on [jT, (j+1)T] is the
transport of the ground solution by C_j.  Phi^j is taken from the
eigen-decomposition (locked, quasiperiodic) or from the parabolic
power formula (weak), never from repeated multiplication.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import WrongRegime
from .integrator import GroundSolution, Trajectory, write_columns
from .moebius import ProjectiveC, c_from_initials, lifted_in_period, lifted_increment, transport_factor
from .monodromy import Monodromy, Regime, build, steady_constants

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class PropagationPlan:
    ground: GroundSolution
    monodromy: Monodromy
    c0: ProjectiveC
    phi_init: float
    # eigen-data: columns V+, V- and coefficients of (a0, b0) along them
    V: np.ndarray = field(repr=False, default=None)
    K: np.ndarray = field(repr=False, default=None)

    @property
    def period(self) -> float:
        return self.ground.period

    @property
    def regime(self) -> Regime:
        return self.monodromy.regime

    # explicit-formula coefficients, meaningful when sin(phi0(T)/2) != 0

    @property
    def M(self) -> tuple[complex, complex]:
        """(M+, M-) with M+- = L-+ a0 + 2 s b0."""
        m, c = self.monodromy, self.c0
        return (m.L_minus * c.a + 2 * m.s * c.b, m.L_plus * c.a + 2 * m.s * c.b)

    @property
    def GH(self) -> tuple[float, float, float]:
        """(G+, G-, H) of the weak regime."""
        m = self.monodromy
        e = math.exp(-m.P_T)
        Gp = (1 + e) * m.ch - m.Q_T * m.s
        Gm = (1 - e) * m.ch + m.Q_T * m.s
        H = e * m.s + m.Q_T * m.ch
        return Gp, Gm, H

    @property
    def delta_c(self) -> float:
        """Offset of C_0 from the weak steady constant -G-/(2H)."""
        Gp, Gm, H = self.GH
        return self.c0.value + Gm / (2.0 * H)

    def quasi_U(self):
        """(U+, U-, n_R, n_I) of the quasiperiodic node formula (finite C_0)."""
        m = self.monodromy
        C0 = self.c0.value
        e = math.exp(-m.P_T)
        r = math.sqrt(-m.delta)
        nR = C0 * (1 - e) * m.ch + (C0 * m.Q_T + 2) * m.s
        nI = (1 - e + 2 * C0 * m.Q_T) * m.ch + (2 * C0 * e + m.Q_T) * m.s
        Up = nR + r - 1j * (nI + C0 * r)
        Um = -nR + r + 1j * (nI - C0 * r)
        return Up, Um, nR, nI


def plan(ground: GroundSolution, c0=None, phi_init: float | None = None,
         m: Monodromy | None = None) -> PropagationPlan:
    """Propagation data for the solution with phi(0) = phi_init (or labelled by c0)."""
    m = m or build(ground)
    if c0 is None:
        phi_init = 0.0 if phi_init is None else float(phi_init)
        c0 = c_from_initials(phi_init, 0.0)
    else:
        c0 = ProjectiveC.of(c0)
        if phi_init is None:
            phi_init = c0.phase
    V = K = None
    if m.regime is not Regime.WEAK:
        V = np.column_stack([m.eigenvector(m.lambda_plus), m.eigenvector(m.lambda_minus)])
        K = np.linalg.solve(V, np.array([c0.a, c0.b], dtype=complex))
    return PropagationPlan(ground, m, c0, float(phi_init), V, K)


def _weights(p: PropagationPlan, j: int) -> np.ndarray:
    """lambda^j for (+, -), rescaled so the larger one has modulus 1."""
    m = p.monodromy
    if m.regime is Regime.QUASIPERIODIC:
        ang = math.fmod(j * m.alpha, TWO_PI)
        wp = complex(math.cos(ang), math.sin(ang))
        # lambda_plus carries +alpha when its imaginary part is positive
        if m.lambda_plus.imag < 0:
            wp = wp.conjugate()
        return np.array([wp, wp.conjugate()])
    ratio = math.exp(-2.0 * m.kappa * j)
    return np.array([1.0, ratio]) if m.plus_is_max else np.array([ratio, 1.0])


def c_closed(p: PropagationPlan, j: int) -> ProjectiveC:
    """C_j from the closed form of Phi^j."""
    if j < 0:
        raise ValueError("j must be non-negative")
    m = p.monodromy
    if m.regime is Regime.WEAK:
        lam = 1.0 if m.half_trace > 0 else -1.0
        A = j * m.matrix - (j - 1) * lam * np.eye(2)
        v = A @ np.array([p.c0.a, p.c0.b])
        return ProjectiveC(*v)
    v = p.V @ (p.K * _weights(p, j))
    return ProjectiveC(v[0].real, v[1].real)


def c_iterated(p: PropagationPlan, j_max: int) -> list[ProjectiveC]:
    out = [p.c0]
    for _ in range(j_max):
        out.append(p.monodromy.act(out[-1]))
    return out


def c_sequence(p: PropagationPlan, j_max: int, check_tol: float | None = 1e-8) -> list[ProjectiveC]:
    """C_0 ... C_{j_max} from the closed form, cross-checked against iteration."""
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    closed = [c_closed(p, j) for j in range(j_max + 1)]
    if check_tol is not None:
        it = c_iterated(p, j_max)
        worst = max(a.distance(b) for a, b in zip(closed, it))
        if worst > check_tol:
            log.warning("closed-form and iterated C_j differ by %.3e", worst)
    return closed


def rotation_coordinate(p: PropagationPlan, C) -> float:
    """Angle of C on RP^1 in eigen coordinates; one period adds 2 alpha (quasiperiodic)."""
    if p.regime is not Regime.QUASIPERIODIC:
        raise WrongRegime("rotation coordinate needs a negative discriminant")
    C = ProjectiveC.of(C)
    K = np.linalg.solve(p.V, np.array([C.a, C.b], dtype=complex))
    m = p.monodromy
    k = K[0] if m.lambda_plus.imag > 0 else K[1]
    return float(np.mod(2.0 * np.angle(k), TWO_PI))


def _split(p: PropagationPlan, t):
    T = p.period
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    j = np.floor(t / T).astype(np.int64)
    tp = t - j * T
    # rounding can land a hair outside [0, T]
    tp = np.clip(tp, 0.0, T)
    return t, j, tp


def _weak_factor(p: PropagationPlan, F0, j: int):
    """Weak-regime transport ratio for period j, homogeneous in C_0."""
    Gp, Gm, H = p.GH
    a0, b0 = p.c0.a, p.c0.b
    Fb = np.conj(F0)
    num = 2 * H * Gp * (b0 + a0 * Fb) + (Gm * b0 + 2 * H * a0) * (2 * H - Gm * Fb) * j
    den = 2 * H * Gp * (b0 + a0 * F0) + (Gm * b0 + 2 * H * a0) * (2 * H - Gm * F0) * j
    return num / den


def phase_at(p: PropagationPlan, t):
    """exp(i phi(t)) from the closed form; scalar in, scalar out."""
    scalar = np.ndim(t) == 0
    t, j, tp = _split(p, t)
    out = np.empty(t.size, dtype=complex)
    for jj in np.unique(j):
        mask = j == jj
        phi0, P0, Q0 = p.ground.at(tp[mask])
        F0 = Q0 + 1j * np.exp(-P0)
        if p.regime is Regime.WEAK and abs(p.GH[2]) > 1e-12:
            fac = _weak_factor(p, F0, int(jj))
        else:
            fac = transport_factor(F0, c_closed(p, int(jj)))
        out[mask] = np.exp(1j * phi0) * fac
    return out[0] if scalar else out


def phase_nodes_quasi(p: PropagationPlan, j):
    """exp(i phi(jT)) from the U+- node formula (quasiperiodic, finite C_0)."""
    if p.regime is not Regime.QUASIPERIODIC:
        raise WrongRegime("node formula needs a negative discriminant")
    Up, Um, _, _ = p.quasi_U()
    j = np.asarray(j)
    alpha = p.monodromy.alpha
    w = np.exp(1j * np.mod(j * alpha, TWO_PI))
    return (w * Up + np.conj(w) * Um) / (np.conj(w) * np.conj(Up) + w * np.conj(Um))


def node_phases(p: PropagationPlan, j_max: int) -> np.ndarray:
    """Lifted phi(jT) for j = 0..j_max, summing exact per-period increments."""
    cs = c_sequence(p, max(j_max - 1, 0), check_tol=None)
    out = np.empty(j_max + 1)
    out[0] = p.phi_init
    for j in range(j_max):
        out[j + 1] = out[j] + lifted_increment(p.ground, cs[j])
    return out


def phase_trajectory(p: PropagationPlan, periods: int) -> Trajectory:
    """Lifted closed-form phase on the ground grid repeated over ``periods`` periods."""
    if periods < 1:
        raise ValueError("periods must be >= 1")
    g = p.ground
    T = g.period
    nodes = node_phases(p, periods)
    ts, ph = [], []
    for j in range(periods):
        C = c_closed(p, j)
        seg = nodes[j] + lifted_in_period(g, C)
        last = j == periods - 1
        ts.append(g.grid[: None if last else -1] + j * T)
        ph.append(seg[: None if last else -1])
    return Trajectory(grid=np.concatenate(ts), phi=np.concatenate(ph))


def phase_on_grid(p: PropagationPlan, t) -> np.ndarray:
    """Lifted phase at arbitrary non-negative times (sorted or not)."""
    t, j, tp = _split(p, t)
    nodes = node_phases(p, int(j.max()) if t.size else 0)
    out = np.empty(t.size)
    for jj in np.unique(j):
        mask = j == jj
        out[mask] = nodes[jj] + lifted_in_period(p.ground, c_closed(p, int(jj)), tp[mask])
    return out


def _profile(p: PropagationPlan, C: ProjectiveC, samples: int | None) -> Trajectory:
    g = p.ground
    t = g.grid if samples is None else np.linspace(0.0, g.period, samples)
    phi = C.phase + lifted_in_period(g, C, None if samples is None else t)
    return Trajectory(grid=t, phi=phi)


def steady_profile(p: PropagationPlan, samples: int | None = None) -> Trajectory:
    """phi_infinity on [0, T]; phi(T) - phi(0) is 2 pi k."""
    if p.regime is Regime.QUASIPERIODIC:
        raise WrongRegime("no steady profile when the discriminant is negative")
    c_inf, _ = steady_constants(p.monodromy, p.ground)
    return _profile(p, c_inf, samples)


def unstable_profile(p: PropagationPlan, samples: int | None = None) -> Trajectory:
    """phi_bowtie on [0, T], the repelling steady state."""
    if p.regime is not Regime.LOCKED:
        raise WrongRegime("the unstable steady state exists only for a positive discriminant")
    _, c_bow = steady_constants(p.monodromy, p.ground)
    return _profile(p, c_bow, samples)


def envelope_Z(p: PropagationPlan, F0=None) -> np.ndarray:
    """Z(t) on the ground grid: the relative weight of the decaying eigen-component."""
    if p.regime is not Regime.LOCKED:
        raise WrongRegime("transient envelope needs a positive discriminant")
    m = p.monodromy
    F0 = p.ground.F0 if F0 is None else F0
    imax, imin = (0, 1) if m.plus_is_max else (1, 0)
    kmax, kmin = p.K[imax].real, p.K[imin].real
    if abs(kmax) < 1e-300:
        raise ValueError("C_0 sits on the unstable steady constant")
    vmax, vmin = p.V[:, imax].real, p.V[:, imin].real
    return -(kmin * (vmin[1] + vmin[0] * F0)) / (kmax * (vmax[1] + vmax[0] * F0))


def transient_envelope(p: PropagationPlan) -> tuple[float, float, int]:
    """(kappa, max |Z|, first j past the near zone)."""
    Z = envelope_Z(p)
    kappa = p.monodromy.kappa
    zmax = float(np.max(np.abs(Z)))
    if zmax == 0.0:
        return kappa, 0.0, 0
    # smallest j >= 0 with zmax < exp(2 kappa j)
    j = max(0, math.floor(math.log(zmax) / (2.0 * kappa)) + 1)
    return kappa, zmax, j


def weak_convergence_time(p: PropagationPlan) -> float:
    """Periods before a wrong-side start crosses back to the steady state: |G+ / (H dC)|."""
    Gp, _, H = p.GH
    return abs(Gp / (H * p.delta_c))


def weak_wrong_side(p: PropagationPlan) -> bool:
    """True when C_0 lies on the side the parabolic flow moves away from."""
    Gp, _, H = p.GH
    return math.copysign(1.0, p.delta_c) != math.copysign(1.0, H / Gp)


@dataclass
class SegmentedTrajectory:
    period: float
    times: np.ndarray          # t' samples on [0, T] shared by all segments
    segments: list             # phi_j(t') arrays
    increments: list           # integer multiples of 2 pi removed from each segment

    def to_csv(self, path):
        t = np.concatenate([self.times] * len(self.segments))
        idx = np.repeat(np.arange(len(self.segments)), self.times.size)
        write_columns(path, {"t": t + idx * self.period, "phi": np.concatenate(self.segments),
                             "segment_index": idx})

    def sup_differences(self) -> np.ndarray:
        """sup_t |phi_{j+1} - phi_j| for consecutive segments, modulo 2 pi.

        A start straddling 0 lands the two segments 2 pi apart; that is not a change.
        """
        return np.array([np.max(np.abs(np.mod(b - a + math.pi, TWO_PI) - math.pi))
                         for a, b in zip(self.segments, self.segments[1:])])


def segment(traj: Trajectory, T: float, samples: int = 513) -> SegmentedTrajectory:
    """Cut a lifted trajectory into periods, each shifted to start in [0, 2 pi)."""
    t_end = traj.grid[-1]
    n = int(math.floor(t_end / T + 1e-9))
    if n < 1:
        raise ValueError("trajectory shorter than one period")
    tp = np.linspace(0.0, T, samples)
    segs, incs = [], []
    for j in range(n):
        tt = tp + j * T
        phi = traj.phi_at(tt)
        shift = math.floor(phi[0] / TWO_PI)
        segs.append(phi - TWO_PI * shift)
        incs.append(int(shift))
    return SegmentedTrajectory(T, tp, segs, incs)

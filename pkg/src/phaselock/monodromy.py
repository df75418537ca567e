"""The one-period transfer matrix acting on C-constants, and what it implies.

The matrix advances C_j -> C_{j+1} projectively.  It is unimodular, so its
spectrum is fixed by the half-trace D: |D| > 1 gives phase locking with a
stable and an unstable steady constant, |D| < 1 a rotation by angle alpha
(quasiperiodic phase), and |D| = 1 the parabolic "weak" locking.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeRadicand, NotNearInteger, WrongRegime
from .integrator import GroundSolution, SolverConfig, integrate_phase
from .moebius import ProjectiveC, lifted_increment

log = logging.getLogger(__name__)


class Regime(str, enum.Enum):
    LOCKED = "Locked"
    WEAK = "Weak"
    QUASIPERIODIC = "Quasiperiodic"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Monodromy:
    a: float
    b: float
    c: float
    d: float
    delta: float
    regime: Regime
    lambda_plus: complex
    lambda_minus: complex
    L_plus: complex
    L_minus: complex
    # phi0(T), P0(T), Q0(T) the matrix was built from
    phi_T: float
    P_T: float
    Q_T: float
    eps_delta: float
    alpha: float | None = None
    kappa: float | None = None

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def half_trace(self) -> float:
        return 0.5 * (self.a + self.d)

    @property
    def s(self) -> float:
        """sin(phi0(T) / 2)."""
        return math.sin(0.5 * self.phi_T)

    @property
    def ch(self) -> float:
        """cos(phi0(T) / 2)."""
        return math.cos(0.5 * self.phi_T)

    @property
    def plus_is_max(self) -> bool:
        return abs(self.lambda_plus) > abs(self.lambda_minus)

    @property
    def lambda_max(self) -> complex:
        return self.lambda_plus if self.plus_is_max else self.lambda_minus

    @property
    def lambda_min(self) -> complex:
        return self.lambda_minus if self.plus_is_max else self.lambda_plus

    @property
    def L_max(self) -> complex:
        return self.L_plus if self.plus_is_max else self.L_minus

    @property
    def L_min(self) -> complex:
        return self.L_minus if self.plus_is_max else self.L_plus

    def act(self, C: ProjectiveC) -> ProjectiveC:
        """One period of the recurrence C -> (a C + b) / (c C + d)."""
        return ProjectiveC(self.a * C.a + self.b * C.b, self.c * C.a + self.d * C.b)

    def eigenvector(self, lam: complex) -> np.ndarray:
        """Eigenvector (a_, b_) with C = a_/b_ for eigenvalue lam.

        Uses (-2 s, L) when sin(phi0(T)/2) is not negligible, otherwise the
        better conditioned of (b, lam - a) and (lam - d, c).
        """
        lam = complex(lam)
        if abs(self.s) > 1e-8:
            L = self.L_plus if abs(lam - self.lambda_plus) <= abs(lam - self.lambda_minus) else self.L_minus
            return np.array([-2.0 * self.s, L], dtype=complex)
        v1 = np.array([self.b, lam - self.a], dtype=complex)
        v2 = np.array([lam - self.d, self.c], dtype=complex)
        return v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2


def discriminant(phi_T: float, P_T: float, Q_T: float) -> float:
    """Locking discriminant in factored form: 4 exp(-P) (D^2 - 1)."""
    s, ch = math.sin(0.5 * phi_T), math.cos(0.5 * phi_T)
    D = math.cosh(0.5 * P_T) * ch - 0.5 * math.exp(0.5 * P_T) * Q_T * s
    return 4.0 * math.exp(-P_T) * (D * D - 1.0)


def discriminant_expanded(phi_T: float, P_T: float, Q_T: float) -> float:
    """Same discriminant, unfactored polynomial form (cross-check)."""
    e = math.exp(-P_T)
    return (-Q_T * (e + 1.0) * math.sin(phi_T)
            - 0.5 * (-Q_T ** 2 + (e + 1.0) ** 2) * (1.0 - math.cos(phi_T))
            + (1.0 - e) ** 2)


def from_boundary(phi_T: float, P_T: float, Q_T: float) -> Monodromy:
    s, ch = math.sin(0.5 * phi_T), math.cos(0.5 * phi_T)
    E = math.exp(0.5 * P_T)
    a = ch / E - Q_T * E * s
    b = -E * s
    c = s / E + Q_T * E * ch
    d = E * ch
    delta = discriminant(phi_T, P_T, Q_T)
    eps = 1e-9 * (1.0 + (a + d) ** 2)
    # common part of the eigenvalues and of L
    lam_c = 0.5 * E * (-Q_T * s + (1.0 + math.exp(-P_T)) * ch)
    L_c = Q_T * s + (1.0 - math.exp(-P_T)) * ch
    alpha = kappa = None
    if delta > eps:
        regime = Regime.LOCKED
        root = math.sqrt(delta)
        lp, lm = lam_c + 0.5 * E * root, lam_c - 0.5 * E * root
        Lp, Lm = L_c + root, L_c - root
        kappa = math.log(max(abs(lp), abs(lm)))
    elif delta < -eps:
        regime = Regime.QUASIPERIODIC
        root = math.sqrt(-delta)
        lp, lm = complex(lam_c, 0.5 * E * root), complex(lam_c, -0.5 * E * root)
        Lp, Lm = complex(L_c, root), complex(L_c, -root)
        alpha = math.acos(max(-1.0, min(1.0, 0.5 * (a + d))))
    else:
        regime = Regime.WEAK
        lp = lm = math.copysign(1.0, lam_c)
        Lp = Lm = L_c
    return Monodromy(a, b, c, d, delta, regime, complex(lp), complex(lm), complex(Lp), complex(Lm),
                     phi_T, P_T, Q_T, eps, alpha, kappa)


def build(ground: GroundSolution) -> Monodromy:
    if ground.phi0[0] != 0.0:
        raise ValueError("the monodromy is defined relative to the ground solution phi0(0) = 0")
    bd = ground.boundary
    return from_boundary(bd.phi0_T, bd.P0_T, bd.Q0_T)


def criterion_D(t, phi, F, t0: float, T: float) -> float:
    """Start-point independent locking number D; |D| > 1 iff locking.

    ``t, phi, F`` sample one solution and any F along it (F' = -i e^{i phi} Im F)
    over a window containing [t0 - T/2, t0 + T/2].
    """
    t = np.asarray(t)
    F = np.asarray(F)

    def at(x, y):
        return np.interp(x, t, y)

    lo, hi = t0 - 0.5 * T, t0 + 0.5 * T
    Fp = complex(at(hi, F.real), at(hi, F.imag))
    Fm = complex(at(lo, F.real), at(lo, F.imag))
    if Fp.imag <= 0 or Fm.imag <= 0:
        raise NegativeRadicand("Im F must stay positive")
    dphi = at(hi, phi) - at(lo, phi)
    num = (np.exp(-0.5j * dphi) * (Fp - Fm.conjugate())).imag
    return float(-num / (2.0 * math.sqrt(Fp.imag * Fm.imag)))


def quadratic_residual(m: Monodromy, C: ProjectiveC) -> float:
    """Steady-state quadratic for C evaluated homogeneously at (a, b) on the unit circle."""
    s, ch, e = m.s, m.ch, math.exp(-m.P_T)
    A = m.Q_T * ch + e * s
    B = m.Q_T * s + (1.0 - e) * ch
    return abs(A * C.a ** 2 + B * C.a * C.b + s * C.b ** 2)


def sigma0_coefficients(m: Monodromy) -> tuple[float, float, float]:
    """Sigma0(C0) = A C0^2 + B C0 + C0-free term; its sign fixes the rotation direction."""
    s, ch, eP = m.s, m.ch, math.exp(m.P_T)
    A = eP * m.Q_T * ch + s
    B = (eP - 1.0) * ch + eP * m.Q_T * s
    return A, B, eP * s


def steady_constants(m: Monodromy, ground: GroundSolution | None = None):
    """(C_infinity, C_bowtie): stable and unstable steady constants.

    Locked: fixed points along the larger and smaller eigenvalue.  Weak: the
    single fixed point, returned as (C, None).
    """
    if m.regime is Regime.QUASIPERIODIC:
        raise WrongRegime("no real steady constants when the discriminant is negative")
    if m.regime is Regime.WEAK:
        v1 = (m.a - m.d, 2.0 * m.c)
        v2 = (-2.0 * m.b, m.a - m.d)
        v = v1 if math.hypot(*v1) >= math.hypot(*v2) else v2
        if math.hypot(*v) < 1e-12:
            # Phi = +-identity: every C is steady; report the ground itself
            v = (0.0, 1.0)
        return ProjectiveC(*v), None
    vmax = m.eigenvector(m.lambda_max).real
    vmin = m.eigenvector(m.lambda_min).real
    return ProjectiveC(*vmax), ProjectiveC(*vmin)


def simpson_pieces(ground: GroundSolution, y) -> float:
    """Composite Simpson over each smooth piece of the ground grid."""
    total = 0.0
    x = ground.grid
    st = ground.piece_starts
    for i0, i1 in zip(st[:-1], st[1:]):
        xs, ys = x[i0:i1 + 1], y[i0:i1 + 1]
        h = xs[1] - xs[0]
        total += h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())
    return float(total)


def _coarse_simpson(ground: GroundSolution, y):
    """Simpson on every other point, or None when a piece is too short."""
    total = 0.0
    x = ground.grid
    st = ground.piece_starts
    for i0, i1 in zip(st[:-1], st[1:]):
        if (i1 - i0) % 4:
            return None
        xs, ys = x[i0:i1 + 1:2], y[i0:i1 + 1:2]
        h = xs[1] - xs[0]
        total += h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())
    return float(total)


def period_increment(ground: GroundSolution, C) -> tuple[float, float]:
    """Lifted phi(T) - phi(0) of the solution labelled by C, with a quadrature error estimate.

    phi(T) - phi(0) = phi0(T) + 2 Re int_0^T a e^{i phi0} Im F0 / (b + a F0) dt.
    The Im F0 = exp(-P0) weight comes from F0' = -i e^{i phi0} Im F0.
    """
    C = ProjectiveC.of(C)
    if C.a == 0.0:
        return ground.boundary.phi0_T, 0.0
    F0 = ground.F0
    y = 2.0 * (C.a * np.exp(1j * ground.phi0) * F0.imag / (C.b + C.a * F0)).real
    fine = simpson_pieces(ground, y)
    coarse = _coarse_simpson(ground, y)
    err = abs(fine - coarse) / 15.0 if coarse is not None else float("nan")
    return ground.boundary.phi0_T + fine, err


def winding_number_real(ground: GroundSolution, c_infinity) -> float:
    inc, _ = period_increment(ground, c_infinity)
    return inc / (2.0 * math.pi)


def winding_number(ground: GroundSolution, c_infinity) -> int:
    """Integer phase-locking order k of the steady state labelled by c_infinity."""
    k_real = winding_number_real(ground, c_infinity)
    k = round(k_real)
    resid = abs(k_real - k)
    if resid > 1e-4:
        raise NotNearInteger(f"winding quadrature gave {k_real!r}; refine dense_samples")
    if resid > 1e-6:
        log.warning("winding number %r is only within %.2e of an integer", k_real, resid)
    return int(k)


def chaotic_rotation(m: Monodromy, ground: GroundSolution, anchor: str = "closed",
                     periods: int = 32, cfg: SolverConfig | None = None):
    """(alpha, sigma_sign, v_av, k) for a quasiperiodic bias.

    The mean phase rate is (2/T)(sigma alpha + k pi).  The integer k is the
    candidate nearest to a short-horizon estimate of the mean winding: either
    the sum of exact per-period increments along the C-sequence from
    phi(0) = 0 (``anchor="closed"``) or a brute-force ODE run (``"ode"``).
    """
    if m.regime is not Regime.QUASIPERIODIC:
        raise WrongRegime("rotation angle only exists for a negative discriminant")
    T = ground.period
    sigma = 1 if m.s > 0 else -1
    if anchor == "ode":
        traj = integrate_phase(ground.bias, 0.0, periods * T, cfg or ground.cfg,
                               t_eval=np.array([0.0, periods * T]))
        total = traj.phi[-1] - traj.phi[0]
    elif anchor == "closed":
        C = ProjectiveC(0.0, 1.0)
        total = 0.0
        for _ in range(periods):
            total += lifted_increment(ground, C)
            C = m.act(C)
    else:
        raise ValueError(f"unknown anchor {anchor!r}")
    w = total / (2.0 * math.pi * periods)  # revolutions per period
    target = 2.0 * math.pi * w / T
    k_mid = w - sigma * m.alpha / math.pi
    best = min(
        range(math.floor(k_mid) - 1, math.ceil(k_mid) + 2),
        key=lambda k: abs((2.0 / T) * (sigma * m.alpha + k * math.pi) - target),
    )
    v_av = (2.0 / T) * (sigma * m.alpha + best * math.pi)
    return m.alpha, sigma, v_av, best


@dataclass
class RegimeReport:
    regime: Regime
    delta: float
    lambda_plus: complex
    lambda_minus: complex
    c_infinity: ProjectiveC | None = None
    c_bowtie: ProjectiveC | None = None
    k: int | None = None
    kappa: float | None = None
    alpha: float | None = None
    v_av: float | None = None
    sigma_sign: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def c(z):
            return None if z is None else ("inf" if z.is_infinite else z.value)

        def lam(z):
            return [z.real, z.imag]

        return {
            "regime": str(self.regime),
            "delta": self.delta,
            "lambda": {"plus": lam(self.lambda_plus), "minus": lam(self.lambda_minus)},
            "kappa": self.kappa,
            "alpha": self.alpha,
            "c_infinity": c(self.c_infinity),
            "c_bowtie": c(self.c_bowtie),
            "k": self.k,
            "v_av": self.v_av,
            "sigma_sign": self.sigma_sign,
            **self.extra,
        }


def analyze(ground: GroundSolution, anchor: str = "closed") -> RegimeReport:
    """Regime, steady constants, order k or rotation data for one bias."""
    m = build(ground)
    T = ground.period
    rep = RegimeReport(m.regime, m.delta, m.lambda_plus, m.lambda_minus)
    if m.regime is Regime.QUASIPERIODIC:
        alpha, sigma, v_av, k = chaotic_rotation(m, ground, anchor=anchor)
        rep.alpha, rep.sigma_sign, rep.v_av, rep.k = alpha, sigma, v_av, k
    else:
        c_inf, c_bow = steady_constants(m, ground)
        rep.c_infinity, rep.c_bowtie = c_inf, c_bow
        rep.k = winding_number(ground, c_inf)
        rep.kappa = m.kappa
        rep.v_av = 2.0 * math.pi * rep.k / T
    return rep

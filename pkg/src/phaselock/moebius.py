"""Projective C-constants and the fraction-linear transport of solutions.

A real constant C labels a solution relative to the ground solution.  C is
kept in homogeneous coordinates (a, b) with C = a/b, so C = infinity is an
ordinary point (b = 0) and never needs special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bias import BiasSpec, evaluate
from .errors import CoincidentSolutions, DegenerateDenominator
from .integrator import GroundSolution, Trajectory


@dataclass(frozen=True)
class ProjectiveC:
    """Point of RP^1, canonically a^2 + b^2 = 1, b >= 0 (a >= 0 if b == 0)."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        n = math.hypot(a, b)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("homogeneous coordinates must be finite and not both zero")
        a, b = a / n, b / n
        if b < 0 or (b == 0 and a < 0):
            a, b = -a, -b
        object.__setattr__(self, "a", a + 0.0)
        object.__setattr__(self, "b", b + 0.0)

    @classmethod
    def of(cls, value) -> "ProjectiveC":
        """From a real number (``math.inf`` allowed) or an existing point."""
        if isinstance(value, ProjectiveC):
            return value
        value = float(value)
        if math.isinf(value):
            return cls(1.0, 0.0)
        return cls(value, 1.0)

    @classmethod
    def infinity(cls) -> "ProjectiveC":
        return cls(1.0, 0.0)

    @property
    def value(self) -> float:
        return self.a / self.b if self.b != 0.0 else math.inf

    @property
    def is_infinite(self) -> bool:
        return self.b == 0.0

    @property
    def phase(self) -> float:
        """phi(0) mod 2 pi of the solution this constant labels (ground phi0(0) = 0)."""
        return -2.0 * math.atan2(self.a, self.b)

    def distance(self, other: "ProjectiveC") -> float:
        """|sin| of the angle between the two lines; 0 iff equal."""
        return abs(self.a * other.b - self.b * other.a)

    def isclose(self, other, tol: float = 1e-9) -> bool:
        return self.distance(ProjectiveC.of(other)) <= tol

    def __neg__(self):
        return ProjectiveC(-self.a, self.b)

    def __repr__(self):
        return f"ProjectiveC({self.value!r})"


def compose(c1: ProjectiveC, c2: ProjectiveC) -> ProjectiveC:
    """(C1 + C2) / (1 - C1 C2): the constant of transporting by C1 then C2."""
    c1, c2 = ProjectiveC.of(c1), ProjectiveC.of(c2)
    return ProjectiveC(c1.a * c2.b + c2.a * c1.b, c1.b * c2.b - c1.a * c2.a)


@dataclass(frozen=True)
class FValue:
    """F = Q + i exp(-P), always in the upper half-plane."""

    Q: float
    expNegP: float

    def __post_init__(self):
        if not self.expNegP > 0:
            raise ValueError("Im F must be positive")

    @classmethod
    def from_complex(cls, z: complex) -> "FValue":
        return cls(float(z.real), float(z.imag))

    @property
    def complex(self) -> complex:
        return complex(self.Q, self.expNegP)

    @property
    def P(self) -> float:
        return -math.log(self.expNegP)


def c_from_initials(phi_init: float, phi0_init: float) -> ProjectiveC:
    """C = -tan((phi_init - phi0_init) / 2); an antipodal pair gives C = infinity."""
    half = 0.5 * (phi_init - phi0_init)
    return ProjectiveC(-math.sin(half), math.cos(half))


def transport_factor(F0, C: ProjectiveC):
    """(b + a conj F0) / (b + a F0): multiplies exp(i phi0) to give exp(i phi)."""
    F0 = np.asarray(F0)
    den = C.b + C.a * F0
    if np.any(np.abs(den) < 1e-14):
        raise DegenerateDenominator("b + a F0 vanished; Im F0 must be positive")
    return (C.b + C.a * np.conj(F0)) / den


def apply_solution_transport(ground: GroundSolution, C, t):
    """exp(i phi(t)) of the solution labelled by C, for t in [0, T]."""
    C = ProjectiveC.of(C)
    phi0, P0, Q0 = ground.at(t)
    out = np.exp(1j * phi0) * transport_factor(Q0 + 1j * np.exp(-P0), C)
    return out[0] if np.ndim(t) == 0 else out


def transport_F(F0: FValue, C) -> FValue:
    """(F0 - C) / (1 + C F0): the F-function of the transported solution."""
    C = ProjectiveC.of(C)
    z = F0.complex
    return FValue.from_complex((C.b * z - C.a) / (C.b + C.a * z))


def transport_F_array(F0, C) -> np.ndarray:
    C = ProjectiveC.of(C)
    F0 = np.asarray(F0)
    return (C.b * F0 - C.a) / (C.b + C.a * F0)


def inverse_transport(zeta, F, C):
    """exp(i phi0) recovered from exp(i phi), its F and the same C (dual formula)."""
    C = ProjectiveC.of(C)
    F = np.asarray(F)
    return zeta * (C.b - C.a * np.conj(F)) / (C.b - C.a * F)


def _half_arg(ground_F0, C: ProjectiveC):
    """arg(b + a F0), continuous because b + a F0 never leaves one half-plane."""
    return np.angle(C.b + C.a * np.asarray(ground_F0))


def lifted_increment(ground: GroundSolution, C) -> float:
    """Exact lifted phi(T) - phi(0) of the solution labelled by C."""
    C = ProjectiveC.of(C)
    F_T = ground.F0[-1]
    return ground.boundary.phi0_T - 2.0 * float(_half_arg(F_T, C) - _half_arg(1j, C))


def lifted_in_period(ground: GroundSolution, C, t=None):
    """phi(t) - phi(0) on [0, T] for the solution labelled by C (lifted)."""
    C = ProjectiveC.of(C)
    if t is None:
        phi0, F0 = ground.phi0, ground.F0
    else:
        phi0, P0, Q0 = ground.at(t)
        F0 = Q0 + 1j * np.exp(-P0)
    return phi0 - 2.0 * (_half_arg(F0, C) - _half_arg(1j, C))


def c_functional(phi: Trajectory, ground: GroundSolution, t=None):
    """C[phi, phi0](t) as a complex array; the imaginary part is numerical noise.

    ``t`` defaults to the ground grid (interior and end points where the two
    phases differ).
    """
    if t is None:
        t = ground.grid
        phi0, P0, Q0 = ground.phi0, ground.P0, ground.Q0
    else:
        phi0, P0, Q0 = ground.at(t)
    zeta = np.exp(1j * np.asarray(phi(t)))
    zeta0 = np.exp(1j * phi0)
    gap = zeta0 - zeta
    if np.any(np.abs(gap) < 1e-12):
        raise CoincidentSolutions("exp(i phi) and exp(i phi0) coincide")
    inv = -Q0 + 1j * np.exp(-P0) * (zeta0 + zeta) / gap
    return 1.0 / inv


def c_constant(phi: Trajectory, ground: GroundSolution):
    """(mean of Re C over the grid, its standard deviation, max |Im C|)."""
    c = c_functional(phi, ground)
    return float(np.mean(c.real)), float(np.std(c.real)), float(np.max(np.abs(c.imag)))


def _pq(phi0, t, h):
    """P0, Q0 at t - h, t, t + h, integrating their defining ODEs from 0."""
    def rhs(u, y):
        p = phi0(u)
        return [math.cos(p), math.exp(-y[0]) * math.sin(p)]

    ts = (t - h, t, t + h)
    sol = solve_ivp(rhs, (0.0, t + h), [0.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14,
                    t_eval=ts)
    return tuple(sol.y[0]), tuple(sol.y[1])


def _scalar(fn):
    return lambda s: float(np.atleast_1d(fn(s))[0])


def master_identity_terms(phi, phi0, bias: BiasSpec, t: float, h: float = 1e-6):
    """Both sides of the master identity at t, plus d(1/C)/dt.

    Left: (1/2i) (zeta - zeta0)^2 exp(P0) d(1/C)/dt.
    Right: zeta0 D[zeta] - zeta D[zeta0], D[z] = z' + (z^2 - 1)/2 - i f z.
    d(1/C)/dt is nan when the two phases coincide.
    """
    phi, phi0 = _scalar(phi), _scalar(phi0)
    Ps, Qs = _pq(phi0, t, h)
    z = [np.exp(1j * phi(s)) for s in (t - h, t, t + h)]
    z0 = [np.exp(1j * phi0(s)) for s in (t - h, t, t + h)]
    f = float(evaluate(bias, t))
    if min(abs(z0[k] - z[k]) for k in range(3)) < 1e-12:
        # coincident phases: the (zeta - zeta0)^2 prefactor kills the left side
        lhs, dcinv = 0j, complex("nan")
    else:
        cinv = [-Qs[k] + 1j * math.exp(-Ps[k]) * (z0[k] + z[k]) / (z0[k] - z[k]) for k in range(3)]
        dcinv = (cinv[2] - cinv[0]) / (2 * h)
        lhs = (z[1] - z0[1]) ** 2 * math.exp(Ps[1]) * dcinv / 2j

    def D(zs):
        dz = (zs[2] - zs[0]) / (2 * h)
        return dz + 0.5 * (zs[1] ** 2 - 1) - 1j * f * zs[1]

    rhs = z0[1] * D(z) - z[1] * D(z0)
    return lhs, rhs, dcinv


def master_identity_residual(phi, phi0, bias: BiasSpec, t: float, h: float = 1e-6) -> float:
    """|left - right| of the master identity at t (finite differences of step h)."""
    lhs, rhs, _ = master_identity_terms(phi, phi0, bias, t, h)
    return float(abs(lhs - rhs))

"""Seeded invariant checks run by ``phaselock validate``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import monodromy as mono
from . import propagation as prop
from .bias import BiasSpec
from .integrator import SolverConfig, integrate_ground, integrate_phase, integrate_phases
from .moebius import (
    FValue,
    ProjectiveC,
    c_functional,
    compose,
    master_identity_residual,
    transport_F,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    seconds: float = 0.0
    note: str = ""


def random_bias(rng: np.random.Generator, kinds=("constant", "sinusoidal", "rect_pulse_train",
                                                  "piecewise_table")) -> BiasSpec:
    kind = kinds[rng.integers(len(kinds))]
    if kind == "constant":
        return BiasSpec.constant(rng.uniform(-2, 2), rng.uniform(0.5, 8))
    if kind == "sinusoidal":
        T = rng.uniform(1, 15)
        return BiasSpec.sinusoidal(rng.uniform(-2, 2), rng.uniform(0, 3), T, rng.uniform(0, T))
    if kind == "rect_pulse_train":
        return BiasSpec.rect_pulse_train(rng.uniform(-1, 2), rng.uniform(0.5, 4), rng.uniform(0.1, 0.5),
                                         rng.uniform(3, 15), area=("plateau", "lobe")[rng.integers(2)])
    T = rng.uniform(2, 12)
    n = int(rng.integers(2, 5))
    bp = np.sort(rng.uniform(0, T, n))
    return BiasSpec.piecewise_table(bp, rng.uniform(-2, 2, n), T)


def check_det(rng, cfg, n=100) -> CheckResult:
    """det Phi = 1, lambda+ lambda- = 1, characteristic equation, eigenvectors."""
    worst = 0.0
    for _ in range(n):
        g = integrate_ground(random_bias(rng), cfg)
        m = mono.build(g)
        D = m.half_trace
        errs = [abs(m.det - 1.0), abs(m.lambda_plus * m.lambda_minus - 1.0)]
        for lam in (m.lambda_plus, m.lambda_minus):
            errs.append(abs(lam * lam + 1.0 - 2.0 * lam * D))
        if m.regime is not mono.Regime.WEAK and abs(m.s) > 1e-8:
            for lam in (m.lambda_plus, m.lambda_minus):
                v = m.eigenvector(lam)
                errs.append(np.linalg.norm(m.matrix @ v - lam * v) / np.linalg.norm(v))
        if (m.delta > 0) != (D * D - 1 > 0) and abs(m.delta) > m.eps_delta:
            errs.append(math.inf)
        worst = max(worst, max(errs))
    return CheckResult("det_phi", worst < 1e-9, worst, 1e-9)


def _two_solutions(cfg):
    T = 7.0
    bias = BiasSpec.sinusoidal(0.6, 1.4, T, 0.8)
    a = integrate_phase(bias, 0.0, T, cfg)
    b = integrate_phase(bias, 1.7, T, cfg)
    return bias, a, b


def check_master_identity(rng, cfg) -> CheckResult:
    bias, a, b = _two_solutions(cfg)
    ts = rng.uniform(0.2, 2.5, 5)
    worst = max(master_identity_residual(b, a, bias, float(t)) for t in ts)
    return CheckResult("master_identity", worst < 1e-6, worst, 1e-6)


def check_group_law(rng, cfg, n=100) -> CheckResult:
    worst = 0.0
    done = 0
    while done < n:
        c1, c2 = rng.normal(0, 2, 2)
        if abs(c1 * c2 - 1) <= 0.01:
            continue
        F0 = FValue(rng.normal(0, 2), math.exp(rng.uniform(-3, 3)))
        two = transport_F(transport_F(F0, c1), c2).complex
        one = transport_F(F0, compose(ProjectiveC.of(c1), ProjectiveC.of(c2))).complex
        worst = max(worst, abs(two - one) / (1 + abs(one)))
        done += 1
    return CheckResult("group_law", worst < 1e-9, worst, 1e-9)


def check_antisymmetry(rng, cfg) -> CheckResult:
    bias = BiasSpec.sinusoidal(0.9, 1.1, 6.0, 0.3)
    g = integrate_ground(bias, cfg)
    r = integrate_ground(bias, cfg, phi_init=float(rng.uniform(0.5, 2.5)))

    def as_phase(sol):
        return lambda t: np.interp(t, sol.grid, sol.phi0)

    c_rg = c_functional(as_phase(r), g).real
    c_gr = c_functional(as_phase(g), r).real
    worst = float(np.max(np.abs(c_rg + c_gr)))
    return CheckResult("c_antisymmetry", worst < 1e-8, worst, 1e-8)


def check_sigma0(rng, cfg, n=40) -> CheckResult:
    """Discriminant of Sigma0(C0) equals exp(2 P0(T)) Delta (relative to the size of its terms)."""
    worst = 0.0
    for _ in range(n):
        m = mono.build(integrate_ground(random_bias(rng), cfg))
        A, B, C = mono.sigma0_coefficients(m)
        disc = B * B - 4 * A * C
        target = math.exp(2 * m.P_T) * m.delta
        scale = max(B * B, abs(4 * A * C), abs(target), 1e-300)
        worst = max(worst, abs(disc - target) / scale)
    return CheckResult("sigma0_discriminant", worst < 1e-8, worst, 1e-8)


def check_upper_half_plane(rng, cfg, n=2000) -> CheckResult:
    bad = 0
    for _ in range(n):
        F0 = FValue(rng.normal(0, 3), math.exp(rng.uniform(-6, 6)))
        c = math.inf if rng.random() < 0.05 else rng.normal(0, 3)
        try:
            bad += not transport_F(F0, c).expNegP > 0
        except ValueError:
            bad += 1
    return CheckResult("upper_half_plane", bad == 0, float(bad), 0.0)


def check_c_constancy(rng, cfg) -> CheckResult:
    """C between two independently integrated solutions stays constant over a period."""
    T = 2 * math.pi / 0.47
    bias = BiasSpec.rect_pulse_train(1.45, 3.5, 0.2, T, area="lobe")
    g = integrate_ground(bias, cfg)
    other = integrate_phase(bias, float(rng.uniform(1.0, 3.0)), T, cfg)
    c = c_functional(other, g).real
    rel = float(np.std(c) / (1 + abs(np.mean(c))))
    return CheckResult("c_constancy", rel < 1e-6, rel, 1e-6)


def oracle_error(bias: BiasSpec, c0s, periods: int, cfg: SolverConfig | None = None) -> float:
    """sup_t |exp(i phi_closed) - exp(i phi_ode)| over ``periods`` periods for several C_0."""
    g = integrate_ground(bias, cfg)
    m = mono.build(g)
    plans = [prop.plan(g, c0=c, m=m) for c in c0s]
    t, phis, _ = integrate_phases(bias, [p.phi_init for p in plans], periods * bias.period, cfg)
    return max(float(np.max(np.abs(prop.phase_at(p, t) - np.exp(1j * phi)))) for p, phi in zip(plans, phis))


def check_oracle(rng, cfg, n_bias=4, n_c=2, periods=20) -> CheckResult:
    worst = 0.0
    for _ in range(n_bias):
        bias = random_bias(rng)
        worst = max(worst, oracle_error(bias, rng.normal(0, 2, n_c), periods, cfg))
    return CheckResult("oracle_equivalence", worst < 1e-5, worst, 1e-5)


CHECKS = {
    "det_phi": check_det,
    "master_identity": check_master_identity,
    "group_law": check_group_law,
    "c_antisymmetry": check_antisymmetry,
    "sigma0_discriminant": check_sigma0,
    "upper_half_plane": check_upper_half_plane,
    "c_constancy": check_c_constancy,
    "oracle_equivalence": check_oracle,
}


def run_checks(names, seed: int, cfg: SolverConfig | None = None) -> list[CheckResult]:
    """Run the named checks, each with its own generator derived from ``seed``."""
    cfg = cfg or SolverConfig()
    unknown = set(names) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown checks: {sorted(unknown)}")
    out = []
    for i, name in enumerate(CHECKS):
        if name not in names:
            continue
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        res = CHECKS[name](rng, cfg)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out


def format_table(results: list[CheckResult]) -> str:
    lines = [f"{'check':<22}{'result':<8}{'measured':>12}{'limit':>10}"]
    for r in results:
        lines.append(f"{r.name:<22}{'PASS' if r.passed else 'FAIL':<8}{r.measured:>12.3e}"
                     f"{r.threshold:>10.1e}")
    return "\n".join(lines)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pulse
from phaselock import (BiasSpec, CoincidentSolutions, DegenerateDenominator, FValue, ProjectiveC,
                       apply_solution_transport, c_functional, integrate_ground, integrate_phase,
                       transport_F)
from phaselock.moebius import (c_constant, c_from_initials, compose, inverse_transport,
                               lifted_in_period, lifted_increment, master_identity_residual,
                               master_identity_terms, transport_factor)

reals = st.floats(-50, 50, allow_nan=False)
upper = st.builds(FValue, st.floats(-20, 20), st.floats(1e-4, 1e4))


def test_projective_canonical_form():
    assert ProjectiveC(-2.0, -2.0) == ProjectiveC(1.0, 1.0)
    assert ProjectiveC(-3.0, 0.0) == ProjectiveC.infinity()
    assert ProjectiveC.of(math.inf).value == math.inf
    c = ProjectiveC(3.0, 4.0)
    assert (c.a, c.b) == pytest.approx((0.6, 0.8))
    with pytest.raises(ValueError):
        ProjectiveC(0.0, 0.0)


@pytest.mark.parametrize("phi, phi0, expect", [(0.7, 0.7, 0.0), (math.pi, 0.0, math.inf),
                                                (math.pi / 2, 0.0, -1.0)])
def test_c_from_initials(phi, phi0, expect):
    c = c_from_initials(phi, phi0)
    assert c.isclose(ProjectiveC.of(expect), 1e-15)


def test_fvalue_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        FValue(0.0, 0.0)
    assert FValue(1.0, math.exp(-2)).P == pytest.approx(2.0)


def test_transport_F_examples():
    f = FValue(0.4, 0.9)
    assert transport_F(f, 0.0) == f
    out = transport_F(FValue(0.0, 1.0), 1.0)
    assert out.Q == pytest.approx(0.0, abs=1e-15)
    assert out.expNegP == pytest.approx(1.0)
    # C = infinity gives -1/F0
    z = transport_F(f, math.inf).complex
    assert z == pytest.approx(-1 / f.complex)


@settings(max_examples=200, deadline=None)
@given(upper, reals, reals)
def test_group_law(F0, c1, c2):
    if abs(c1 * c2 - 1) <= 0.01:
        return
    two = transport_F(transport_F(F0, c1), c2).complex
    one = transport_F(F0, compose(ProjectiveC.of(c1), ProjectiveC.of(c2))).complex
    assert abs(two - one) <= 1e-9 * (1 + abs(one)) * (1 + abs(F0.complex)) ** 2


def test_group_law_through_infinity():
    # C1 C2 = 1 composes to infinity
    c = compose(ProjectiveC.of(2.0), ProjectiveC.of(0.5))
    assert c.is_infinite
    F0 = FValue(0.3, 0.7)
    two = transport_F(transport_F(F0, 2.0), 0.5).complex
    assert abs(two - transport_F(F0, c).complex) < 1e-12


@settings(max_examples=300, deadline=None)
@given(upper, st.one_of(reals, st.just(math.inf)))
def test_upper_half_plane_preserved(F0, c):
    assert transport_F(F0, c).expNegP > 0


def test_transport_factor_rejects_degenerate():
    with pytest.raises(DegenerateDenominator):
        transport_factor(np.array([-1.0 + 0j]), ProjectiveC.of(1.0))


@pytest.fixture(scope="module")
def fig8(grounds):
    return grounds(1.45)


def test_transport_identity_and_infinity(fig8):
    t = fig8.grid
    z = apply_solution_transport(fig8, 0.0, t)
    assert np.array_equal(z, np.exp(1j * fig8.phi0))
    assert apply_solution_transport(fig8, math.inf, 0.0) == pytest.approx(-1.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.one_of(reals, st.just(math.inf)))
def test_transport_is_unimodular(fig8, c):
    z = apply_solution_transport(fig8, c, fig8.grid)
    assert np.max(np.abs(np.abs(z) - 1)) < 1e-12


def test_transport_matches_direct_integration(fig8):
    C = ProjectiveC.of(0.2)
    direct = integrate_phase(fig8.bias, C.phase, fig8.period, t_eval=fig8.grid)
    z = apply_solution_transport(fig8, C, fig8.grid)
    assert np.max(np.abs(z - np.exp(1j * direct.phi))) < 1e-6


def test_dual_round_trip(fig8):
    C = ProjectiveC.of(0.7)
    z = apply_solution_transport(fig8, C, fig8.grid)
    F = np.array([transport_F(FValue.from_complex(f), C).complex for f in fig8.F0])
    back = inverse_transport(z, F, C)
    assert np.max(np.abs(back - np.exp(1j * fig8.phi0))) < 1e-9


def test_lifted_increment_matches_ode(fig8):
    for c in (0.0, 0.3, -1.2, math.inf):
        C = ProjectiveC.of(c)
        tr = integrate_phase(fig8.bias, C.phase, fig8.period, t_eval=fig8.grid)
        assert lifted_increment(fig8, C) == pytest.approx(tr.phi[-1] - tr.phi[0], abs=1e-8)
        np.testing.assert_allclose(lifted_in_period(fig8, C), tr.phi - tr.phi[0], atol=1e-8)


def test_c_functional_round_trip(fig8):
    C = 0.3
    phase = integrate_phase(fig8.bias, ProjectiveC.of(C).phase, fig8.period, t_eval=fig8.grid)
    c = c_functional(phase, fig8)
    assert np.max(np.abs(c.real - C)) < 1e-8
    assert np.max(np.abs(c.imag)) < 1e-8


def test_c_constancy_between_independent_solutions():
    bias = BiasSpec.sinusoidal(0.3, 1.2, 5.0, 0.4)
    g = integrate_ground(bias)
    other = integrate_phase(bias, 2.1, bias.period)
    mean, std, imag = c_constant(other, g)
    assert std < 1e-6 * (1 + abs(mean))
    assert imag < 1e-8


def test_c_antisymmetry():
    bias = BiasSpec.sinusoidal(0.9, 1.1, 6.0, 0.3)
    g = integrate_ground(bias)
    r = integrate_ground(bias, phi_init=1.3)
    c_rg = c_functional(lambda t: np.interp(t, r.grid, r.phi0), g).real
    c_gr = c_functional(lambda t: np.interp(t, g.grid, g.phi0), r).real
    assert np.max(np.abs(c_rg + c_gr)) < 1e-8


def test_c_functional_coincident(fig8):
    with pytest.raises(CoincidentSolutions):
        c_functional(lambda t: np.interp(t, fig8.grid, fig8.phi0), fig8)


def _phase_fn(traj):
    return lambda t: traj.phi_at(t)


def test_master_identity_for_solutions():
    bias = BiasSpec.sinusoidal(0.6, 1.4, 7.0, 0.8)
    a = integrate_phase(bias, 0.0, 7.0)
    b = integrate_phase(bias, 1.7, 7.0)
    for t in (0.5, 1.9, 3.3):
        lhs, rhs, dcinv = master_identity_terms(_phase_fn(b), _phase_fn(a), bias, t)
        assert abs(lhs - rhs) < 1e-6
        assert abs(lhs) < 1e-6 and abs(dcinv) < 1e-6
    same = master_identity_residual(_phase_fn(a), _phase_fn(a), bias, 1.0)
    assert same < 1e-6


def test_master_identity_is_sensitive():
    # phi = t does not solve the equation for f = 0.6
    bias = BiasSpec.constant(0.6, 5.0)
    ground = integrate_phase(bias, 0.0, 5.0)
    lhs, rhs, dcinv = master_identity_terms(lambda t: t, _phase_fn(ground), bias, 1.0)
    assert abs(lhs - rhs) < 1e-6
    assert abs(dcinv) > 1e-2

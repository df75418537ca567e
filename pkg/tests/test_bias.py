import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import T_PULSE
from oracles import pulse_levels, riemann_mean
from phaselock import BiasSpec, dc_component, evaluate, jump_points
from phaselock.bias import segment_edges


def test_trivial_values():
    assert evaluate(BiasSpec.constant(0.0), 17.3) == 0.0
    assert evaluate(BiasSpec.sinusoidal(1.0, 0.0, 1.0), 0.25) == 1.0


@pytest.mark.parametrize("area", ["plateau", "lobe"])
def test_pulse_plateau_value_and_zero_mean(area):
    spec = BiasSpec.rect_pulse_train(0.0, 3.5, 0.2, T_PULSE, area=area)
    base, top = pulse_levels(0.0, 3.5, 0.2, T_PULSE, area)
    assert evaluate(spec, T_PULSE / 2) == pytest.approx(top, rel=1e-14)
    assert evaluate(spec, 0.1) == pytest.approx(base, rel=1e-14)
    assert abs(riemann_mean(spec, T_PULSE)) < 1e-6


def test_plateau_convention_integral():
    spec = BiasSpec.rect_pulse_train(0.0, 3.5, 0.2, T_PULSE, area="plateau")
    base, top = spec._pulse_levels()
    assert (top - base) * 0.2 * T_PULSE == pytest.approx(3.5)


def test_lobe_convention_integral():
    # positive lobe of the zero-mean AC part carries the stated integral
    spec = BiasSpec.rect_pulse_train(0.0, 3.5, 0.2, T_PULSE, area="lobe")
    base, top = spec._pulse_levels()
    assert top * 0.2 * T_PULSE == pytest.approx(3.5)
    assert -base * 0.8 * T_PULSE == pytest.approx(3.5)


def test_jump_points():
    assert jump_points(BiasSpec.sinusoidal(0.3, 2.0, 5.0)) == []
    assert jump_points(BiasSpec.rect_pulse_train(0.0, 1.0, 0.2, 10.0)) == pytest.approx([4.0, 6.0])
    tab = BiasSpec.piecewise_table([0, 3, 7], [1.0, 2.0, 2.0], 10.0)
    # 7 carries no jump (2 -> 2); 0 does (2 -> 1 across the wrap)
    assert jump_points(tab) == [0.0, 3.0]


def test_dc_component():
    assert dc_component(BiasSpec.constant(0.8)) == 0.8
    assert dc_component(BiasSpec.rect_pulse_train(1.45, 3.5, 0.2, T_PULSE)) == pytest.approx(1.45, abs=1e-12)
    tab = BiasSpec.piecewise_table([0.5, 3, 7], [1.0, -2.0, 0.5], 10.0)
    assert dc_component(tab) == pytest.approx(riemann_mean(tab, 10.0), abs=1e-5)


def test_left_continuity():
    spec = BiasSpec.rect_pulse_train(0.0, 1.0, 0.2, 10.0)
    base, top = spec._pulse_levels()
    assert evaluate(spec, 4.0) == base
    assert evaluate(spec, 6.0) == top


def test_invalid_specs():
    with pytest.raises(ValueError):
        BiasSpec.constant(1.0, period=0.0)
    with pytest.raises(ValueError):
        BiasSpec.rect_pulse_train(0.0, 1.0, 1.2, 10.0)
    with pytest.raises(ValueError):
        BiasSpec.piecewise_table([3, 1], [1, 2], 10.0)


def test_with_dc_keeps_ac():
    spec = BiasSpec.piecewise_table([1, 4], [2.0, -1.0], 6.0)
    moved = spec.with_dc(0.7)
    t = np.linspace(0, 6, 101)
    assert dc_component(moved) == pytest.approx(0.7)
    np.testing.assert_allclose(moved(t) - spec(t), 0.7 - dc_component(spec))


specs = st.one_of(
    st.builds(BiasSpec.constant, st.floats(-3, 3), st.floats(0.1, 20)),
    st.builds(BiasSpec.sinusoidal, st.floats(-3, 3), st.floats(0, 3), st.floats(0.1, 20), st.floats(0, 5)),
    st.builds(BiasSpec.rect_pulse_train, st.floats(-2, 2), st.floats(0.1, 5), st.floats(0.05, 0.9),
              st.floats(1, 20), st.sampled_from(["plateau", "lobe"])),
)


@settings(max_examples=60, deadline=None)
@given(specs, st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20))
def test_periodicity(spec, ts):
    t = np.asarray(ts)
    a, b = evaluate(spec, t), evaluate(spec, t + spec.period)
    if spec.kind == "sinusoidal":
        # t + T rounds differently from t; the cosine sees a different float
        np.testing.assert_allclose(a, b, atol=1e-9)
    else:
        assert np.array_equal(a, b)


@settings(max_examples=60, deadline=None)
@given(specs)
def test_dc_matches_parameter(spec):
    p = spec.p
    target = p.get("iota_dc", p.get("B"))
    assert abs(dc_component(spec) - target) < 1e-10


@settings(max_examples=40, deadline=None)
@given(specs)
def test_jumps_complete(spec):
    T = spec.period
    eps = 1e-9 * T
    jumps = jump_points(spec)
    for p in jumps:
        assert evaluate(spec, p - eps) != evaluate(spec, p + eps)
    # between jumps f is continuous: piecewise-constant kinds are constant there
    if spec.is_piecewise_constant:
        edges = segment_edges(spec)
        for lo, hi in zip(edges[:-1], edges[1:]):
            vals = evaluate(spec, np.linspace(lo, hi, 50)[1:-1])
            assert np.ptp(vals) == 0

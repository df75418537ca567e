import math

import numpy as np
import pytest
from scipy.optimize import brentq

from conftest import T_PULSE, pulse
from phaselock import BiasSpec, InconsistentOrder
from phaselock.sweep import (SweepRow, StepInterval, delta_at, detect_steps, grid_from, iv_curve,
                             negative_dips, read_csv, summary, write_csv, write_json)

CONST = BiasSpec.constant(0.0, 2.7)


def test_empty_grid():
    assert iv_curve(CONST, []) == []
    assert detect_steps([], CONST) == []


def test_grid_validation():
    with pytest.raises(ValueError):
        iv_curve(CONST, [0.2, 0.1])
    with pytest.raises(ValueError):
        iv_curve(CONST, [0.1], worker_count=0)
    assert grid_from(0.6, 1.6, 0.002).size == 501
    assert grid_from(0.0, 0.0, 0.1).tolist() == [0.0]


def test_constant_iv_curve():
    grid = grid_from(0.0, 2.0, 0.05)
    rows = iv_curve(CONST, grid)
    for r in rows:
        B = r.iota_dc
        assert r.error is None
        if B <= 0.99:
            assert r.regime == "Locked" and r.k == 0 and r.v_av == 0.0
        elif B >= 1.01:
            assert r.v_av == pytest.approx(math.sqrt(B * B - 1), abs=1e-6)


def test_constant_steps():
    rows = iv_curve(CONST, grid_from(-1.5, 1.5, 0.1))
    steps = detect_steps(rows, CONST)
    assert len(steps) == 1
    s = steps[0]
    assert s.k == 0 and not (s.lo_open or s.hi_open)
    # the exact edges are +-1, where Delta touches zero quadratically
    assert abs(s.lo + 1) < 1e-3 and abs(s.hi - 1) < 1e-3


def test_all_quasiperiodic_rows_have_no_steps():
    rows = iv_curve(CONST, [1.2, 1.5, 1.8])
    assert all(r.delta < 0 for r in rows)
    assert detect_steps(rows, CONST) == []


def test_worker_count_determinism(tmp_path):
    fam = pulse(1.3)
    grid = grid_from(1.30, 1.34, 0.004)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(iv_curve(fam, grid, worker_count=1), a)
    write_csv(iv_curve(fam, grid, worker_count=3), b)
    assert a.read_bytes() == b.read_bytes()
    assert read_csv(a) == iv_curve(fam, grid)


def test_pulse_steps_around_fig19_fig20():
    fam = pulse(1.4)
    rows = iv_curve(fam, grid_from(1.20, 1.50, 0.002))
    steps = detect_steps(rows, fam)
    assert [s.k for s in steps] == [1, 2]
    k2 = steps[1]
    assert k2.contains(1.46) and not k2.contains(1.40)
    assert steps[0].lo_open and not k2.hi_open
    assert k2.hi == pytest.approx(1.47514, abs=1e-4)
    for s in steps:
        if not s.lo_open:
            assert abs(delta_at(fam, s.lo)) < 1e-7
    assert steps[0].hi < steps[1].lo
    dips = negative_dips(rows)
    assert len(dips) == 1 and dips[0][1] < 0 and 1.31 < dips[0][0] < 1.43


def test_inconsistent_order_detected():
    rows = [SweepRow(0.0, 1.0, "Locked", 0, None, 0.0), SweepRow(0.1, 1.0, "Locked", 1, None, 1.0)]
    with pytest.raises(InconsistentOrder):
        detect_steps(rows, CONST)


def test_failed_rows_are_captured(monkeypatch):
    import phaselock.sweep as sw

    def boom(*a, **k):
        raise FloatingPointError("synthetic")

    monkeypatch.setattr(sw, "analyze", boom)
    rows = iv_curve(CONST, [0.1, 0.2])
    assert all(r.error == "FloatingPointError: synthetic" for r in rows)
    assert summary(rows, [])["failed"] == [0.1, 0.2]


def test_edge_continuity_and_diverging_slope():
    fam = pulse(1.3)
    edge = brentq(lambda x: delta_at(fam, x), 1.30, 1.33, xtol=1e-14)
    v_step = 2 * math.pi / T_PULSE
    # v_av - v_step grows like sqrt(iota - edge) on the quasiperiodic side
    offs = np.array([1e-8, 1e-6, 1e-4, 4e-4, 3e-4, 2e-4])
    rows = iv_curve(fam, np.sort(edge + offs))
    gap = {round(r.iota_dc - edge, 12): r.v_av - v_step for r in rows}
    assert 0 < gap[1e-8] < 1e-3
    assert gap[1e-4] / gap[1e-6] == pytest.approx(10, rel=0.05)
    # slope over the last grid points before the edge keeps increasing
    x = edge + 1e-4 * np.arange(6, 0, -1)
    v = np.array([r.v_av for r in iv_curve(fam, np.sort(x))])[::-1]
    slopes = np.abs(np.diff(v) / 1e-4)
    assert np.all(np.diff(slopes) > 0)


def test_json_summary(tmp_path):
    rows = iv_curve(CONST, [-2.0, 0.0, 2.0])
    steps = [StepInterval(0, -1.0, 1.0)]
    write_json(rows, steps, tmp_path / "s.json")
    import json
    d = json.loads((tmp_path / "s.json").read_text())
    assert d["points"] == 3 and d["steps"][0]["k"] == 0

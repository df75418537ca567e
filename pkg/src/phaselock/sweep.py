"""I-V curves and Shapiro-step intervals over a DC-offset grid."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from .bias import BiasSpec
from .errors import InconsistentOrder
from .integrator import SolverConfig, integrate_ground
from .monodromy import Regime, analyze, build

CSV_COLUMNS = ("iota_dc", "delta", "regime", "k", "alpha", "v_av", "error")


@dataclass(frozen=True)
class SweepRow:
    iota_dc: float
    delta: float | None
    regime: str | None
    k: int | None
    alpha: float | None
    v_av: float | None
    error: str | None = None

    @property
    def locked(self) -> bool:
        return self.regime in (Regime.LOCKED.value, Regime.WEAK.value)


@dataclass(frozen=True)
class StepInterval:
    k: int
    lo: float
    hi: float
    # an open end touches the grid boundary and was not refined
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def evaluate_point(family: BiasSpec, iota: float, cfg: SolverConfig | None = None,
                   anchor: str = "closed") -> SweepRow:
    try:
        g = integrate_ground(family.with_dc(iota), cfg)
        rep = analyze(g, anchor=anchor)
        return SweepRow(float(iota), rep.delta, str(rep.regime), rep.k, rep.alpha, rep.v_av)
    except Exception as exc:  # one bad point must not sink the sweep
        return SweepRow(float(iota), None, None, None, None, None, f"{type(exc).__name__}: {exc}")


def _point(args):
    return evaluate_point(*args)


def iv_curve(family: BiasSpec, grid, worker_count: int = 1, cfg: SolverConfig | None = None,
             anchor: str = "closed") -> list[SweepRow]:
    """One row per grid value, in grid order, independent of worker_count."""
    grid = [float(x) for x in grid]
    if worker_count < 1:
        raise ValueError("worker_count must be >= 1")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted")
    jobs = [(family, x, cfg, anchor) for x in grid]
    if worker_count == 1 or len(grid) < 2:
        return [_point(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * worker_count))
    with ProcessPoolExecutor(max_workers=worker_count) as pool:
        return list(pool.map(_point, jobs, chunksize=chunk))


def delta_at(family: BiasSpec, iota: float, cfg: SolverConfig | None = None) -> float:
    return build(integrate_ground(family.with_dc(iota), cfg)).delta


def _runs(rows, pred):
    run = []
    for i, r in enumerate(rows):
        if pred(r):
            run.append(i)
        elif run:
            yield run
            run = []
    if run:
        yield run


def detect_steps(rows: list[SweepRow], family: BiasSpec, refine_tol: float = 1e-8,
                 cfg: SolverConfig | None = None) -> list[StepInterval]:
    """Maximal locked runs with their order k and bisected Delta = 0 edges."""
    out = []
    good = [r for r in rows if r.error is None]
    for run in _runs(good, lambda r: r.locked):
        ks = {good[i].k for i in run}
        if len(ks) != 1:
            raise InconsistentOrder(
                f"k takes values {sorted(ks)} on [{good[run[0]].iota_dc}, {good[run[-1]].iota_dc}]")
        first, last = run[0], run[-1]

        def edge(inside, outside):
            f = lambda x: delta_at(family, x, cfg)  # noqa: E731
            a, b = good[inside].iota_dc, good[outside].iota_dc
            fa, fb = good[inside].delta, good[outside].delta
            if fa * fb > 0:
                return a
            return brentq(f, min(a, b), max(a, b), xtol=refine_tol)

        lo_open = first == 0
        hi_open = last == len(good) - 1
        lo = good[first].iota_dc if lo_open else edge(first, first - 1)
        hi = good[last].iota_dc if hi_open else edge(last, last + 1)
        out.append(StepInterval(int(ks.pop()), lo, hi, lo_open, hi_open))
    return out


def negative_dips(rows: list[SweepRow]) -> list[tuple[float, float]]:
    """(iota, Delta) at the minimum of each Delta < 0 run bracketed by Delta > 0 on both sides."""
    good = [r for r in rows if r.error is None]
    dips = []
    for run in _runs(good, lambda r: r.delta < 0):
        if run[0] == 0 or run[-1] == len(good) - 1:
            continue
        i = min(run, key=lambda k: good[k].delta)
        dips.append((good[i].iota_dc, good[i].delta))
    return dips


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: list[SweepRow], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def read_csv(path) -> list[SweepRow]:
    conv = {"iota_dc": float, "delta": float, "regime": str, "k": int,
            "alpha": float, "v_av": float, "error": str}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(SweepRow(**{c: (conv[c](rec[c]) if rec[c] != "" else None) for c in CSV_COLUMNS}))
    return rows


def summary(rows: list[SweepRow], steps: list[StepInterval]) -> dict:
    return {
        "points": len(rows),
        "failed": [r.iota_dc for r in rows if r.error is not None],
        "steps": [asdict(s) for s in steps],
        "negative_dips": [{"iota_dc": x, "delta": d} for x, d in negative_dips(rows)],
    }


def write_json(rows, steps, path):
    with open(path, "w") as fh:
        json.dump(summary(rows, steps), fh, indent=2, sort_keys=True)
        fh.write("\n")


def grid_from(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive evenly spaced grid, immune to float drift in the point count."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)

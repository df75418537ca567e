"""Periodic bias waveforms f(t) with an explicit period and jump list.

Every waveform is split as ``f = iota_dc + ac`` where ``iota_dc`` is the
period average and ``ac`` has zero mean.  Values at a jump are the left
limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

KINDS = ("constant", "sinusoidal", "rect_pulse_train", "piecewise_table")

# how the rectangular pulse's "integral magnitude" is measured
PULSE_AREAS = ("plateau", "lobe")


def _freeze(params: Mapping) -> tuple:
    out = []
    for key in sorted(params):
        val = params[key]
        if isinstance(val, (list, tuple, np.ndarray)):
            val = tuple(float(v) for v in val)
        elif not isinstance(val, str):
            val = float(val)
        out.append((key, val))
    return tuple(out)


@dataclass(frozen=True)
class BiasSpec:
    kind: str
    period: float
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bias kind {self.kind!r}")
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError("period must be positive")
        p = self.p
        if self.kind == "rect_pulse_train":
            if not 0.0 < p["duty"] < 1.0:
                raise ValueError("duty must lie in (0, 1)")
            if p.get("area", "plateau") not in PULSE_AREAS:
                raise ValueError(f"area must be one of {PULSE_AREAS}")
            if not 0.0 <= p.get("center", 0.5) < 1.0:
                raise ValueError("center must lie in [0, 1)")
            lo, hi = self._plateau()
            if lo < 0.0 or hi > self.period:
                raise ValueError("plateau must fit inside one period")
        elif self.kind == "piecewise_table":
            bp = np.asarray(p["breakpoints"], dtype=float)
            vals = np.asarray(p["values"], dtype=float)
            if bp.size == 0 or bp.size != vals.size:
                raise ValueError("breakpoints and values must be non-empty and equal length")
            if np.any(np.diff(bp) <= 0) or bp[0] < 0 or bp[-1] >= self.period:
                raise ValueError("breakpoints must be strictly increasing in [0, T)")

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, B: float, period: float = 1.0) -> "BiasSpec":
        return cls("constant", float(period), _freeze({"B": B}))

    @classmethod
    def sinusoidal(cls, B: float, A: float, period: float, t0: float = 0.0) -> "BiasSpec":
        """f = B + A cos(omega (t - t0)) with omega = 2 pi / period."""
        return cls("sinusoidal", float(period), _freeze({"B": B, "A": A, "t0": t0}))

    @classmethod
    def rect_pulse_train(
        cls,
        iota_dc: float,
        pulse_integral: float,
        duty: float,
        period: float,
        area: str = "plateau",
        center: float = 0.5,
    ) -> "BiasSpec":
        """Rectangular plateau of width ``duty*period`` centred on ``center*period``.

        ``area="plateau"``: pulse_integral = height * duty * period.
        ``area="lobe"``: pulse_integral is the area of the positive lobe of
        the zero-mean AC part, height * duty * (1 - duty) * period.
        """
        return cls(
            "rect_pulse_train",
            float(period),
            _freeze(
                {
                    "iota_dc": iota_dc,
                    "pulse_integral": pulse_integral,
                    "duty": duty,
                    "area": area,
                    "center": center,
                }
            ),
        )

    @classmethod
    def piecewise_table(cls, breakpoints, values, period: float) -> "BiasSpec":
        """Piecewise constant: f = values[i] on (breakpoints[i], breakpoints[i+1]]."""
        return cls(
            "piecewise_table",
            float(period),
            _freeze({"breakpoints": list(breakpoints), "values": list(values)}),
        )

    # -- helpers --------------------------------------------------------------

    @property
    def p(self) -> dict:
        return dict(self.params)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period

    @property
    def is_piecewise_constant(self) -> bool:
        return self.kind in ("constant", "rect_pulse_train", "piecewise_table")

    def _plateau(self) -> tuple[float, float]:
        p = self.p
        mid = p.get("center", 0.5) * self.period
        half = 0.5 * p["duty"] * self.period
        return mid - half, mid + half

    def _pulse_levels(self) -> tuple[float, float]:
        """(base, plateau) levels of a rectangular pulse train."""
        p = self.p
        duty, T = p["duty"], self.period
        if p.get("area", "plateau") == "plateau":
            height = p["pulse_integral"] / (duty * T)
        else:
            height = p["pulse_integral"] / (duty * (1.0 - duty) * T)
        base = p["iota_dc"] - height * duty
        return base, base + height

    def with_dc(self, iota_dc: float) -> "BiasSpec":
        """Same AC constituent, new DC constituent."""
        p = self.p
        if self.kind == "constant":
            p["B"] = iota_dc
        elif self.kind == "sinusoidal":
            p["B"] = iota_dc
        elif self.kind == "rect_pulse_train":
            p["iota_dc"] = iota_dc
        else:
            shift = iota_dc - dc_component(self)
            p["values"] = [v + shift for v in p["values"]]
        return replace(self, params=_freeze(p))

    def __call__(self, t):
        return evaluate(self, t)


def evaluate(spec: BiasSpec, t):
    """f(t mod T); left limit at jumps.  Accepts scalars or arrays."""
    T = spec.period
    t = np.asarray(t, dtype=float)
    tm = np.mod(t, T)
    p = spec.p
    if spec.kind == "constant":
        out = np.full_like(tm, p["B"])
    elif spec.kind == "sinusoidal":
        out = p["B"] + p["A"] * np.cos(spec.omega * (tm - p["t0"]))
    elif spec.kind == "rect_pulse_train":
        lo, hi = spec._plateau()
        base, top = spec._pulse_levels()
        # left-continuity: t == lo is still the base, t == hi still the top
        inside = (tm > lo) & (tm <= hi)
        if lo == 0.0:
            inside |= tm == 0.0
        out = np.where(inside, top, base)
    else:
        bp = np.asarray(p["breakpoints"])
        vals = np.asarray(p["values"])
        # index of the interval (bp[i], bp[i+1]] containing tm; wraps to the last value
        idx = np.searchsorted(bp, tm, side="left") - 1
        out = vals[idx]  # idx == -1 picks vals[-1]: the wrap-around interval
        if bp[0] == 0.0:
            out = np.where(tm == 0.0, vals[-1], out)
    return float(out) if out.ndim == 0 else out


def jump_points(spec: BiasSpec) -> list[float]:
    """Sorted discontinuity locations of f inside [0, T)."""
    if spec.kind in ("constant", "sinusoidal"):
        return []
    if spec.kind == "rect_pulse_train":
        base, top = spec._pulse_levels()
        if base == top:
            return []
        lo, hi = spec._plateau()
        return sorted({lo % spec.period, hi % spec.period})
    p = spec.p
    bp, vals = p["breakpoints"], p["values"]
    out = []
    for i, b in enumerate(bp):
        # value left of b is vals[i-1] (wrapping), right of b is vals[i]
        if vals[i] != vals[i - 1]:
            out.append(float(b))
    return out


def dc_component(spec: BiasSpec) -> float:
    """Period average (1/T) int_0^T f dt."""
    p = spec.p
    if spec.kind == "constant":
        return p["B"]
    if spec.kind == "sinusoidal":
        return p["B"]
    if spec.kind == "rect_pulse_train":
        base, top = spec._pulse_levels()
        lo, hi = spec._plateau()
        T = spec.period
        return (base * (T - (hi - lo)) + top * (hi - lo)) / T
    bp = list(p["breakpoints"]) + [p["breakpoints"][0] + spec.period]
    vals = p["values"]
    return sum(v * (bp[i + 1] - bp[i]) for i, v in enumerate(vals)) / spec.period


def segment_edges(spec: BiasSpec) -> list[float]:
    """[0, jumps..., T]: the smooth pieces of one period."""
    edges = [0.0] + [x for x in jump_points(spec) if x > 0.0] + [spec.period]
    return edges


def segment_value(spec: BiasSpec, lo: float, hi: float):
    """Callable f restricted to the open piece (lo, hi).

    Piecewise-constant kinds return the interior value everywhere, so the
    integrator sees the right-hand value at ``lo``.
    """
    if spec.is_piecewise_constant:
        val = evaluate(spec, 0.5 * (lo + hi))
        return lambda t: val
    return lambda t: evaluate(spec, t)

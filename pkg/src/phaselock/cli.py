"""phaselock command line: analyze, sweep, evolve, validate.

Each run reads an INI file.  Sections:

    [bias]      kind = constant | sinusoidal | rect_pulse_train | piecewise_table
                period = T  (or frequency = 2 pi / T)
                constant:          B
                sinusoidal:        B, A, t0
                rect_pulse_train:  iota_dc, pulse_integral, duty, area, center
                piecewise_table:   breakpoints, values  (comma separated)
    [solver]    rel_tol, abs_tol, max_step, dense_samples
    [analyze]   profiles (bool), samples
    [sweep]     start, stop, step, refine_tol, anchor
    [evolve]    periods, phi_init, samples, brute_force (bool), beta
    [validate]  checks (comma separated, "all", or empty for none)
    [run]       workers, seed, out, format

Command-line flags override the [run] section.  Exit codes: 0 ok,
1 validation failure, 2 config error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import checks as chk
from . import monodromy as mono
from . import propagation as prop
from . import sweep as sw
from .bias import KINDS, PULSE_AREAS, BiasSpec
from .errors import ConfigError, PhaseLockError
from .integrator import SolverConfig, integrate_ground, integrate_phase, integrate_rsj, write_columns

log = logging.getLogger("phaselock")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

BIAS_KEYS = {
    "constant": ("B",),
    "sinusoidal": ("B", "A", "t0"),
    "rect_pulse_train": ("iota_dc", "pulse_integral", "duty", "area", "center"),
    "piecewise_table": ("breakpoints", "values"),
}


@dataclass(frozen=True)
class AnalyzeOptions:
    profiles: bool = True
    samples: int = 513


@dataclass(frozen=True)
class SweepOptions:
    start: float = 0.0
    stop: float = 1.0
    step: float = 0.01
    refine_tol: float = 1e-8
    anchor: str = "closed"


@dataclass(frozen=True)
class EvolveOptions:
    periods: int = 10
    phi_init: float = 0.0
    samples: int = 257
    brute_force: bool = True
    beta: float | None = None


@dataclass(frozen=True)
class ValidateOptions:
    checks: tuple = tuple(chk.CHECKS)


@dataclass(frozen=True)
class RunOptions:
    workers: int = 1
    seed: int = 0
    out: str = "."
    format: str = "json"


@dataclass(frozen=True)
class RunConfig:
    bias: BiasSpec = field(default_factory=lambda: BiasSpec.constant(0.0, 1.0))
    solver: SolverConfig = field(default_factory=SolverConfig)
    analyze: AnalyzeOptions = field(default_factory=AnalyzeOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)
    evolve: EvolveOptions = field(default_factory=EvolveOptions)
    validate: ValidateOptions = field(default_factory=ValidateOptions)
    run: RunOptions = field(default_factory=RunOptions)


# -- parsing ------------------------------------------------------------------

def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.replace(",", " ").split()]


def _optional_float(s: str):
    return None if s.strip().lower() in ("", "none") else float(s)


def _section(cp, name, cls, conv):
    if not cp.has_section(name):
        return cls()
    sec = dict(cp.items(name))
    allowed = {f.name for f in fields(cls)}
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"[{name}] unknown keys: {sorted(extra)}")
    try:
        return cls(**{k: conv[k](v) for k, v in sec.items()})
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def _parse_bias(cp) -> BiasSpec:
    if not cp.has_section("bias"):
        return BiasSpec.constant(0.0, 1.0)
    sec = dict(cp.items("bias"))
    kind = sec.pop("kind", None)
    if kind not in KINDS:
        raise ConfigError(f"[bias] kind must be one of {KINDS}")
    try:
        if "period" in sec and "frequency" in sec:
            raise ConfigError("[bias] give period or frequency, not both")
        if "period" in sec:
            period = float(sec.pop("period"))
        elif "frequency" in sec:
            period = 2.0 * math.pi / float(sec.pop("frequency"))
        else:
            raise ConfigError("[bias] period (or frequency) is required")
        allowed = set(BIAS_KEYS[kind])
        extra = set(sec) - allowed
        if extra:
            raise ConfigError(f"[bias] unknown keys for {kind}: {sorted(extra)}")
        if kind == "constant":
            return BiasSpec.constant(float(sec.get("B", 0.0)), period)
        if kind == "sinusoidal":
            return BiasSpec.sinusoidal(float(sec.get("B", 0.0)), float(sec.get("A", 0.0)), period,
                                       float(sec.get("t0", 0.0)))
        if kind == "rect_pulse_train":
            area = sec.get("area", "plateau")
            if area not in PULSE_AREAS:
                raise ConfigError(f"[bias] area must be one of {PULSE_AREAS}")
            return BiasSpec.rect_pulse_train(float(sec.get("iota_dc", 0.0)), float(sec["pulse_integral"]),
                                             float(sec["duty"]), period, area=area,
                                             center=float(sec.get("center", 0.5)))
        return BiasSpec.piecewise_table(_floats(sec["breakpoints"]), _floats(sec["values"]), period)
    except KeyError as exc:
        raise ConfigError(f"[bias] missing key {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[bias] {exc}") from None


def _checks(s: str) -> tuple:
    s = s.strip()
    if s.lower() == "all":
        return tuple(chk.CHECKS)
    names = tuple(x.strip() for x in s.split(",") if x.strip())
    unknown = set(names) - set(chk.CHECKS)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}")
    return names


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (B vs b)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    known = {"bias", "solver", "analyze", "sweep", "evolve", "validate", "run"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")
    cfg = RunConfig(
        bias=_parse_bias(cp),
        solver=_section(cp, "solver", SolverConfig, {
            "rel_tol": float, "abs_tol": float, "max_step": _optional_float, "dense_samples": int}),
        analyze=_section(cp, "analyze", AnalyzeOptions, {"profiles": _bool, "samples": int}),
        sweep=_section(cp, "sweep", SweepOptions, {
            "start": float, "stop": float, "step": float, "refine_tol": float, "anchor": str}),
        evolve=_section(cp, "evolve", EvolveOptions, {
            "periods": int, "phi_init": float, "samples": int, "brute_force": _bool,
            "beta": _optional_float}),
        validate=_section(cp, "validate", ValidateOptions, {"checks": _checks}),
        run=_section(cp, "run", RunOptions, {"workers": int, "seed": int, "out": str, "format": str}),
    )
    check_ranges(cfg)
    return cfg


def check_ranges(cfg: RunConfig):
    r, s, e, a = cfg.run, cfg.sweep, cfg.evolve, cfg.analyze
    problems = []
    if r.workers < 1:
        problems.append("workers must be >= 1")
    if r.format not in ("csv", "json"):
        problems.append("format must be csv or json")
    if not (s.step > 0 and s.stop >= s.start):
        problems.append("sweep needs step > 0 and stop >= start")
    if not s.refine_tol > 0:
        problems.append("refine_tol must be positive")
    if s.anchor not in ("closed", "ode"):
        problems.append("anchor must be closed or ode")
    if e.periods < 1 or e.samples < 2 or a.samples < 2:
        problems.append("periods >= 1 and samples >= 2 required")
    if e.beta is not None and not e.beta > 0:
        problems.append("beta must be positive")
    if problems:
        raise ConfigError("; ".join(problems))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def to_ini(cfg: RunConfig) -> str:
    """Serialize so that parse_config(to_ini(c)) == c."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    b = cfg.bias
    cp["bias"] = {"kind": b.kind, "period": repr(b.period)}
    for k in BIAS_KEYS[b.kind]:
        if k in b.p:
            cp["bias"][k] = _fmt(b.p[k])
    for name in ("solver", "analyze", "sweep", "evolve", "validate", "run"):
        obj = getattr(cfg, name)
        cp[name] = {f.name: _fmt(getattr(obj, f.name)) for f in fields(obj)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


# -- commands -------------------------------------------------------------------

def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.run.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _dump_kv_csv(obj: dict, path: Path):
    flat = {}

    def walk(prefix, v):
        if isinstance(v, dict):
            for k, x in v.items():
                walk(f"{prefix}.{k}" if prefix else k, x)
        elif isinstance(v, list):
            for i, x in enumerate(v):
                walk(f"{prefix}.{i}", x)
        else:
            flat[prefix] = v

    walk("", obj)
    lines = ["key,value"] + [f"{k},{_fmt(v) if v is not None else ''}" for k, v in sorted(flat.items())]
    path.write_text("\n".join(lines) + "\n")


def cmd_analyze(cfg: RunConfig) -> int:
    g = integrate_ground(cfg.bias, cfg.solver)
    rep = mono.analyze(g, anchor=cfg.sweep.anchor)
    m = mono.build(g)
    T = g.period
    doc = rep.to_dict()
    doc["criterion_D"] = mono.criterion_D(g.grid, g.phi0, g.F0, 0.5 * T, T)
    doc["period"] = T
    doc["monodromy"] = [[m.a, m.b], [m.c, m.d]]
    out = _out(cfg)
    if cfg.run.format == "json":
        _dump_json(doc, out / "analyze.json")
    else:
        _dump_kv_csv(doc, out / "analyze.csv")
    if cfg.analyze.profiles:
        t = np.linspace(0.0, T, cfg.analyze.samples)
        phi0, P0, Q0 = g.at(t)
        cols = {"t": t, "phi0": phi0, "P0": P0, "Q0": Q0}
        if m.regime is not mono.Regime.QUASIPERIODIC:
            p = prop.plan(g, m=m)
            cols["phi_inf"] = prop.steady_profile(p, cfg.analyze.samples).phi
            if m.regime is mono.Regime.LOCKED:
                cols["phi_bowtie"] = prop.unstable_profile(p, cfg.analyze.samples).phi
        write_columns(out / "profiles.csv", cols)
    print(f"{doc['regime']}  delta={doc['delta']!r}  k={doc['k']}  v_av={doc['v_av']!r}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    s = cfg.sweep
    grid = sw.grid_from(s.start, s.stop, s.step)
    rows = sw.iv_curve(cfg.bias, grid, cfg.run.workers, cfg.solver, anchor=s.anchor)
    steps = sw.detect_steps(rows, cfg.bias, s.refine_tol, cfg.solver)
    out = _out(cfg)
    sw.write_csv(rows, out / "sweep.csv")
    sw.write_json(rows, steps, out / "steps.json")
    for st in steps:
        print(f"k={st.k:+d}  [{st.lo!r}, {st.hi!r}]")
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"row {r.iota_dc!r} failed: {r.error}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_evolve(cfg: RunConfig) -> int:
    e = cfg.evolve
    g = integrate_ground(cfg.bias, cfg.solver)
    p = prop.plan(g, phi_init=e.phi_init)
    T = g.period
    closed = prop.phase_trajectory(p, e.periods)
    segs = prop.segment(closed, T, e.samples)
    t = np.concatenate([segs.times[:-1] + j * T for j in range(e.periods)] + [np.array([e.periods * T])])
    cols = {"t": t, "phi_closed": prop.phase_on_grid(p, t)}
    if e.brute_force:
        ode = integrate_phase(cfg.bias, e.phi_init, e.periods * T, cfg.solver, t_eval=t)
        cols["phi_ode"] = ode.phi
    if e.beta is not None:
        rsj = integrate_rsj(cfg.bias, e.beta, e.phi_init, 0.0, e.periods * T, cfg.solver, t_eval=t)
        cols["phi_rsj"] = rsj.phi
        cols["rsj_minus_first_order"] = rsj.phi - cols["phi_closed"]
    cols["segment_index"] = np.minimum((t / T).astype(int), e.periods - 1)
    out = _out(cfg)
    if cfg.run.format == "json":
        _dump_json({k: np.asarray(v).tolist() for k, v in cols.items()}, out / "evolve.json")
    else:
        write_columns(out / "evolve.csv", cols)
    segs.to_csv(out / "segments.csv")
    sup = segs.sup_differences()
    last = float(sup[-1]) if sup.size else 0.0
    print(f"{p.regime}  periods={e.periods}  last segment change={last!r}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    names = cfg.validate.checks
    if not names:
        print("no checks selected")
        return EXIT_OK
    results = chk.run_checks(names, cfg.run.seed, cfg.solver)
    print(chk.format_table(results))
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "validation FAILED")
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "evolve": cmd_evolve, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phaselock", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="INI file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "validate":
            sp.add_argument("--checks", help='comma separated subset, "all", or "" for none')
    return ap


def load(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    cfg = parse_config(text)
    run = cfg.run
    over = {k: getattr(args, k) for k in ("out", "workers", "seed", "format") if getattr(args, k) is not None}
    if over:
        cfg = replace(cfg, run=replace(run, **over))
    if getattr(args, "checks", None) is not None:
        try:
            cfg = replace(cfg, validate=ValidateOptions(_checks(args.checks)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    check_ranges(cfg)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except PhaseLockError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

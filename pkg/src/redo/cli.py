"""Benchmark and reproduction command line.

Commands::

    redo cost-model  --config cfg.toml [--out DIR]
    redo expm-bench  --config cfg.toml [--out DIR] [--seed N]
    redo grape       --config cfg.toml [--backend redo|pade|both] ...
    redo freeze      --config cfg.toml [--full-scale] [--threads N] ...
    redo table       build|export|import|info  [--config cfg.toml] [--file table.npz]

Configuration is a single TOML file with one section per command plus an
optional ``[global]`` section (seed, out, threads, backends).  Unknown
keys are rejected.  File paths inside the config resolve relative to the
config file.  Every CSV starts with ``#`` comment lines recording tool
version, command line, seed, config hash and date; re-running a command
with the same config and seed reproduces identical data rows (timing
columns excepted).

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import sys
import time
import zipfile
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .freezing import FreezeConfig, freezing_frequencies, q_theory, sweep
from .grape import GrapeConfig, NumericalError, benchmark_iteration, optimize
from .linalg import expm_herm, expm_pade, expm_taylor_adaptive, gate_fidelity
from .seeding import rng
from .spins import ControlSequence, SpinSystem, spin_op
from .table import (CoarseGrainSpec, DiscreteOperatorTable, build_table,
                    cost_model)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration loading

_GLOBAL_KEYS = {"seed": int, "out": str, "threads": int, "backends": list}
_COST_KEYS = {"bases": list, "base_min": int, "base_max": int, "ratio": float}
_EXPM_KEYS = {"qubits": list, "methods": list, "samples": int, "base": int,
              "low": int, "high": int, "epsilon": float, "omega_max": float,
              "dt": float}
_GRAPE_KEYS = {"system": dict, "target": str, "target_file": str,
               "n_segments": int, "dt": float, "omega_max": float,
               "base": int, "epsilon": float, "step_size": float,
               "max_iterations": int, "fidelity_goal": float,
               "benchmark_iterations": int, "initial": str}
_SYSTEM_KEYS = {"spins": int, "offsets": list, "j": list, "d": list,
                "species": list}
_FREEZE_KEYS = {"spins": int, "h0": float, "j": float, "omega_min": float,
                "omega_max": float, "omega_points": int, "lambda_min": float,
                "lambda_max": float, "lambda_points": int, "duration": float,
                "time_points": int, "base": int, "low": int, "high": int,
                "periodic": bool}
_TABLE_KEYS = {"qubits": int, "generator": str, "system": dict, "channel": int,
               "base": int, "low": int, "high": int, "omega_max": float,
               "dt": float, "signed": bool, "file": str}

_SCHEMAS = {
    "global": _GLOBAL_KEYS,
    "cost-model": _COST_KEYS,
    "expm-bench": _EXPM_KEYS,
    "grape": _GRAPE_KEYS,
    "freeze": _FREEZE_KEYS,
    "table": _TABLE_KEYS,
}


def _check_keys(section: dict, allowed: dict, where: str):
    for key, value in section.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{where}]")
        expected = allowed[key]
        if expected in (int, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"[{where}] {key} must be a number")
        elif not isinstance(value, expected):
            raise ConfigError(f"[{where}] {key} must be {expected.__name__}")
    return section


def load_config(path: str | None) -> tuple[dict, str, Path]:
    """Parse and validate the TOML config; returns (data, sha256, basedir)."""
    if path is None:
        return {}, "none", Path.cwd()
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    for name, section in data.items():
        schema = _SCHEMAS.get(name)
        if schema is None:
            raise ConfigError(f"unknown config section [{name}]")
        if not isinstance(section, dict):
            raise ConfigError(f"section [{name}] must be a table")
        _check_keys(section, schema, name)
        if name == "grape" and "system" in section:
            _check_keys(section["system"], _SYSTEM_KEYS, "grape.system")
        if name == "table" and "system" in section:
            _check_keys(section["system"], _SYSTEM_KEYS, "table.system")
    return data, hashlib.sha256(raw).hexdigest(), p.parent


# ---------------------------------------------------------------------------
# CSV output with provenance header

class Reporter:
    def __init__(self, args, config_hash: str, argv=None):
        self.out_dir = Path(args.out)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        words = argv if argv is not None else sys.argv[1:]
        self.meta = {
            "tool": f"redo {__version__}",
            "command": " ".join(words) or args.command,
            "seed": str(args.seed),
            "config-sha256": config_hash,
            "date": datetime.datetime.now(datetime.timezone.utc)
                    .replace(microsecond=0).isoformat(),
        }

    def write_csv(self, name: str, header: list, rows) -> Path:
        path = self.out_dir / name
        with path.open("w", encoding="utf-8", newline="") as f:
            for key, value in self.meta.items():
                f.write(f"# {key}: {value}\n")
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join(_cell(x) for x in row) + "\n")
        print(f"wrote {path}")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")
        return path


def _cell(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


# ---------------------------------------------------------------------------
# cost-model

def cmd_cost_model(args, cfg: dict, reporter: Reporter) -> int:
    section = cfg.get("cost-model", {})
    ratio = float(section.get("ratio", 64.0 ** 3))
    if "bases" in section:
        bases = [int(b) for b in section["bases"]]
    else:
        bmin = int(section.get("base_min", 2))
        bmax = int(section.get("base_max", 1024))
        bases = list(range(bmin, bmax + 1))
    if any(b < 2 for b in bases):
        raise ConfigError("bases must be >= 2")
    rows = []
    for b in bases:
        spec = CoarseGrainSpec.for_range(base=b, epsilon=1.0, omega_max=ratio,
                                         dt=1.0)
        p, s = cost_model(spec)
        rows.append((b, p, s))
    reporter.write_csv("cost_model.csv", ["base", "multiplications", "stored"], rows)
    return 0


# ---------------------------------------------------------------------------
# expm-bench

def _collective_x(n_qubits: int) -> np.ndarray:
    d = 2 ** n_qubits
    out = np.zeros((d, d), dtype=np.complex128)
    for i in range(1, n_qubits + 1):
        out += spin_op(n_qubits, i, "x")
    return out


def cmd_expm_bench(args, cfg: dict, reporter: Reporter) -> int:
    section = cfg.get("expm-bench", {})
    qubits = [int(q) for q in section.get("qubits", [1, 2, 3, 4, 5, 6])]
    methods = list(section.get("methods", ["ed", "taylor", "pade", "redo"]))
    for m in methods:
        if m not in ("ed", "taylor", "pade", "redo"):
            raise ConfigError(f"unknown method {m!r}")
    samples = int(section.get("samples", 10000))
    omega_max = float(section.get("omega_max", 2.6e5))
    dt = float(section.get("dt", 5e-6))
    spec = CoarseGrainSpec(
        base=int(section.get("base", 64)),
        low=int(section.get("low", 0)),
        high=int(section.get("high", 2)),
        omega_max=omega_max, dt=dt)
    gen = rng(args.seed)

    timing_rows = []
    deviation_rows = []
    for nq in qubits:
        s_op = _collective_x(nq)
        omegas = gen.random(samples) * omega_max
        table = None
        if "redo" in methods:
            t0 = time.perf_counter()
            # bounded memo: benchmark draws rarely repeat on the fine grid
            table = build_table(spec, s_op, memo_capacity=4096)
            build_s = time.perf_counter() - t0
            p, _ = cost_model(spec)
            timing_rows.append(("redo-table-build", nq, 2 ** nq, 1,
                                build_s, build_s, build_s, f"stored={table.n_stored}"))
        for method in methods:
            times, extra = _time_method(method, s_op, omegas, dt, table, spec)
            timing_rows.append((method, nq, 2 ** nq, samples,
                                float(np.median(times)), float(np.mean(times)),
                                float(np.min(times)), extra))
        if table is not None:
            sub = omegas[:min(samples, 500)]
            devs = []
            for w in sub:
                exact = expm_pade(-1j * w * dt * s_op)
                devs.append(1.0 - gate_fidelity(table.propagator_for(w), exact))
            deviation_rows.append((nq, float(np.max(devs)), float(np.mean(devs))))

    reporter.write_csv(
        "expm_bench_timing.csv",
        ["method", "qubits", "dim", "samples", "median_s", "mean_s", "min_s", "notes"],
        timing_rows)
    if deviation_rows:
        reporter.write_csv(
            "expm_bench_deviation.csv",
            ["qubits", "max_one_minus_f", "mean_one_minus_f"],
            deviation_rows)
    if args.gnuplot:
        reporter.write_text("expm_bench_timing.gp", _GNUPLOT_TIMING)
    return 0


def _time_method(method: str, s_op, omegas, dt, table, spec):
    """Per-propagator wall times of one method, one sample per chunk."""
    extra = ""
    if method == "redo":
        call = table.propagator_for
        p, _ = cost_model(spec)
        extra = f"max_matmuls={p}"
    elif method == "pade":
        call = lambda w: expm_pade(-1j * w * dt * s_op)
    elif method == "ed":
        call = lambda w: expm_herm(-1j * w * dt * s_op)
    elif method == "taylor":
        _, sq, terms = expm_taylor_adaptive(-1j * omegas[0] * dt * s_op,
                                            return_info=True)
        extra = f"squarings={sq};terms={terms}"
        call = lambda w: expm_taylor_adaptive(-1j * w * dt * s_op)
    for w in omegas[: min(8, omegas.size)]:     # warm-up, excluded
        call(w)
    chunks = np.array_split(omegas, min(10, omegas.size))
    times = []
    for chunk in chunks:
        t0 = time.perf_counter()
        for w in chunk:
            call(w)
        times.append((time.perf_counter() - t0) / chunk.size)
    return np.array(times), extra


# ---------------------------------------------------------------------------
# grape

def _grape_target(name: str, system: SpinSystem) -> np.ndarray:
    d = system.dim
    if name == "identity":
        return np.eye(d, dtype=np.complex128)
    if name == "not1":
        # pi rotation of spin 1 about x, i.e. X up to a global phase
        return expm_pade(-1j * np.pi * spin_op(system.n_spins, 1, "x"))
    if name == "cnot":
        if system.n_spins != 2:
            raise ConfigError("cnot target needs a two-spin system")
        u = np.eye(4, dtype=np.complex128)
        u[2, 2] = u[3, 3] = 0
        u[2, 3] = u[3, 2] = 1
        return u
    raise ConfigError(f"unknown target {name!r}")


def cmd_grape(args, cfg: dict, reporter: Reporter, basedir: Path) -> int:
    section = cfg.get("grape")
    if not section or "system" not in section:
        raise ConfigError("the grape command needs a [grape] section with a system")
    system = SpinSystem.from_dict(section["system"])
    if "target_file" in section:
        try:
            target = np.load(basedir / section["target_file"])
        except OSError as exc:
            raise ConfigError(f"cannot read target file: {exc}") from exc
    else:
        target = _grape_target(section.get("target", "identity"), system)
    omega_max = float(section.get("omega_max", 2.6e5))
    dt = float(section.get("dt", 5e-6))
    try:
        grain = CoarseGrainSpec.for_range(
            base=int(section.get("base", 64)),
            epsilon=float(section.get("epsilon", 1.0)),
            omega_max=omega_max, dt=dt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    backends = args.backends

    n_segments = int(section.get("n_segments", 100))
    initial = section.get("initial", "random")
    if initial == "zero":
        k = len(system.channels)
        initial_controls = ControlSequence(dt, np.zeros((n_segments, k)),
                                           np.zeros((n_segments, k)))
    elif initial == "random":
        initial_controls = None
    else:
        raise ConfigError("[grape] initial must be 'random' or 'zero'")

    base_cfg = dict(
        system=system, target=target, n_segments=n_segments,
        dt=dt, omega_max=omega_max, grain=grain,
        step_size=float(section.get("step_size", 0.25)),
        max_iterations=int(section.get("max_iterations", 200)),
        fidelity_goal=float(section.get("fidelity_goal", 0.999)),
        seed=args.seed, initial_controls=initial_controls)

    def make_cfg(backend):
        try:
            return GrapeConfig(backend=backend, **base_cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    if set(backends) == {"redo", "pade"}:
        # Dual-backend mode: one trajectory through both backends, timed
        # per iteration (the table build stays outside the loop).
        bench_cfg = make_cfg("redo")
        n_iter = int(section.get("benchmark_iterations",
                                 max(20, min(bench_cfg.max_iterations, 50))))
        bench = benchmark_iteration(bench_cfg, n_iterations=n_iter)
        rows = [(0, bench.redo_trace[0], bench.pade_trace[0], 0.0, 0.0)]
        for i in range(n_iter):
            rows.append((i + 1, bench.redo_trace[i + 1], bench.pade_trace[i + 1],
                         sum(bench.redo_iteration_seconds[i]) * 1e3,
                         sum(bench.pade_iteration_seconds[i]) * 1e3))
        reporter.write_csv(
            "grape_benchmark.csv",
            ["iteration", "fidelity_redo", "fidelity_pade", "t_redo_ms", "t_pade_ms"],
            rows)
        _write_controls(reporter, "grape_controls.csv", bench.final_controls)
        print(f"per-iteration medians: pade {bench.t_pade * 1e3:.2f} ms, "
              f"redo {bench.t_redo * 1e3:.2f} ms (ratio {bench.ratio:.2f}); "
              f"max fidelity-trace gap {bench.max_trace_gap:.2e}; "
              f"table build {bench.table_build_seconds * 1e3:.2f} ms")
        return 0

    for backend in backends:
        res = optimize(make_cfg(backend))
        print(f"{backend}: fidelity {res.final_fidelity:.6f} after "
              f"{len(res.iteration_seconds)} iterations ({res.stop_reason}); "
              f"table build {res.table_build_seconds * 1e3:.2f} ms")
        rows = []
        for i, fid in enumerate(res.fidelity_trace):
            if i == 0:
                rows.append((0, fid, 0.0, 0.0))
            else:
                t_prop, t_other = res.iteration_seconds[i - 1]
                rows.append((i, fid, t_prop * 1e3, t_other * 1e3))
        reporter.write_csv(f"grape_{backend}.csv",
                           ["iteration", "fidelity", "t_prop_ms", "t_other_ms"],
                           rows)
        _write_controls(reporter, f"grape_controls_{backend}.csv", res.controls)
    return 0


def _write_controls(reporter: Reporter, name: str, controls) -> None:
    rows = []
    for n in range(controls.n_segments):
        for k in range(controls.n_channels):
            rows.append((n + 1, k + 1, controls.amplitudes[n, k],
                         controls.phases[n, k]))
    reporter.write_csv(name, ["segment", "channel", "amplitude_rad_s", "phase_rad"],
                       rows)


# ---------------------------------------------------------------------------
# freeze

def cmd_freeze(args, cfg: dict, reporter: Reporter) -> int:
    section = cfg.get("freeze", {})
    if args.full_scale:
        print("warning: full-scale grid (500 x 1000 x 10000) runs for hours")
        n_w, n_l, n_t = 500, 1000, 10000
    else:
        n_w = int(section.get("omega_points", 50))
        n_l = int(section.get("lambda_points", 5))
        n_t = int(section.get("time_points", 2000))
    omegas = np.linspace(float(section.get("omega_min", 1.0)),
                         float(section.get("omega_max", 25.0)), n_w)
    lambdas = np.linspace(float(section.get("lambda_min", 0.0)),
                          float(section.get("lambda_max", 1.0)), n_l)
    h0 = float(section.get("h0", 5 * np.pi))
    base_cfg = dict(
        omegas=omegas, lambdas=lambdas,
        n_spins=int(section.get("spins", 3)),
        h0=h0, j_coupling=float(section.get("j", h0 / 20)),
        duration=float(section.get("duration", 20 * np.pi)),
        n_time_points=n_t,
        grain_base=int(section.get("base", 100)),
        grain_low=int(section.get("low", -2)),
        grain_high=int(section.get("high", -1)),
        seed=args.seed,
        periodic=bool(section.get("periodic", False)))

    timing_rows = []
    surfaces = {}
    for backend in args.backends:
        try:
            run_cfg = FreezeConfig(backend=backend, **base_cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        surface = sweep(run_cfg, threads=args.threads)
        surfaces[backend] = surface
        cells = surface.q.size
        timing_rows.append((backend, cells, surface.total_seconds,
                            surface.total_seconds / cells,
                            surface.table_build_seconds))
        header = ["omega"] + [f"lambda={lv:.6g}" for lv in lambdas]
        rows = [(omegas[i], *surface.q[i]) for i in range(n_w)]
        reporter.write_csv(f"freeze_q_{backend}.csv", header, rows)

    theory_rows = [(w, q_theory(w, h0)) for w in omegas]
    reporter.write_csv("freeze_theory.csv", ["omega", "q_theory"], theory_rows)
    reporter.write_csv("freeze_timing.csv",
                       ["backend", "cells", "total_seconds", "seconds_per_cell",
                        "table_build_seconds"],
                       timing_rows)
    if len(surfaces) == 2:
        dq = float(np.max(np.abs(surfaces["redo"].q - surfaces["pade"].q)))
        t = {b: surfaces[b].total_seconds for b in surfaces}
        print(f"max |dQ| redo vs pade: {dq:.3e}; speed ratio "
              f"pade/redo = {t['pade'] / t['redo']:.2f}")
    roots = freezing_frequencies(h0, count=2)
    print(f"freezing frequencies from Bessel roots: "
          + ", ".join(f"{w:.3f} rad/s" for w in roots))
    if args.gnuplot:
        backend = args.backends[0]
        reporter.write_text("freeze_q.gp", _GNUPLOT_FREEZE.format(
            csv=f"freeze_q_{backend}.csv"))
    return 0


# ---------------------------------------------------------------------------
# table

def cmd_table(args, cfg: dict, reporter: Reporter, basedir: Path) -> int:
    section = cfg.get("table", {})
    action = args.action
    if action in ("build", "export"):
        # export is build-and-save; there is no in-process table state to
        # export separately
        required = ("base", "low", "high", "omega_max", "dt")
        for key in required:
            if key not in section:
                raise ConfigError(f"[table] needs {key!r} to build")
        try:
            spec = CoarseGrainSpec(
                base=int(section["base"]), low=int(section["low"]),
                high=int(section["high"]), omega_max=float(section["omega_max"]),
                dt=float(section["dt"]), signed=bool(section.get("signed", False)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        generator = _table_generator(section)
        t0 = time.perf_counter()
        table = build_table(spec, generator)
        build_s = time.perf_counter() - t0
        path = Path(args.file) if args.file else \
            (Path(args.out) / section.get("file", "table.npz"))
        path.parent.mkdir(parents=True, exist_ok=True)
        table.save(path)
        print(f"built {table.n_stored} operators (dim {table.dim}) "
              f"in {build_s:.3f} s -> {path}")
        return 0
    if not args.file:
        raise ConfigError(f"table {action} needs --file")
    try:
        table = DiscreteOperatorTable.load(args.file)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such table file: {args.file}") from exc
    except (OSError, KeyError, zipfile.BadZipFile) as exc:
        raise ValueError(f"table file is not readable: {exc}") from exc
    spec = table.spec
    p, _ = cost_model(spec)
    lo = f"+-{spec.omega_max:g}" if spec.signed else f"0..{spec.omega_max:g}"
    print(f"file:       {args.file}")
    print(f"format:     version 1, checksum verified")
    print(f"grid:       base {spec.base}, digits {spec.low}..{spec.high}, "
          f"step {spec.epsilon:g}, range {lo}")
    print(f"dt:         {spec.dt:g} s")
    print(f"operators:  {table.n_stored} stored "
          f"({p} multiplications per propagator), dim {table.dim}")
    return 0


def _table_generator(section: dict) -> np.ndarray:
    kind = section.get("generator", "collective-x")
    if kind == "collective-x":
        if "qubits" not in section:
            raise ConfigError("[table] collective-x generator needs 'qubits'")
        return _collective_x(int(section["qubits"]))
    if kind == "dirac-x":
        if "system" not in section:
            raise ConfigError("[table] dirac-x generator needs a system")
        from .spins import dirac_x_operator

        system = SpinSystem.from_dict(section["system"])
        channel = int(section.get("channel", system.channels[0]))
        return dirac_x_operator(system, channel, float(section["dt"]))
    raise ConfigError(f"unknown generator {kind!r}")


# ---------------------------------------------------------------------------
# gnuplot snippets (optional companions to the CSVs)

_GNUPLOT_TIMING = """\
set datafile separator ','
set logscale y
set xlabel 'qubits'
set ylabel 'seconds per propagator'
plot 'expm_bench_timing.csv' using 2:5 with linespoints title 'median'
"""

_GNUPLOT_FREEZE = """\
set datafile separator ','
set xlabel 'drive frequency (rad/s)'
set ylabel 'noise parameter index'
set view map
splot '{csv}' matrix nonuniform with image
"""


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redo",
        description="discrete-operator propagator benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap for grid sweeps")
        p.add_argument("--backend", choices=["redo", "pade", "both"],
                       default=None)
        p.add_argument("--full-scale", action="store_true",
                       help="full-size grids (very slow)")
        p.add_argument("--gnuplot", action="store_true",
                       help="also write gnuplot scripts")

    for name in ("cost-model", "expm-bench", "grape", "freeze"):
        add_common(sub.add_parser(name))
    table_p = sub.add_parser("table")
    table_p.add_argument("action", choices=["build", "export", "import", "info"])
    table_p.add_argument("--file", help="table artifact path")
    add_common(table_p)
    return parser


def _resolve(args, cfg: dict, basedir: Path):
    """Fold [global] config defaults under the CLI flags."""
    g = cfg.get("global", {})
    args.seed = args.seed if args.seed is not None else int(g.get("seed", 0))
    out = args.out if args.out is not None else g.get("out", "results")
    out_path = Path(out)
    if args.out is None and not out_path.is_absolute():
        out_path = basedir / out_path
    args.out = out_path
    args.threads = args.threads if args.threads is not None \
        else int(g.get("threads", 1))
    if args.threads < 1:
        raise ConfigError("threads must be >= 1")
    if args.backend == "both":
        args.backends = ["redo", "pade"]
    elif args.backend:
        args.backends = [args.backend]
    else:
        backends = g.get("backends", ["redo"])
        if not isinstance(backends, list) or \
                any(b not in ("redo", "pade") for b in backends):
            raise ConfigError("backends must be a list of 'redo'/'pade'")
        args.backends = backends


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, matching the config-error code
        return int(exc.code or 0)
    try:
        cfg, cfg_hash, basedir = load_config(args.config)
        _resolve(args, cfg, basedir)
        reporter = Reporter(args, cfg_hash, argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "cost-model":
            return cmd_cost_model(args, cfg, reporter)
        if args.command == "expm-bench":
            return cmd_expm_bench(args, cfg, reporter)
        if args.command == "grape":
            return cmd_grape(args, cfg, reporter, basedir)
        if args.command == "freeze":
            return cmd_freeze(args, cfg, reporter)
        if args.command == "table":
            return cmd_table(args, cfg, reporter, basedir)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

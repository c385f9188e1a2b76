"""Command-line front end.

    decolab qubit  --n 3 --theta 1.5707963268
    decolab macro  --n 5 --cos-theta 0 --format csv
    decolab curve  --theta 1.0471975512 --n-min 1 --n-max 20 --format csv
    decolab sample --trials 100000 --seed 7
    decolab selftest

Exit codes: 0 success, 2 argument/config error, 1 invariant violation or
I/O failure. ``DECOLAB_SEED`` sets the default for ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import astuple, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .experiments import (
    ConfigError,
    CurvePoint,
    InvariantViolation,
    SampleStats,
    Scenario,
    ScenarioConfig,
    ScenarioReport,
    born_sample,
    curve_point,
    decoherence_curve,
    run_macroscopic_superposition,
    run_qubit_measurement,
)

CSV_HEADER = [f.name for f in fields(CurvePoint)]
SAMPLE_HEADER = ["trials", "count_plus", "frequency_plus", "expected", "z_score"]


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return format(x, ".17g")


def _csv_bytes(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue().encode("utf-8")


def write_csv(points: Sequence[CurvePoint]) -> bytes:
    if not points:
        raise ValueError("write_csv needs at least one point")
    return _csv_bytes(CSV_HEADER, [astuple(p) for p in sorted(points, key=lambda p: p.n)])


def _jnum(x: float):
    # JSON has no infinities; render them as strings
    x = float(x)
    return x if math.isfinite(x) else fmt_float(x)


def _jcomplex(z: complex) -> list:
    z = complex(z)
    return [_jnum(z.real), _jnum(z.imag)]


def config_to_dict(config: ScenarioConfig) -> dict:
    return {
        "scenario": config.scenario.value,
        "n_particles": int(config.n_particles),
        "theta": config.theta,
        "c_plus": _jcomplex(config.c_plus),
        "c_minus": _jcomplex(config.c_minus),
        "n_sweep": None if config.n_sweep is None else list(config.n_sweep),
        "trials": config.trials,
        "seed": config.seed,
    }


def config_from_dict(data: dict) -> ScenarioConfig:
    data = dict(data.get("config_echo", data))
    for key in ("c_plus", "c_minus"):
        if key in data and isinstance(data[key], (list, tuple)):
            re, im = data[key]
            data[key] = complex(float(re), float(im))
    if data.get("n_sweep") is not None:
        data["n_sweep"] = tuple(data["n_sweep"])
    return ScenarioConfig(**data)


def report_to_dict(report: ScenarioReport) -> dict:
    ov = report.overlap
    return {
        "scenario": report.scenario.value,
        "system_labels": list(report.system_labels),
        "pointer_labels": list(report.pointer_labels),
        "rho": [[_jcomplex(z) for z in row] for row in report.rho.entries],
        "purity": _jnum(report.purity),
        "overlap": {
            "value": _jcomplex(ov.overlap),
            "magnitude": _jnum(ov.magnitude),
            "log_magnitude": _jnum(ov.log_magnitude),
            "per_particle_factors": [_jcomplex(f) for f in ov.per_particle_factors],
        },
        "offdiag_magnitude": _jnum(report.offdiag_magnitude),
        "dense_deviation": None if report.dense_deviation is None else _jnum(report.dense_deviation),
        "dense_agrees": report.dense_agrees,
        "fapp_mixed": report.fapp_mixed,
    }


def point_to_dict(p: CurvePoint) -> dict:
    return {k: (v if isinstance(v, int) else _jnum(v)) for k, v in zip(CSV_HEADER, astuple(p))}


def stats_to_dict(s: SampleStats) -> dict:
    return {
        "trials": s.trials,
        "count_plus": s.count_plus,
        "frequency_plus": _jnum(s.frequency_plus),
        "expected": _jnum(s.expected),
        "z_score": _jnum(s.z_score),
        "note": s.note,
    }


def run_command(command: str, config: ScenarioConfig, fmt: str = "json") -> tuple[Any, bytes | None]:
    """Run ``command`` and return (json payload, csv bytes or None)."""
    if command in ("qubit", "macro"):
        runner = run_qubit_measurement if command == "qubit" else run_macroscopic_superposition
        report = runner(config)
        if report.dense_agrees is False:
            raise InvariantViolation(
                f"dense and closed-form reduced states differ by {report.dense_deviation:.3e}"
            )
        if fmt == "csv":
            return None, write_csv([curve_point(config.n_particles, config)])
        return report_to_dict(report), None
    if command == "curve":
        points = decoherence_curve(config)
        if fmt == "csv":
            return None, write_csv(points)
        return {"points": [point_to_dict(p) for p in points]}, None
    if command == "sample":
        stats = born_sample(config)
        if fmt == "csv":
            row = [stats.trials, stats.count_plus, stats.frequency_plus, stats.expected, stats.z_score]
            return None, _csv_bytes(SAMPLE_HEADER, [row])
        return stats_to_dict(stats), None
    raise ValueError(f"unknown command {command!r}")


def envelope_bytes(command: str, config: ScenarioConfig, payload: Any, timestamp: bool = False) -> bytes:
    generated_at = None
    if timestamp:
        generated_at = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    env = {
        "tool_version": __version__,
        "command": command,
        "config_echo": config_to_dict(config),
        "seed": config.seed,
        "generated_at": generated_at,
        "payload": payload,
    }
    return (json.dumps(env, indent=2, allow_nan=False) + "\n").encode("utf-8")


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _env_seed() -> int | None:
    raw = os.environ.get("DECOLAB_SEED")
    if raw is None or raw == "":
        return None
    return _u64(raw)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config or output envelope to re-run")
    common.add_argument("--n", type=int, dest="n_particles", help="number of pointer/environment particles")
    angle = common.add_mutually_exclusive_group()
    angle.add_argument("--theta", type=float, help="branch-conditional rotation angle in radians, 0..pi")
    angle.add_argument("--cos-theta", type=float, help="per-particle overlap cos(theta) instead of --theta")
    common.add_argument("--c-plus", type=_complex_arg, help="amplitude c+ as RE,IM")
    common.add_argument("--c-minus", type=_complex_arg, help="amplitude c- as RE,IM")
    common.add_argument("--seed", type=_u64, help="u64 seed (default $DECOLAB_SEED or 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, help="output path (default stdout)")
    common.add_argument("--timestamp", action="store_true",
                        help="fill generated_at with the current UTC time (breaks byte reproducibility)")

    parser = argparse.ArgumentParser(prog="decolab", description="Decoherence and pointer-state overlap lab")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("qubit", parents=[common], help="qubit measured by an N-particle apparatus")
    sub.add_parser("macro", parents=[common], help="object at x1 + x2 decohered by its environment")
    curve = sub.add_parser("curve", parents=[common], help="overlap, coherence and purity versus N")
    curve.add_argument("--n-min", type=int, help="first N of the sweep (default 1)")
    curve.add_argument("--n-max", type=int, help="last N of the sweep (default 20)")
    sample = sub.add_parser("sample", parents=[common], help="Born-rule outcome sampling")
    sample.add_argument("--trials", type=int)
    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    base: dict[str, Any] = {}
    if args.config is not None:
        try:
            loaded = config_from_dict(json.loads(args.config.read_text()))
        except ConfigError:
            raise
        except (OSError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        base = {f.name: getattr(loaded, f.name) for f in fields(ScenarioConfig)}

    if args.command == "qubit":
        base["scenario"] = Scenario.QUBIT_MEASUREMENT
    elif args.command == "macro":
        base["scenario"] = Scenario.MACROSCOPIC_SUPERPOSITION
    if args.n_particles is not None:
        base["n_particles"] = args.n_particles
    if args.theta is not None:
        base["theta"] = args.theta
    if args.cos_theta is not None:
        if not -1.0 <= args.cos_theta <= 1.0:
            raise ConfigError("--cos-theta must lie in [-1, 1]")
        base["theta"] = math.acos(args.cos_theta)
    if args.c_plus is not None:
        base["c_plus"] = args.c_plus
    if args.c_minus is not None:
        base["c_minus"] = args.c_minus
    if args.seed is not None:
        base["seed"] = args.seed
    elif "seed" not in base:
        env = _env_seed()
        if env is not None:
            base["seed"] = env
    if args.command == "curve":
        explicit = args.n_min is not None or args.n_max is not None
        if explicit or base.get("n_sweep") is None:
            n_min = 1 if args.n_min is None else args.n_min
            n_max = 20 if args.n_max is None else args.n_max
            if n_min < 1 or n_max < n_min:
                raise ConfigError("need 1 <= --n-min <= --n-max")
            base["n_sweep"] = tuple(range(n_min, n_max + 1))
    if args.command == "sample" and args.trials is not None:
        base["trials"] = args.trials
    return ScenarioConfig(**base)


def _emit(data: bytes, out: Path | None):
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        out.write_bytes(data)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "selftest":
        from .checks import run_checks
        return 0 if run_checks(sys.stdout) else 1

    try:
        config = config_from_args(args)
    except (ConfigError, argparse.ArgumentTypeError) as exc:
        print(f"decolab: error: {exc}", file=sys.stderr)
        return 2

    try:
        payload, csv_data = run_command(args.command, config, args.format)
    except ConfigError as exc:
        print(f"decolab: error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"decolab: invariant violation: {exc}", file=sys.stderr)
        return 1

    data = csv_data if csv_data is not None else envelope_bytes(args.command, config, payload, args.timestamp)
    try:
        _emit(data, args.out)
    except OSError as exc:
        print(f"decolab: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0

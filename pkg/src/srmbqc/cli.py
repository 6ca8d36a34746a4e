"""``srmbqc`` command line: run an experiment, write CSV plus a JSON manifest.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import fields
from pathlib import Path

from .exceptions import CapacityError, GeodesicSolverError, ReachabilityError, ValidationError
from .experiments import (
    COMMANDS,
    ConfigError,
    ExperimentConfig,
    manifest,
    parse_sweep,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

_FIELD_TYPES = {
    "sigma": float,
    "budget_n": int,
    "seed": int,
    "output_path": str,
    "generator_set": str,
    "norm": str,
    "theta": float,
    "samples": int,
    "segments": int,
    "starts": int,
    "strategy": str,
    "sweep": parse_sweep,
}
# config-file / flag spellings that differ from the field name
_ALIASES = {"out": "output_path", "generators": "generator_set"}


def _field_name(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_")
    return _ALIASES.get(key, key)


def _coerce(name: str, raw: str):
    try:
        return _FIELD_TYPES[name](raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value {raw!r} for {name}: {exc}") from exc


def read_config_file(path: str | Path) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            key, _, raw = line.partition(":")
            if not raw:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        name = _field_name(key)
        if name not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key.strip()!r}")
        values[name] = _coerce(name, raw.strip())
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srmbqc", description="Noisy MBQC rotation experiments."
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "error-scaling": "split single-generator rotations and measure their error",
        "geodesic-export": "sample a y-rotation geodesic and its Trotterized curve",
        "bound-check": "compile y-rotation geodesics of given length and measure their error",
        "distances": "compare CC, ball-box, Euler and Riemannian distances",
        "lie-hull": "report the Lie hull of a generator set",
    }
    S = argparse.SUPPRESS
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text, argument_default=S)
        p.add_argument("--config", metavar="FILE", help="flat key = value file")
        p.add_argument("--sigma", type=float)
        p.add_argument("--budget-n", dest="budget_n", type=int, metavar="N")
        p.add_argument("--sweep", type=str, metavar="START:STOP:STEP")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", dest="output_path", metavar="PATH",
                       help="CSV destination; the manifest goes to PATH.manifest.json")
        p.add_argument("--norm", choices=("diamond", "trace", "frobenius"))
        p.add_argument("--generators", "--generator-set", dest="generator_set", metavar="SPEC",
                       help="comma separated Pauli strings, e.g. X,Z")
        p.add_argument("--theta", type=float, help="target y-rotation angle")
        p.add_argument("--samples", type=int, help="rows per geodesic-export track")
        p.add_argument("--segments", type=int, help="Trotter segments for geodesic-export")
        p.add_argument("--starts", type=int, help="diamond-norm multistart count")
        p.add_argument("--strategy", choices=("balanced", "fused", "trotter"))
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Built-in defaults, then the config file, then explicit flags."""
    values = {}
    flags = vars(args).copy()
    flags.pop("command", None)
    config_path = flags.pop("config", None)
    if config_path is not None:
        values.update(read_config_file(config_path))
    for name, raw in flags.items():
        values[name] = parse_sweep(raw) if name == "sweep" else raw
    known = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(**{k: v for k, v in values.items() if k in known}).validate()


def write_outputs(result, config: ExperimentConfig, wall: float, stdout, stderr):
    info = manifest(result, config, wall)
    text = json.dumps(info, indent=2, sort_keys=True) + "\n"
    if config.output_path in (None, "-"):
        stdout.write(result.text)
        stderr.write(text)
        return
    out = Path(config.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(result.text)
    manifest_path(out).write_text(text)


def manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        config = resolve_config(args)
        start = time.perf_counter()
        result = COMMANDS[args.command](config)
        wall = time.perf_counter() - start
        write_outputs(result, config, wall, stdout, stderr)
    except GeodesicSolverError as exc:
        stderr.write(f"srmbqc: solver failure: {exc}\n")
        return EXIT_SOLVER
    except (ConfigError, ValidationError, CapacityError, ReachabilityError) as exc:
        stderr.write(f"srmbqc: configuration error: {exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

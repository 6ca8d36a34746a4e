"""Experiment drivers producing the CSV datasets behind the figures.

Every ``cmd_*`` function takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` holding the output text plus manifest metadata.
Nothing here touches the filesystem; see :mod:`srmbqc.cli` for that.
"""
from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .channels import (
    DEFAULT_STARTS,
    ErrorReport,
    NoiseModel,
    error_reports_csv,
    implementation_error,
)
from .curves import (
    RotationSequence,
    TrotterPlan,
    compile_curve,
    split_rotation,
    trotter_discretize,
)
from .exceptions import ValidationError
from .geodesics import (
    Su2GeodesicParams,
    ball_box_fit,
    d_cc_su2,
    d_infty,
    euler_sequence,
    geodesic_samples,
    su2_geodesic_controls,
    su2_geodesic_solve,
)
from .pauli import GeneratorSet, PauliTerm, lie_hull, pauli_rotation

NORMS = ("diamond", "trace", "frobenius")
STRATEGIES = ("balanced", "fused", "trotter")

DEFAULT_SWEEPS = {
    "error-scaling": (-3.0, 3.0, 0.1),
    "bound-check": (0.25, 4.5, 0.25),
    "distances": (0.0, 3.0, 0.1),
}
DEFAULT_GENERATORS = {
    "error-scaling": "X",
    "lie-hull": "X,Z",
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    sigma: float = 0.9
    budget_n: int = 500
    sweep: tuple[float, float, float] | None = None
    seed: int = 0
    output_path: str | None = None
    generator_set: str | None = None
    norm: str = "diamond"
    theta: float = 1.0
    samples: int = 200
    segments: int | None = None
    starts: int = DEFAULT_STARTS
    strategy: str = "balanced"

    def validate(self):
        if not (0 < self.sigma <= 1):
            raise ConfigError(f"sigma must lie in (0, 1], got {self.sigma}")
        if self.budget_n < 1:
            raise ConfigError(f"budget-n must be at least 1, got {self.budget_n}")
        if self.norm not in NORMS:
            raise ConfigError(f"norm must be one of {', '.join(NORMS)}, got {self.norm!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {', '.join(STRATEGIES)}")
        if self.starts < 1:
            raise ConfigError("starts must be positive")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if self.segments is not None and self.segments < 1:
            raise ConfigError("segments must be positive")
        if self.sweep is not None:
            sweep_values(self.sweep)
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d["sweep"] = None if self.sweep is None else list(self.sweep)
        return d


def parse_sweep(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"sweep has a non-numeric field: {text!r}") from exc
    sweep_values((start, stop, step))
    return start, stop, step


def sweep_values(sweep) -> np.ndarray:
    """Grid ``start, start + step, ...`` up to and including ``stop``."""
    start, stop, step = sweep
    if not step > 0:
        raise ConfigError("sweep step must be positive")
    if stop < start:
        raise ConfigError("sweep stop must not be below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


@dataclass
class ExperimentResult:
    command: str
    text: str
    columns: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return list(csv.DictReader(io.StringIO(self.text)))


def _frame(config: ExperimentConfig, command: str) -> GeneratorSet:
    spec = config.generator_set or DEFAULT_GENERATORS.get(command, "X,Z")
    try:
        return GeneratorSet.parse(spec)
    except ValueError as exc:
        raise ConfigError(f"bad generator set {spec!r}: {exc}") from exc


def _require_su2(frame: GeneratorSet, command: str):
    if frame.qubits != 1 or [g.letters for g in frame.generators] != ["X", "Z"]:
        raise ConfigError(f"{command} needs the SU(2) frame X,Z (got {frame})")


def _sweep(config, command):
    return sweep_values(config.sweep or DEFAULT_SWEEPS[command])


_ERROR_COLUMNS = {
    "alpha_or_arclength": "sweep value",
    "epsilon": "implementation_error -> diamond_norm",
    "local_sum": "RotationSequence.local_sum",
    "lemma2_bound": "implementation_error",
    "theorem1_bound": "implementation_error (d_cc_su2)",
    "ratio": "ErrorReport.tightness_ratio",
    "sigma": "config",
    "N": "config budget",
    "seed": "config",
}


def cmd_error_scaling(config: ExperimentConfig) -> ExperimentResult:
    """N-way split rotations about a single generator, swept over the total angle."""
    config.validate()
    frame = _frame(config, "error-scaling")
    if len(frame) != 1:
        raise ConfigError("error-scaling needs exactly one generator")
    if frame.qubits > 3:
        raise ConfigError("error-scaling simulates at most 3 qubits")
    noise = NoiseModel(config.sigma)
    g = frame[0]
    rows = []
    for alpha in _sweep(config, "error-scaling"):
        seq = split_rotation(frame, 0, float(alpha), config.budget_n)
        rep = implementation_error(
            seq, noise, pauli_rotation(g, float(alpha)),
            norm=config.norm, starts=config.starts, seed=config.seed,
        )
        rows.append((float(alpha), rep))
    ratios = [r.tightness_ratio for a, r in rows if r.lemma2_bound > 0]
    extras = {"generator": str(g)}
    if ratios:
        extras["tightness_ratio_mean"] = float(np.mean(ratios))
    return ExperimentResult("error-scaling", error_reports_csv(rows), _ERROR_COLUMNS, extras)


@functools.lru_cache(maxsize=256)
def y_angle_for_arclength(length: float) -> float:
    """Angle ``theta`` with ``d_CC(exp(i theta Y / 2)) = length`` (``theta`` in ``(0, pi]``)."""
    if not length > 0:
        raise ValidationError("arclength must be positive")
    f = lambda th: d_cc_su2(pauli_rotation(PauliTerm("Y"), th)) - length  # noqa: E731
    hi = math.pi
    if f(hi) < 0:
        raise ValidationError(f"arclength {length} exceeds the y-rotation range")
    return brentq(f, 1e-12, hi, xtol=1e-13, rtol=1e-13)


def minimizing_y_geodesic(theta: float) -> Su2GeodesicParams:
    return su2_geodesic_solve(pauli_rotation(PauliTerm("Y"), theta))[0]


def cmd_bound_check(config: ExperimentConfig) -> ExperimentResult:
    """Compile minimizing y-rotation geodesics of given arclength and measure their error."""
    config.validate()
    frame = _frame(config, "bound-check")
    _require_su2(frame, "bound-check")
    noise = NoiseModel(config.sigma)
    rows = []
    for length in _sweep(config, "bound-check"):
        if length <= 0:
            raise ConfigError("bound-check arclengths must be positive")
        theta = y_angle_for_arclength(float(length))
        params = minimizing_y_geodesic(theta)
        target = pauli_rotation(PauliTerm("Y"), theta)
        seq = compile_curve(su2_geodesic_controls(params), config.budget_n, config.strategy, target=target)
        rep = implementation_error(
            seq, noise, target, dcc=params.duration,
            norm=config.norm, starts=config.starts, seed=config.seed, budget=config.budget_n,
        )
        rows.append((params.duration, rep))
    return ExperimentResult(
        "bound-check", error_reports_csv(rows), _ERROR_COLUMNS, {"strategy": config.strategy}
    )


def _sequence_point(seq: RotationSequence, s: float) -> np.ndarray:
    """Point of the piecewise curve of ``seq`` at sequence time ``s`` in ``[0, len]``."""
    U = np.eye(2**seq.frame.qubits, dtype=complex)
    full = min(int(math.floor(s)), len(seq))
    for step in seq.steps[:full]:
        U = U @ pauli_rotation(seq.generator(step), step.angle)
    if full < len(seq):
        step = seq.steps[full]
        U = U @ pauli_rotation(seq.generator(step), (s - full) * step.angle)
    return U


_TRACK_COLUMNS = ["track", "t", "c_x", "c_z"] + [
    f"{part}_{i}{j}" for i in range(2) for j in range(2) for part in ("re", "im")
]


def _matrix_cells(C) -> list[str]:
    out = []
    for i in range(2):
        for j in range(2):
            out += [repr(float(C[i, j].real)), repr(float(C[i, j].imag))]
    return out


def cmd_geodesic_export(config: ExperimentConfig, target_angle: float | None = None) -> ExperimentResult:
    """Sampled minimizing geodesic for ``exp(i theta Y/2)`` and its Trotterized twin."""
    config.validate()
    theta = config.theta if target_angle is None else target_angle
    if theta == 0:
        raise ConfigError("theta must be nonzero (the identity needs no curve)")
    frame = _frame(config, "geodesic-export")
    _require_su2(frame, "geodesic-export")
    params = minimizing_y_geodesic(theta)
    curve = su2_geodesic_controls(params)
    if config.segments is not None:
        plan = TrotterPlan(config.segments, curve.duration, len(frame))
    else:
        plan = TrotterPlan.from_budget(config.budget_n, curve)
    seq = trotter_discretize(curve, plan)
    T, K = params.duration, len(seq)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_TRACK_COLUMNS)
    for row in geodesic_samples(params, config.samples):
        w.writerow(["geodesic", repr(row["t"]), repr(row["c_x"]), repr(row["c_z"])] + _matrix_cells(row["C"]))
    for t in np.linspace(0.0, T, config.samples):
        s = float(t) * K / T
        idx = min(max(math.ceil(s) - 1, 0), K - 1)
        step = seq.steps[idx]
        c = [0.0, 0.0]
        # rescale sequence time to geodesic time
        c[step.generator_index] = step.angle * K / T
        w.writerow(["trotter", repr(float(t)), repr(c[0]), repr(c[1])] + _matrix_cells(_sequence_point(seq, s)))
    columns = {
        "track": "geodesic | trotter",
        "t": "geodesic time",
        "c_x, c_z": "su2_geodesic_controls / trotter_discretize",
        "re_ij, im_ij": "closed-form C(t) / rotation-sequence curve",
    }
    extras = {
        "theta": theta,
        "phi0": params.phi0,
        "beta": params.beta,
        "duration": params.duration,
        "segments": plan.segment_count,
        "rotations": K,
    }
    return ExperimentResult("geodesic-export", buf.getvalue(), columns, extras)


def cmd_distances(config: ExperimentConfig) -> ExperimentResult:
    """CC distance of y-rotations against ball-box, Euler and Riemannian lengths."""
    config.validate()
    frame = _frame(config, "distances")
    _require_su2(frame, "distances")
    hull = lie_hull(frame)
    Y = PauliTerm("Y")
    thetas = _sweep(config, "distances")
    data = []
    for th in thetas:
        U = pauli_rotation(Y, float(th))
        if th == 0:
            data.append((0.0, U, 0.0, 0.0, 0.0, 0.0))
            continue
        dcc = d_cc_su2(U)
        dinf = d_infty(U, hull)
        eu = euler_sequence(Y, float(th), hull)
        data.append((float(th), U, dcc, dinf, eu.costed_length, eu.free_clifford_length))
    fit_idx = [k for k, row in enumerate(data) if row[3] > 0]
    consts = ball_box_fit(
        [data[k][1] for k in fit_idx], hull, [data[k][2] for k in fit_idx], min_samples=1
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "d_cc", "c1_d_inf", "c2_d_inf", "d_inf", "euler_costed", "euler_free", "riemannian"])
    for th, _, dcc, dinf, costed, free in data:
        w.writerow([
            repr(th), repr(dcc), repr(consts.c_lower * dinf), repr(consts.c_upper * dinf),
            repr(dinf), repr(costed), repr(free), repr(abs(th)),
        ])
    columns = {
        "theta": "sweep value",
        "d_cc": "d_cc_su2",
        "c1_d_inf": "ball_box_fit.c_lower * d_infty",
        "c2_d_inf": "ball_box_fit.c_upper * d_infty",
        "d_inf": "d_infty",
        "euler_costed": "euler_sequence.costed_length",
        "euler_free": "euler_sequence.free_clifford_length",
        "riemannian": "|theta|",
    }
    extras = {"c_lower": consts.c_lower, "c_upper": consts.c_upper, "fit_samples": consts.sample_count}
    return ExperimentResult("distances", buf.getvalue(), columns, extras)


def cmd_lie_hull(config: ExperimentConfig) -> ExperimentResult:
    """Text report of the Lie hull of the configured generators."""
    frame = _frame(config, "lie-hull")
    hull = lie_hull(frame)
    lines = [f"generators: {frame}", f"qubits: {frame.qubits}"]
    for b in hull.basis:
        lines.append(f"  {b.pauli.letters}  degree {b.degree}")
    full = 4**frame.qubits - 1
    lines.append(f"dimension: {hull.dimension} of {full}")
    if hull.bracket_generating:
        lines.append("bracket-generating: yes")
    else:
        lines.append("bracket-generating: no (generates a proper Lie subalgebra)")
    extras = {
        "dimension": hull.dimension,
        "bracket_generating": hull.bracket_generating,
        "degrees": {b.pauli.letters: b.degree for b in hull.basis},
    }
    return ExperimentResult("lie-hull", "\n".join(lines) + "\n", {"report": "lie_hull"}, extras)


COMMANDS = {
    "error-scaling": cmd_error_scaling,
    "geodesic-export": cmd_geodesic_export,
    "bound-check": cmd_bound_check,
    "distances": cmd_distances,
    "lie-hull": cmd_lie_hull,
}


def manifest(result: ExperimentResult, config: ExperimentConfig, wall_clock: float) -> dict:
    return {
        "command": result.command,
        "version": __version__,
        "config": config.echo(),
        "wall_clock_seconds": wall_clock,
        "columns": result.columns,
        "results": result.extras,
    }

"""Horizontal curves, rotation sequences and their Trotter discretisation.

A control curve ``c(t)`` over a frame ``{P_1, ..., P_m}`` generates
``dC/dt = C(t) * sum_g c_g(t) * (i P_g / 2)``.  A rotation sequence
``[(g_1, a_1), ..., (g_N, a_N)]`` has endpoint
``exp(i a_1 P_1 / 2) ... exp(i a_N P_N / 2)`` (ordered left to right).
"""
from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .exceptions import ValidationError
from .pauli import GeneratorSet, PauliTerm, matrix_rep, pauli_rotation

QUAD_ATOL = 1e-9


@dataclass(frozen=True)
class ControlCurve:
    """Controls ``t -> (c_1(t), ..., c_m(t))`` on ``[0, duration]``.

    ``breakpoints`` lists interior times where the controls may jump;
    quadrature and product integration never straddle them.
    """

    frame: GeneratorSet
    duration: float
    coefficients: Callable[[float], Sequence[float]]
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValidationError("curve duration must be positive and finite")
        bps = tuple(sorted(float(b) for b in self.breakpoints if 0 < b < self.duration))
        object.__setattr__(self, "breakpoints", bps)

    def controls(self, t: float) -> np.ndarray:
        c = np.asarray(self.coefficients(t), dtype=float)
        if c.shape != (len(self.frame),):
            raise ValidationError(f"controls must have length {len(self.frame)}")
        if not np.all(np.isfinite(c)):
            raise ValidationError(f"non-finite control value at t={t}")
        return c

    def tangent(self, t: float) -> np.ndarray:
        """Lie-algebra element ``sum_g c_g(t) * i P_g / 2``."""
        c = self.controls(t)
        return 1j * sum(ci * m for ci, m in zip(c, self.frame.matrices()))

    def pieces(self, t0: float = 0.0, t1: float | None = None) -> list[tuple[float, float]]:
        t1 = self.duration if t1 is None else t1
        edges = [t0] + [b for b in self.breakpoints if t0 < b < t1] + [t1]
        return list(zip(edges[:-1], edges[1:]))


def _integrate(curve: ControlCurve, f) -> float:
    total = 0.0
    for a, b in curve.pieces():
        val, _ = integrate.quad(f, a, b, epsabs=QUAD_ATOL / 10, epsrel=1e-12, limit=200)
        total += val
    return total


def arclength(curve: ControlCurve) -> float:
    """Sub-Riemannian length ``int |c(t)| dt``."""
    return _integrate(curve, lambda t: float(np.linalg.norm(curve.controls(t))))


def energy(curve: ControlCurve) -> float:
    """Energy ``int |c(t)|^2 dt``; ``energy * duration >= arclength**2``."""
    return _integrate(curve, lambda t: float(np.sum(curve.controls(t) ** 2)))


@dataclass(frozen=True)
class RotationStep:
    generator_index: int
    angle: float


@dataclass(frozen=True)
class RotationSequence:
    frame: GeneratorSet
    steps: tuple[RotationStep, ...] = ()

    def __post_init__(self):
        steps = tuple(s if isinstance(s, RotationStep) else RotationStep(*s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        for s in steps:
            if not 0 <= s.generator_index < len(self.frame):
                raise ValidationError(f"generator index {s.generator_index} out of range")
            if not math.isfinite(s.angle):
                raise ValidationError("rotation angle must be finite")

    def __len__(self):
        return len(self.steps)

    @property
    def angles(self) -> np.ndarray:
        return np.array([s.angle for s in self.steps], dtype=float)

    def local_sum(self) -> float:
        """``sum_i alpha_i**2``, the quantity the local error bounds add up."""
        return float(np.sum(self.angles**2))

    def generator(self, step: RotationStep) -> PauliTerm:
        return self.frame[step.generator_index]

    def inverse(self) -> "RotationSequence":
        return RotationSequence(
            self.frame, tuple(RotationStep(s.generator_index, -s.angle) for s in reversed(self.steps))
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "generator", "angle_radians"])
        for i, s in enumerate(self.steps):
            w.writerow([i, str(self.generator(s)), repr(float(s.angle))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, frame: GeneratorSet) -> "RotationSequence":
        rows = list(csv.DictReader(io.StringIO(text)))
        steps = [
            RotationStep(frame.index(PauliTerm.parse(r["generator"])), float(r["angle_radians"]))
            for r in sorted(rows, key=lambda r: int(r["index"]))
        ]
        return cls(frame, tuple(steps))


def endpoint(seq: RotationSequence) -> np.ndarray:
    d = 2**seq.frame.qubits
    U = np.eye(d, dtype=complex)
    for s in seq.steps:
        U = U @ pauli_rotation(seq.generator(s), s.angle)
    return U


def sequence_to_curve(seq: RotationSequence) -> ControlCurve:
    """Piecewise-constant curve with control ``alpha_i e_{g_i}`` on ``(i-1, i]``."""
    if not seq.steps:
        raise ValidationError("empty rotation sequence has no curve")
    m = len(seq.frame)
    n = len(seq.steps)
    table = np.zeros((n, m))
    for i, s in enumerate(seq.steps):
        table[i, s.generator_index] = s.angle

    def coefficients(t):
        i = min(max(math.ceil(t) - 1, 0), n - 1)
        return table[i]

    return ControlCurve(seq.frame, float(n), coefficients, tuple(float(i) for i in range(1, n)))


def time_ordered_exponential(
    curve: ControlCurve, resolution: int = 1000, t0: float = 0.0, t1: float | None = None
) -> np.ndarray:
    """Midpoint product integration of ``dC/dt = C c(t)`` from ``t0`` to ``t1``.

    ``resolution`` is the number of midpoint steps over the full duration;
    pieces between breakpoints each get at least one step.
    """
    if resolution < 1:
        raise ValidationError("resolution must be positive")
    t1 = curve.duration if t1 is None else t1
    mats = np.array(curve.frame.matrices())
    d = mats.shape[1]
    U = np.eye(d, dtype=complex)
    for a, b in curve.pieces(t0, t1):
        k = max(1, math.ceil(resolution * (b - a) / curve.duration))
        h = (b - a) / k
        mids = a + h * (np.arange(k) + 0.5)
        cs = np.array([curve.controls(t) for t in mids])
        Hs = h * np.einsum("km,mij->kij", cs, mats)
        w, V = np.linalg.eigh(Hs)
        Es = np.einsum("kij,kj,klj->kil", V, np.exp(1j * w), V.conj())
        for E in Es:
            U = U @ E
    return U


@dataclass(frozen=True)
class TrotterPlan:
    segment_count: int
    duration: float
    generators_per_step: int

    def __post_init__(self):
        if self.segment_count < 1:
            raise ValidationError("need at least one Trotter segment")
        if not self.duration > 0:
            raise ValidationError("Trotter plan needs a positive duration")

    @property
    def step_width(self) -> float:
        return self.duration / self.segment_count

    @property
    def rotations_per_segment(self) -> int:
        return 2 * self.generators_per_step - 1

    @property
    def max_rotations(self) -> int:
        return self.segment_count * self.rotations_per_segment

    @classmethod
    def from_budget(cls, budget: int, curve: ControlCurve) -> "TrotterPlan":
        """``M = floor(N / (2m - 1))`` segments for a budget of ``N`` rotations."""
        m = len(curve.frame)
        M = budget // (2 * m - 1)
        if M < 1:
            raise ValidationError(f"budget {budget} is smaller than one segment ({2 * m - 1})")
        return cls(M, curve.duration, m)


def trotter_discretize(curve: ControlCurve, plan: TrotterPlan) -> RotationSequence:
    """Symmetric first-order Lie-Trotter-Suzuki rotation program.

    Each segment ``[t, t + D]`` evaluates the controls once at its midpoint
    and emits ``g_1 ... g_{m-1}`` at half angle ``c_i D / 2``, ``g_m`` at
    full angle ``c_m D`` (the two middle half-steps merged), then
    ``g_{m-1} ... g_1`` again at half angle.  Zero-angle steps are skipped.
    """
    if abs(plan.duration - curve.duration) > 1e-12 * max(1.0, curve.duration):
        raise ValidationError("Trotter plan duration does not match the curve")
    m = len(curve.frame)
    if plan.generators_per_step != m:
        raise ValidationError("Trotter plan built for a different frame size")
    D = plan.step_width
    order = list(range(m - 1)) + [m - 1] + list(range(m - 2, -1, -1))
    steps = []
    for k in range(plan.segment_count):
        c = curve.controls((k + 0.5) * D)
        for i in order:
            angle = c[i] * D if i == m - 1 else c[i] * D / 2
            if angle != 0.0:
                steps.append(RotationStep(i, float(angle)))
    return RotationSequence(curve.frame, tuple(steps))


def fuse_adjacent(seq: RotationSequence) -> RotationSequence:
    """Merge consecutive rotations about the same generator (exact rewrite)."""
    steps: list[RotationStep] = []
    for s in seq.steps:
        if steps and steps[-1].generator_index == s.generator_index:
            steps[-1] = RotationStep(s.generator_index, steps[-1].angle + s.angle)
        else:
            steps.append(s)
    return RotationSequence(seq.frame, tuple(s for s in steps if s.angle != 0.0))


def rebalance(seq: RotationSequence, budget: int) -> RotationSequence:
    """Split rotations into equal pieces to minimise ``sum alpha**2`` within ``budget`` steps.

    Splitting ``a`` into ``n`` equal commuting pieces leaves the endpoint
    unchanged and costs ``a**2 / n``; extra pieces go greedily to the largest
    marginal gain ``a**2 / (n (n + 1))``, ties broken by step index.
    """
    k = len(seq.steps)
    if k > budget:
        raise ValidationError(f"sequence has {k} steps, more than the budget {budget}")
    counts = [1] * k
    heap = [(-(s.angle**2) / 2, i) for i, s in enumerate(seq.steps)]
    heapq.heapify(heap)
    for _ in range(budget - k):
        if not heap:
            break
        _, i = heapq.heappop(heap)
        counts[i] += 1
        n = counts[i]
        heapq.heappush(heap, (-(seq.steps[i].angle ** 2) / (n * (n + 1)), i))
    steps = []
    for s, n in zip(seq.steps, counts):
        steps.extend([RotationStep(s.generator_index, s.angle / n)] * n)
    return RotationSequence(seq.frame, tuple(steps))


def correct_endpoint(
    seq: RotationSequence, target: np.ndarray, tol: float = 1e-13, max_iter: int = 20
) -> RotationSequence:
    """Nudge all angles so the endpoint equals ``target`` exactly.

    Gauss-Newton with minimum-norm steps on ``endpoint(alpha) - target``:
    among all angle updates that cancel the linearised residual, each step
    takes the one of least Euclidean size, so a program that is already
    close (a Trotterised curve, say) changes by ``O(residual / sqrt(N))``
    per angle.  Generators and ordering are untouched.
    """
    target = np.asarray(target, dtype=complex)
    if not seq.steps:
        raise ValidationError("cannot correct an empty rotation sequence")
    gens = [seq.generator(s) for s in seq.steps]
    mats = [matrix_rep(g) for g in gens]
    d = target.shape[0]
    angles = seq.angles.copy()
    for _ in range(max_iter):
        rots = [pauli_rotation(g, a) for g, a in zip(gens, angles)]
        # prefix[k] = U_1 ... U_k, suffix[k] = U_{k+1} ... U_N
        prefix = [np.eye(d, dtype=complex)]
        for R in rots:
            prefix.append(prefix[-1] @ R)
        suffix = [np.eye(d, dtype=complex)]
        for R in reversed(rots):
            suffix.append(R @ suffix[-1])
        suffix.reverse()
        residual = prefix[-1] - target
        if np.linalg.norm(residual) <= tol:
            break
        cols = [(prefix[k + 1] @ (0.5j * mats[k]) @ suffix[k + 1]).ravel() for k in range(len(rots))]
        J = np.array(cols).T
        J_real = np.vstack([J.real, J.imag])
        r_real = np.concatenate([residual.ravel().real, residual.ravel().imag])
        step, *_ = np.linalg.lstsq(J_real, -r_real, rcond=None)
        angles = angles + step
    else:
        raise ValidationError("endpoint correction did not converge; target unreachable from this program")
    steps = tuple(RotationStep(s.generator_index, float(a)) for s, a in zip(seq.steps, angles))
    return RotationSequence(seq.frame, steps)


def compile_curve(
    curve: ControlCurve, budget: int, strategy: str = "balanced", target: np.ndarray | None = None
) -> RotationSequence:
    """Compile a horizontal curve into at most ``budget`` rotations.

    ``"trotter"`` is the plain segment-by-segment product formula with
    ``M = floor(N / (2m - 1))``; ``"fused"`` additionally merges the
    same-generator rotations that meet at segment boundaries; ``"balanced"``
    then spends the remaining budget splitting the largest rotations.  All
    three share the same endpoint.  When ``target`` is given the result is
    finally passed through :func:`correct_endpoint`, removing the product
    formula's approximation error.
    """
    plan = TrotterPlan.from_budget(budget, curve)
    seq = trotter_discretize(curve, plan)
    if strategy == "fused":
        seq = fuse_adjacent(seq)
    elif strategy == "balanced":
        seq = rebalance(fuse_adjacent(seq), budget)
    elif strategy != "trotter":
        raise ValidationError(f"unknown compile strategy {strategy!r}")
    return seq if target is None else correct_endpoint(seq, target)


def split_rotation(frame: GeneratorSet, generator, angle: float, n: int) -> RotationSequence:
    """``n``-way split of a single rotation into equal angles ``angle / n``."""
    if n < 1:
        raise ValidationError("split count must be positive")
    gi = generator if isinstance(generator, int) else frame.index(generator)
    return RotationSequence(frame, tuple(RotationStep(gi, angle / n) for _ in range(n)))

"""Superoperators of the noisy rotation model and diamond-norm error measurement.

Vectorisation is column stacking throughout: ``vec(rho)[r + d*c] = rho[r, c]``,
so the conjugation ``rho -> U rho U^+`` has matrix ``conj(U) (x) U`` and
composition of maps is matrix multiplication.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .curves import RotationSequence
from .exceptions import CapacityError, ValidationError
from .pauli import PauliTerm, pauli_rotation

MAX_DIAMOND_DIM = 8
DEFAULT_STARTS = 32


@dataclass(frozen=True)
class NoiseModel:
    """Uniform computational order parameter ``sigma`` in ``(0, 1]``."""

    sigma: float

    def __post_init__(self):
        if not (0 < self.sigma <= 1):
            raise ValidationError(f"sigma must lie in (0, 1], got {self.sigma}")

    @property
    def prefactor(self) -> float:
        """``1/sigma**2 - 1``."""
        return 1.0 / self.sigma**2 - 1.0


@dataclass(frozen=True, eq=False)
class SuperOp:
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim**2, self.dim**2):
            raise ValidationError(f"superoperator matrix must be {self.dim**2}x{self.dim**2}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dim: int) -> "SuperOp":
        return cls(dim, np.eye(dim * dim, dtype=complex))

    def __matmul__(self, other: "SuperOp") -> "SuperOp":
        """``(A @ B)(rho) = A(B(rho))``."""
        if other.dim != self.dim:
            raise ValidationError("superoperator dimensions differ")
        return SuperOp(self.dim, self.matrix @ other.matrix)

    def __sub__(self, other: "SuperOp") -> "SuperOp":
        return SuperOp(self.dim, self.matrix - other.matrix)

    def __add__(self, other: "SuperOp") -> "SuperOp":
        return SuperOp(self.dim, self.matrix + other.matrix)

    def __rmul__(self, scalar) -> "SuperOp":
        return SuperOp(self.dim, scalar * self.matrix)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        v = np.asarray(rho, dtype=complex).reshape(-1, order="F")
        return (self.matrix @ v).reshape(d, d, order="F")

    def adjoint(self) -> "SuperOp":
        """Hilbert-Schmidt adjoint map."""
        return SuperOp(self.dim, self.matrix.conj().T)


def unitary_superop(U: np.ndarray) -> SuperOp:
    U = np.asarray(U, dtype=complex)
    d = U.shape[0]
    if U.shape != (d, d) or np.max(np.abs(U.conj().T @ U - np.eye(d))) > 1e-10:
        raise ValidationError("conjugation requires a unitary matrix")
    return SuperOp(d, np.kron(U.conj(), U))


def noisy_rotation_channel(generator: PauliTerm, angle: float, noise: NoiseModel) -> SuperOp:
    """Logical channel of one measured site targeting ``exp(i angle P / 2)``.

    The measurement angle is boosted to ``beta = angle / sigma`` and the
    site realises ``(1+sigma)/2 [U(beta)] + (1-sigma)/2 [U(-beta)]``.
    """
    if not isinstance(noise, NoiseModel):
        noise = NoiseModel(float(noise))
    if not math.isfinite(angle):
        raise ValidationError("rotation angle must be finite")
    beta = angle / noise.sigma
    plus = unitary_superop(pauli_rotation(generator, beta))
    minus = unitary_superop(pauli_rotation(generator, -beta))
    s = noise.sigma
    return SuperOp(plus.dim, (1 + s) / 2 * plus.matrix + (1 - s) / 2 * minus.matrix)


def sequence_channel(seq: RotationSequence, noise: NoiseModel) -> SuperOp:
    """``C_1 o C_2 o ... o C_N``, matching the endpoint order ``U_1 U_2 ... U_N``."""
    d = 2**seq.frame.qubits
    cache = {}
    total = np.eye(d * d, dtype=complex)
    for s in seq.steps:
        key = (s.generator_index, s.angle)
        if key not in cache:
            cache[key] = noisy_rotation_channel(seq.generator(s), s.angle, noise).matrix
        total = total @ cache[key]
    return SuperOp(d, total)


def choi_matrix(op: SuperOp) -> np.ndarray:
    """``J = sum_ij |i><j| (x) op(|i><j|)``; the identity channel gives ``|Omega><Omega|``."""
    d = op.dim
    # T[s', s, j, i] = matrix[s + d s', i + d j]
    T = op.matrix.reshape(d, d, d, d)
    return T.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def is_cptp(op: SuperOp, psd_tol: float = 1e-10, tp_tol: float = 1e-9) -> bool:
    J = choi_matrix(op)
    if np.max(np.abs(J - J.conj().T)) > tp_tol:
        return False
    if np.min(np.linalg.eigvalsh((J + J.conj().T) / 2)) < -psd_tol:
        return False
    d = op.dim
    # partial trace over the output factor
    reduced = np.einsum("isjs->ij", J.reshape(d, d, d, d))
    return bool(np.max(np.abs(reduced - np.eye(d))) <= tp_tol)


def _apply_on_system(T: np.ndarray, W: np.ndarray, d: int, k: int) -> np.ndarray:
    """Apply the map with reshaped matrix ``T`` to the first factor of ``W`` on ``C^d (x) C^k``."""
    W4 = W.reshape(d, k, d, k)
    out = np.einsum("tsqr,raqb->satb", T, W4)
    return out.reshape(d * k, d * k)


def _ascent(T, Tadj, psi, d, k, max_iter=500, tol=1e-15):
    value = -1.0
    for _ in range(max_iter):
        rho = np.outer(psi, psi.conj())
        out = _apply_on_system(T, rho, d, k)
        out = (out + out.conj().T) / 2
        w, V = np.linalg.eigh(out)
        new_value = float(np.sum(np.abs(w)))
        if new_value - value <= tol * max(1.0, new_value):
            return max(new_value, value)
        value = new_value
        # best response: W = sign(out), then psi = top eigenvector of adj(W)
        W = (V * np.sign(w)) @ V.conj().T
        M = _apply_on_system(Tadj, W, d, k)
        M = (M + M.conj().T) / 2
        _, VV = np.linalg.eigh(M)
        psi = VV[:, -1]
    return value


def _max_output_trace_norm(delta: SuperOp, ancilla_dim: int, starts: int, seed: int) -> float:
    d = delta.dim
    if d > MAX_DIAMOND_DIM:
        raise CapacityError(f"diamond norm limited to dimension {MAX_DIAMOND_DIM}")
    J = choi_matrix(delta)
    if np.max(np.abs(J - J.conj().T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(J))):
        raise ValidationError("map is not Hermiticity preserving")
    if not np.any(delta.matrix):
        return 0.0
    T = delta.matrix.reshape(d, d, d, d)
    Tadj = delta.matrix.conj().T.reshape(d, d, d, d)
    k = ancilla_dim
    rng = np.random.default_rng(seed)
    best = 0.0
    for n in range(starts):
        if n == 0 and k == d:
            psi = np.eye(d).reshape(-1) / math.sqrt(d)
        else:
            psi = rng.normal(size=d * k) + 1j * rng.normal(size=d * k)
            psi /= np.linalg.norm(psi)
        best = max(best, _ascent(T, Tadj, psi.astype(complex), d, k))
    return best


def diamond_norm(delta: SuperOp, starts: int = DEFAULT_STARTS, seed: int = 0) -> float:
    """``max_psi || (delta (x) id)(|psi><psi|) ||_1`` over pure states on ``C^d (x) C^d``.

    Each start (the maximally entangled state, then random points on the
    unit sphere) is improved by alternating best responses: the optimal
    sign operator for the current output, then the top eigenvector of the
    adjoint map applied to it.  Each step never decreases the objective.
    """
    return _max_output_trace_norm(delta, delta.dim, starts, seed)


def induced_trace_norm(delta: SuperOp, starts: int = DEFAULT_STARTS, seed: int = 0) -> float:
    """Same maximisation without the ancilla; a lower bound on the diamond norm."""
    return _max_output_trace_norm(delta, 1, starts, seed)


def channel_distance(delta: SuperOp, norm: str = "diamond", starts: int = DEFAULT_STARTS, seed: int = 0) -> float:
    if norm == "diamond":
        return diamond_norm(delta, starts, seed)
    if norm == "trace":
        return induced_trace_norm(delta, starts, seed)
    if norm == "frobenius":
        return float(np.linalg.norm(delta.matrix))
    raise ValidationError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class ErrorReport:
    epsilon: float
    local_sum: float
    lemma2_bound: float
    theorem1_bound: float | None
    step_count: int
    sigma: float
    seed: int = 0

    @property
    def tightness_ratio(self) -> float:
        return self.epsilon / self.lemma2_bound if self.lemma2_bound > 0 else 0.0

    CSV_COLUMNS = (
        "alpha_or_arclength", "epsilon", "local_sum", "lemma2_bound",
        "theorem1_bound", "ratio", "sigma", "N", "seed",
    )

    def csv_row(self, x: float) -> list[str]:
        t1 = "" if self.theorem1_bound is None else repr(float(self.theorem1_bound))
        return [
            repr(float(x)), repr(self.epsilon), repr(self.local_sum), repr(self.lemma2_bound),
            t1, repr(self.tightness_ratio), repr(self.sigma), str(self.step_count), str(self.seed),
        ]

    @staticmethod
    def parse_row(row: dict) -> dict:
        out = {}
        for key in ErrorReport.CSV_COLUMNS:
            v = row[key]
            if key in ("N", "seed"):
                out[key] = int(v)
            else:
                out[key] = float(v) if v != "" else None
        return out


def error_reports_csv(rows: list[tuple[float, ErrorReport]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ErrorReport.CSV_COLUMNS)
    for x, rep in rows:
        w.writerow(rep.csv_row(x))
    return buf.getvalue()


def implementation_error(
    seq: RotationSequence,
    noise: NoiseModel,
    target: np.ndarray,
    dcc: float | None = None,
    *,
    norm: str = "diamond",
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    budget: int | None = None,
) -> ErrorReport:
    """Measured error of running ``seq`` on a noisy resource against ``[target]``.

    ``lemma2_bound = (1/sigma^2 - 1) sum alpha_i^2``; when the CC distance
    of the target is supplied, ``theorem1_bound = (1/N)(1/sigma^2 - 1) dcc^2``
    with ``N`` the site budget (default: the number of rotations in ``seq``).
    """
    if not isinstance(noise, NoiseModel):
        noise = NoiseModel(float(noise))
    d = 2**seq.frame.qubits
    if d > MAX_DIAMOND_DIM:
        raise CapacityError(f"error measurement limited to dimension {MAX_DIAMOND_DIM}")
    delta = sequence_channel(seq, noise) - unitary_superop(target)
    eps = channel_distance(delta, norm, starts, seed)
    local = seq.local_sum()
    n = len(seq) if budget is None else int(budget)
    if n < len(seq):
        raise ValidationError(f"sequence of {len(seq)} rotations exceeds the budget {n}")
    t1 = None
    if dcc is not None and n > 0:
        t1 = noise.prefactor * dcc**2 / n
    return ErrorReport(eps, local, noise.prefactor * local, t1, n, noise.sigma, seed)

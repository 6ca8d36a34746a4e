"""Shared oracles and helpers for the test suite.

Everything here is deliberately independent of the package internals:
dense Kronecker products, a Taylor-series matrix exponential and a direct
conjugation, so tests compare the library against separate arithmetic.
"""
import math
from functools import reduce

import numpy as np
import pytest

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

ACCEPTANCE_RESULTS = {}


def dense_pauli(letters: str, phase_power: int = 0) -> np.ndarray:
    return (1j**phase_power) * reduce(np.kron, [SINGLE[c] for c in letters])


def expm_series(A: np.ndarray, terms: int = 30) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential, independent of scipy."""
    norm = np.linalg.norm(A, 1)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    B = A / 2**s
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_su2(rng: np.random.Generator) -> np.ndarray:
    U = random_unitary(rng, 2)
    return U / np.sqrt(np.linalg.det(U))


def random_density(rng: np.random.Generator, d: int) -> np.ndarray:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def unitary_pair_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Analytic ``|| [U] - [V] ||_diamond = 2 sqrt(1 - nu^2)`` for qubits.

    ``nu`` is the distance from 0 to the chord joining the two eigenvalues
    of ``U^+ V``; for angular separation ``delta`` that is ``cos(delta/2)``.
    """
    w = np.linalg.eigvals(U.conj().T @ V)
    delta = abs(np.angle(w[0] / w[1]))
    nu = math.cos(delta / 2)
    return 2 * math.sqrt(max(0.0, 1 - nu * nu))


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

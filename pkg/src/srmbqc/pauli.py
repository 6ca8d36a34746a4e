"""Exact n-qubit Pauli arithmetic, Lie hulls of generator sets and dense matrices.

Phases are stored as an integer ``k`` standing for ``i**k`` so products stay
bit-exact.  Generators are realised in matrix form as half-Paulis ``P/2``:
a rotation by angle ``a`` about ``P`` is ``exp(i a P / 2)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .exceptions import CapacityError, DimensionError, ValidationError

MAX_DENSE_QUBITS = 6

_LETTERS = "IXYZ"

# (a, b) -> (phase power, letter) with a*b = i**k * letter
_SINGLE_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

_SINGLE_MATRIX = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASE_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PREFIX_PHASE = {"+": 0, "+i": 1, "-": 2, "-i": 3, "i": 1, "": 0}


@dataclass(frozen=True, order=True)
class PauliTerm:
    """``i**phase_power`` times a tensor product of single-qubit Paulis."""

    letters: str
    phase_power: int = 0

    def __post_init__(self):
        if not self.letters or any(c not in _LETTERS for c in self.letters):
            raise ValidationError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase_power", int(self.phase_power) % 4)

    @classmethod
    def parse(cls, text: str) -> "PauliTerm":
        """Parse text such as ``"+XZI"``, ``"-iYY"`` or ``"XZ"``."""
        text = text.strip()
        i = 0
        while i < len(text) and text[i] not in _LETTERS:
            i += 1
        prefix, letters = text[:i], text[i:]
        if prefix not in _PREFIX_PHASE:
            raise ValidationError(f"invalid phase prefix {prefix!r} in {text!r}")
        return cls(letters, _PREFIX_PHASE[prefix])

    def __str__(self):
        return _PHASE_PREFIX[self.phase_power] + self.letters

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_hermitian(self) -> bool:
        return self.phase_power in (0, 2)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def unsigned(self) -> "PauliTerm":
        return PauliTerm(self.letters, 0)

    def __neg__(self):
        return PauliTerm(self.letters, self.phase_power + 2)

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        return pauli_product(self, other)

    def commutes_with(self, other: "PauliTerm") -> bool:
        _check_lengths(self, other)
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0

    def to_matrix(self) -> np.ndarray:
        return matrix_rep(self)


def _check_lengths(a: PauliTerm, b: PauliTerm):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def pauli_product(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Exact product ``a*b``."""
    _check_lengths(a, b)
    k = a.phase_power + b.phase_power
    out = []
    for x, y in zip(a.letters, b.letters):
        dk, letter = _SINGLE_PRODUCT[(x, y)]
        k += dk
        out.append(letter)
    return PauliTerm("".join(out), k)


def commutator(a: PauliTerm, b: PauliTerm):
    """Commutator ``[a, b]`` as ``(coefficient, hermitian_term)``, or None.

    Hermitian Pauli terms either commute or anticommute, so a nonzero
    commutator is ``2ab``.  The phase of ``2ab`` is moved into the complex
    coefficient and the returned term carries phase ``+1``.
    """
    _check_lengths(a, b)
    if not (a.is_hermitian and b.is_hermitian):
        raise ValidationError("commutator expects Hermitian Pauli terms")
    if a.commutes_with(b):
        return None
    ab = pauli_product(a, b)
    return 2 * 1j ** ab.phase_power, ab.unsigned()


def matrix_rep(p: PauliTerm) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli term (qubit 0 is the leftmost factor)."""
    if p.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices limited to {MAX_DENSE_QUBITS} qubits")
    m = np.array([[1.0 + 0j]])
    for c in p.letters:
        m = np.kron(m, _SINGLE_MATRIX[c])
    return (1j ** p.phase_power) * m


def all_pauli_strings(n: int, include_identity: bool = True) -> list[PauliTerm]:
    terms = [PauliTerm("".join(s)) for s in itertools.product(_LETTERS, repeat=n)]
    if not include_identity:
        terms = [t for t in terms if not t.is_identity]
    return terms


def hs_decompose(H: np.ndarray, atol: float = 1e-12) -> dict[PauliTerm, float]:
    """Real coefficients ``y`` with ``H = sum_P y_P * P/2``.

    Coefficients are trace inner products against the half-Pauli basis,
    ``y_P = <P/2, H> / <P/2, P/2> = 2 tr(P H) / d``.  Entries with
    ``|y_P| <= atol`` are dropped.
    """
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    n = int(round(np.log2(d)))
    if H.shape != (d, d) or 2**n != d:
        raise ValidationError("expected a 2**n x 2**n matrix")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-10:
        raise ValidationError("matrix is not Hermitian")
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices limited to {MAX_DENSE_QUBITS} qubits")
    coeffs = {}
    for p in all_pauli_strings(n):
        # tr(P H) = sum_ij P_ji H_ij
        y = 2.0 * np.real(np.sum(matrix_rep(p).T * H)) / d
        if abs(y) > atol:
            coeffs[p] = float(y)
    return coeffs


def hs_reconstruct(coeffs: dict[PauliTerm, float], n: int) -> np.ndarray:
    out = np.zeros((2**n, 2**n), dtype=complex)
    for p, y in coeffs.items():
        out += y * matrix_rep(p) / 2
    return out


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered, pairwise distinct Hermitian traceless Pauli generators."""

    qubits: int
    generators: tuple[PauliTerm, ...]

    def __post_init__(self):
        gens = tuple(g if isinstance(g, PauliTerm) else PauliTerm.parse(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise ValidationError("generator set is empty")
        seen = set()
        for g in gens:
            if g.n_qubits != self.qubits:
                raise DimensionError(f"generator {g} does not act on {self.qubits} qubits")
            if not g.is_hermitian or g.is_identity:
                raise ValidationError(f"generator {g} must be Hermitian and traceless")
            if g.letters in seen:
                raise ValidationError(f"duplicate generator {g.letters}")
            seen.add(g.letters)

    @classmethod
    def parse(cls, spec: str | Iterable[str]) -> "GeneratorSet":
        """Build from ``"X,Z"`` / ``"XI ZX"`` style text or a list of strings."""
        if isinstance(spec, str):
            spec = spec.replace(",", " ").split()
        gens = tuple(PauliTerm.parse(s) for s in spec)
        if not gens:
            raise ValidationError("generator set is empty")
        return cls(gens[0].n_qubits, gens)

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, i) -> PauliTerm:
        return self.generators[i]

    def index(self, p: PauliTerm | str) -> int:
        letters = p.letters if isinstance(p, PauliTerm) else PauliTerm.parse(p).letters
        for i, g in enumerate(self.generators):
            if g.letters == letters:
                return i
        raise KeyError(letters)

    def matrices(self) -> list[np.ndarray]:
        """Half-Pauli matrices ``P/2`` in frame order."""
        return [matrix_rep(g) / 2 for g in self.generators]

    def __str__(self):
        return ",".join(str(g) for g in self.generators)


@dataclass(frozen=True)
class LieBasisElement:
    pauli: PauliTerm
    degree: int
    # (generator index, basis index) with pauli ∝ [generator, basis[basis index]]
    parent: tuple[int, int] | None = None


@dataclass(frozen=True)
class LieHull:
    frame: GeneratorSet
    basis: tuple[LieBasisElement, ...]
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {b.pauli.letters: i for i, b in enumerate(self.basis)})

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def bracket_generating(self) -> bool:
        return self.dimension == 4**self.frame.qubits - 1

    @property
    def max_degree(self) -> int:
        return max(b.degree for b in self.basis)

    def __contains__(self, p) -> bool:
        letters = p.letters if isinstance(p, PauliTerm) else PauliTerm.parse(p).letters
        return letters in self._index

    def index(self, p) -> int:
        letters = p.letters if isinstance(p, PauliTerm) else PauliTerm.parse(p).letters
        return self._index[letters]

    def element(self, p) -> LieBasisElement:
        return self.basis[self.index(p)]

    def degree(self, p) -> int:
        return self.element(p).degree


def lie_hull(gens: GeneratorSet) -> LieHull:
    """Breadth-first commutator closure of a generator set.

    Level ``k + 1`` consists of the new strings ``[g, b]`` with ``g`` a
    generator and ``b`` at level ``k``; right-nested brackets of generators
    span the generated algebra, so this reaches every element at its minimal
    bracket length.  Levels are sorted lexicographically for a deterministic
    basis order, and each element keeps the first parent found.
    """
    basis = [LieBasisElement(g.unsigned(), 1) for g in gens.generators]
    seen = {b.pauli.letters for b in basis}
    frontier = list(range(len(basis)))
    degree = 1
    while frontier:
        degree += 1
        found = {}
        for gi, g in enumerate(gens.generators):
            for bi in frontier:
                c = commutator(g.unsigned(), basis[bi].pauli)
                if c is None:
                    continue
                letters = c[1].letters
                if letters not in seen and letters not in found:
                    found[letters] = (gi, bi)
        frontier = []
        for letters in sorted(found):
            seen.add(letters)
            frontier.append(len(basis))
            basis.append(LieBasisElement(PauliTerm(letters), degree, found[letters]))
    return LieHull(gens, tuple(basis))


def commutator_chain(hull: LieHull, p) -> list[int]:
    """Generator indices ``[g1, ..., g_{L-1}, g_L]`` with ``p ∝ [g1, [g2, ... g_L]]``."""
    i = hull.index(p)
    chain = []
    while True:
        b = hull.basis[i]
        if b.degree == 1:
            chain.append(hull.frame.index(b.pauli))
            return chain
        if b.parent is None:
            raise RuntimeError(f"basis element {b.pauli} has no recorded commutator chain")
        gi, i = b.parent
        chain.append(gi)


def pauli_rotation(p: PauliTerm, angle: float) -> np.ndarray:
    """``exp(i angle p / 2)`` by the half-angle formula."""
    if not p.is_hermitian:
        raise ValidationError("rotation generator must be Hermitian")
    m = matrix_rep(p)
    return np.cos(angle / 2) * np.eye(m.shape[0]) + 1j * np.sin(angle / 2) * m


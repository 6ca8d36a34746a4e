"""Pauli strings, their brackets, and the Lie algebra a small generator set reaches.

Run with ``python demos/01_pauli_algebra.py``.
"""
# %%
import numpy as np

from srmbqc.pauli import GeneratorSet, PauliTerm, commutator, commutator_chain, hs_decompose, lie_hull, matrix_rep

# Products of Pauli strings stay in the Pauli group; the phase is tracked exactly.
x, z = PauliTerm.parse("XZ"), PauliTerm.parse("ZX")
print(f"{x} * {z} = {x * z}")
print(f"[{x}, {z}] = {commutator(x, z) or '0 (they commute)'}")
coeff, p = commutator(PauliTerm("X"), PauliTerm("Z"))
print(f"[X, Z] = {coeff} {p}")

# %%
# A Hermitian matrix splits uniquely into Pauli coefficients.
H = 0.3 * matrix_rep(PauliTerm.parse("XI")) - 1.2 * matrix_rep(PauliTerm.parse("YZ"))
print({str(p): round(float(np.real(c)), 6) for p, c in hs_decompose(H).items()})

# %%
# Two anticommuting single-qubit generators reach all of su(2) at bracket length two.
hull = lie_hull(GeneratorSet.parse("X,Z"))
for element in hull.basis:
    print(f"  {element.pauli}  degree {element.degree}")
print("bracket-generating:", hull.bracket_generating)

# %%
# On two qubits, XZ and ZX alone close into a small subalgebra.
hull2 = lie_hull(GeneratorSet.parse("XZ,ZX"))
print(f"dimension {hull2.dimension} of {4**2 - 1}, bracket-generating: {hull2.bracket_generating}")

# Local X/Z fields plus one ZZ coupling do reach everything; the chain records how each string is built.
hull3 = lie_hull(GeneratorSet.parse("XI,ZI,IX,IZ,ZZ"))
target = hull3.basis[-1].pauli
print(f"dimension {hull3.dimension}, bracket-generating: {hull3.bracket_generating}")
print(f"{target} (degree {hull3.basis[-1].degree}) comes from generator chain {commutator_chain(hull3, target)}")

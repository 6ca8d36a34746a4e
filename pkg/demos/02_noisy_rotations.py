"""How a noisy measurement-based rotation deviates from the ideal one, and why splitting helps.

Run with ``python demos/02_noisy_rotations.py``.
"""
# %%
import numpy as np

from srmbqc.channels import NoiseModel, choi_matrix, diamond_norm, implementation_error, is_cptp, noisy_rotation_channel, unitary_superop
from srmbqc.curves import split_rotation
from srmbqc.pauli import GeneratorSet, PauliTerm, pauli_rotation

X = PauliTerm("X")
noise = NoiseModel(0.9)

# %%
# A single noisy rotation is a two-branch mixture: still a valid channel, but no longer unitary.
channel = noisy_rotation_channel(X, 0.4, noise)
print("CPTP:", is_cptp(channel))
print("Choi eigenvalues:", np.round(np.linalg.eigvalsh(choi_matrix(channel))[::-1], 6))

# %%
# Its distance from the ideal rotation grows quadratically in the angle.
for alpha in (0.4, 0.2, 0.1):
    delta = noisy_rotation_channel(X, alpha, noise) - unitary_superop(pauli_rotation(X, alpha))
    print(f"alpha={alpha:<4}  diamond distance={diamond_norm(delta):.3e}  /alpha^2={diamond_norm(delta) / alpha**2:.4f}")

# %%
# So cutting a rotation into N equal pieces drives the total error down like 1/N.
frame = GeneratorSet.parse("X")
for n in (10, 100, 1000):
    rep = implementation_error(split_rotation(frame, 0, 1.0, n), noise, pauli_rotation(X, 1.0))
    print(f"N={n:<5} eps={rep.epsilon:.3e}  bound={rep.lemma2_bound:.3e}  eps/bound={rep.tightness_ratio:.4f}")

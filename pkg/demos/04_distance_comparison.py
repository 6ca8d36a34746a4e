"""Four ways to price a Y rotation with X/Z controls, side by side.

The sub-Riemannian distance sits between two multiples of a cheap
log-coordinate estimate, and below the cost of an Euler-style decomposition.
Run with ``python demos/04_distance_comparison.py``.
"""
# %%
import numpy as np

from srmbqc.geodesics import ball_box_fit, d_cc_su2, d_infty, euler_sequence, su2_frame
from srmbqc.pauli import PauliTerm, lie_hull, pauli_rotation

hull = lie_hull(su2_frame())
Y = PauliTerm("Y")
thetas = np.linspace(0.25, 3.0, 12)
targets = [pauli_rotation(Y, t) for t in thetas]

# %%
dcc = [d_cc_su2(U) for U in targets]
dinf = [d_infty(U, hull) for U in targets]
euler = [euler_sequence(Y, t, hull) for t in thetas]
fit = ball_box_fit(targets, hull, dcc_values=dcc, min_samples=1)

print(" theta    d_cc   d_inf  euler(costed)  euler(free)")
for t, a, b, e in zip(thetas, dcc, dinf, euler):
    print(f"{t:6.2f} {a:7.4f} {b:7.4f} {e.costed_length:13.4f} {e.free_clifford_length:12.4f}")
print(f"{fit.c_lower:.4f} * d_inf <= d_cc <= {fit.c_upper:.4f} * d_inf on these samples")

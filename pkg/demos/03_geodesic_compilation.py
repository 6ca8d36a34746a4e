"""Reach a Y rotation using only X and Z: shortest control curve, its rotation program, and the noise it accrues.

Run with ``python demos/03_geodesic_compilation.py``.
"""
# %%
import math

import numpy as np

from srmbqc.channels import NoiseModel, implementation_error
from srmbqc.curves import arclength, compile_curve, endpoint, trotter_discretize, TrotterPlan
from srmbqc.geodesics import su2_geodesic_controls, su2_geodesic_solve
from srmbqc.pauli import PauliTerm, pauli_rotation

theta = 1.0
target = pauli_rotation(PauliTerm("Y"), theta)

# %%
# Y is not directly available, so the shortest horizontal path is a curved one.
params = su2_geodesic_solve(target)[0]
curve = su2_geodesic_controls(params)
print(f"duration {params.duration:.6f} (closed form {math.sqrt(theta * (4 * math.pi - theta)):.6f})")
print(f"arclength {arclength(curve):.6f}, endpoint residual {np.linalg.norm(params.endpoint() - target):.1e}")

# %%
# A symmetric product formula turns the curve into X/Z rotations; its error shrinks like M^-2.
for m in (25, 100, 400):
    seq = trotter_discretize(curve, TrotterPlan(m, curve.duration, 2))
    print(f"M={m:<4} rotations={len(seq):<5} endpoint error={np.linalg.norm(endpoint(seq) - target, 2):.2e}")

# %%
# With the target in hand the program can be made exact before it meets the noise.
budget = 500
program = compile_curve(curve, budget, target=target)
print(f"compiled {len(program)} rotations, endpoint error {np.linalg.norm(endpoint(program) - target):.1e}")
for sigma in (1.0, 0.95, 0.9):
    rep = implementation_error(program, NoiseModel(sigma), target, dcc=params.duration, budget=budget)
    bound = rep.theorem1_bound
    print(f"sigma={sigma:<5} eps={rep.epsilon:.3e}  bound={bound:.3e}" + (f"  eps/bound={rep.epsilon / bound:.3f}" if bound else ""))

"""
Potential function near the complete structure
==============================================

Evaluates V and W at their critical points for a few fillings, shows that
their values read off the complex volume, and traces the critical points of
(N, 1, N) fillings toward (0, arctan(2)/2, pi/2).

Run with ``python notebooks/potential_tour.py``.
"""

import math

import numpy as np

from qvol.contfrac import SurgerySpec
from qvol.hypgeom import complex_volume, critical_point, sister_solution, solve_structure, w_critical
from qvol.potential import eval_V, eval_W

for spec in (SurgerySpec(19, 1, 10), SurgerySpec(7, 3, 4), SurgerySpec(-11, 2, -6)):
    sol = solve_structure(spec)
    vol, cs = complex_volume(spec, sol)
    pt, idx = w_critical(sol, spec)
    print(f"{spec}: Vol = {vol:.8f}  CS = {cs:.8f}  W = {eval_W(pt, idx, spec):.8f}")
    for vpt, vidx in critical_point(sol, spec):
        print(f"    V at l = {vidx.l:4d}: {eval_V(vpt, vidx, spec):.8f}")
    sis = sister_solution(sol, spec)
    print(f"    sister residual {sis.residual:.1e}, sister D2 sum {sis.volume:.8f}")

# %% the diagonal family
target = np.array([0.0, math.atan(2) / 2, math.pi / 2])
for n in (20, 40, 80, 160):
    spec = SurgerySpec(n, 1, n)
    pt, _ = critical_point(solve_structure(spec), spec)[3]
    d = np.linalg.norm(pt.vector().real - target)
    print(f"N = {n:4d}  Re point = {np.round(pt.vector().real, 5)}  distance {d:.4f}")

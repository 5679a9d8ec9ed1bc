"""
Growth of RT_r toward the volume
================================

Walks through the desk-scale check for K_10(19, 1): the geometric volume, the
growth rates (4 pi / r) log|RT_r|, the 1/r fit and the normalized magnitudes
|RT_r| exp(-r Vol / 4 pi) against the saddle-point constant.

Run with ``python notebooks/growth_rate.py``.  Writes growth_rate.csv next to
this file for plotting.
"""

# %% geometry
import math
from pathlib import Path

import numpy as np

from qvol.contfrac import SurgerySpec
from qvol.hypgeom import solve_structure, t_constant, volume
from qvol.verify import report_csv_lines, verify_conjecture

spec = SurgerySpec(19, 1, 10)
sol = solve_structure(spec)
vol = volume(sol)
print(f"Vol = {vol:.10f}   CS mod pi^2 = {sol.cs:.10f}")
print("shapes:", np.round(sol.shapes, 6))

# %% RT_r and the fit
report = verify_conjecture(spec, 51, 301)
fit = report["fit"]
print(f"Vol_est = {fit['vol_estimate']:.6f}  c1 = {fit['correction_c1']:.3f}  gap = {report['verdict']['vol_gap']:.3%}")
for row in report["rt_rows"][::25]:
    print(f"r = {row['r']:4d}  rate = {row['growth_rate']:.5f}  rel_error = {row['rel_error']:.1e}")

# the raw growth rate is still far from Vol at r = 301; the 1/r term carries most of the gap
last = report["rt_rows"][-1]
print(f"raw rate at r = {last['r']}: {last['growth_rate']:.4f}, with correction: "
      f"{fit['vol_estimate'] + fit['correction_c1'] / last['r']:.4f}")

# %% the asymptotic constant
asym = report["asymptotics"]
t = t_constant(sol, spec)
print(f"|t| (saddle) = {abs(t):.7f}   |t| (bare form) = {asym['t_abs_printed']:.7f}")
print(f"limit of |RT_r| exp(-r Vol/4pi) ~ {asym['limit_estimate']:.7f}  ratio {asym['limit_estimate'] / abs(t):.4f}")
print(f"r |da|/a: first third {asym['decay_envelope_early']:.1f}, last third {asym['decay_envelope_late']:.1f}")

# %% plot-ready rows
out = Path(__file__).with_name("growth_rate.csv")
out.write_text("\n".join(report_csv_lines(report)) + "\n")
print("wrote", out)

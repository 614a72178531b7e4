"""Shrinking the gap: the Casimir pull red-shifts the mirror and turns the
transparency window off near d ~ 2 nm, then back on.

Run:  python3 demos/casimir_switch.py
"""

import numpy as np

from casimir_omit.casimir import critical_separation, effective_frequency
from casimir_omit.params import TWO_PI, paper_baseline
from casimir_omit.response import sweep_switch, window_center

p = paper_baseline()
print(f"adhesion threshold d_crit = {critical_separation(p.casimir, p) * 1e9:.3f} nm")

print("\n  d (nm)   Omega_m - omega_m (kHz/2pi)   window center (kHz/2pi)")
for d in (10e-9, 4e-9, 3e-9, 2e-9, 1.5e-9):
    q = p.replace(gap=d)
    shift = effective_frequency(q.casimir, q) - q.mech_freq_1
    center = window_center(q)
    print(f"  {d * 1e9:6.2f}   {shift / TWO_PI / 1e3:12.3f}                  {center / TWO_PI / 1e3:10.3f}")

grid = np.linspace(1e-9, 10e-9, 181)
res = sweep_switch(p, grid)
i = int(np.nanargmin(res.eta))
print(f"\nprobe output at delta_p = 0: {res.eta[-1]:.3f} at 10 nm, {res.eta[i]:.2e} at {grid[i] * 1e9:.2f} nm, "
      f"{res.eta[0]:.3f} at 1 nm")

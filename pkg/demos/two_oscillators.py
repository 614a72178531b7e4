"""Moveable sphere: the Casimir coupling splits the window into two normal
modes once the gap is small enough.

Run:  python3 demos/two_oscillators.py
"""

import numpy as np

from casimir_omit.casimir import HBAR, coupling_J
from casimir_omit.params import paper_baseline
from casimir_omit.response import sweep_spectrum

for d in (10e-9, 4e-9, 2e-9):
    p = paper_baseline(mode="moveable_sphere", gap=d)
    half = 0.04 * p.mech_freq_1
    res = sweep_spectrum(p, np.linspace(-half, half, 8001))
    eta = res.eta
    peaks = np.flatnonzero((eta[1:-1] > eta[:-2]) & (eta[1:-1] >= eta[2:])) + 1
    top = sorted(peaks[np.argsort(eta[peaks])[-2:]])
    hj = HBAR * coupling_J(p.casimir, p)
    split = hj / (p.mirror_mass * p.mech_freq_1)
    where = ", ".join(f"{res.grid[k]:.0f}" for k in top)
    print(f"d = {d * 1e9:4.1f} nm   hbar J = {hj:.3g} N/m   hbar J/(m omega_m) = {split:.3g} rad/s   "
          f"maxima at [{where}] rad/s")

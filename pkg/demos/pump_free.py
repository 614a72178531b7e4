"""Transparency without a pump: the Casimir force alone displaces the mirror,
and the weak-pump trend runs opposite to ordinary OMIT.

Run:  python3 demos/pump_free.py
"""

from casimir_omit.casimir import CasimirModel
from casimir_omit.params import derive, paper_baseline
from casimir_omit.response import respond, solve_steady

base = paper_baseline(gap=2e-9)
off = CasimirModel.off()


def eta0(p):
    return respond(p, solve_steady(p), derive(p).nu(0.0)).eta


print(" P (uW)   eta(0) with Casimir   eta(0) without")
for uw in (0, 5, 10, 20, 50):
    p = base.replace(pump_power=uw * 1e-6)
    print(f" {uw:6d}   {eta0(p):19.4f}   {eta0(p.replace(casimir=off)):14.4f}")

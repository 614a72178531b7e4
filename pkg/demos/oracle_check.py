"""Cross-check the closed-form response against direct time integration of
the nonlinear equations of motion with a weak probe.

Run:  python3 demos/oracle_check.py   (about 15 s)
"""

import math

from casimir_omit.oracle import OracleConfig, integrate_full, with_override
from casimir_omit.params import derive, paper_baseline
from casimir_omit.response import respond, solve_steady

p = paper_baseline()
cfg = OracleConfig(variant="full", mech_decay_override=2 * math.pi * 5e3, probe_ratio=1e-3)
pe = with_override(p, cfg)
steady = solve_steady(pe)
print(" delta_p (rad/s)   eta analytic   eta time-domain   |diff|")
for dp in (-4e4, -2e4, 0.0, 2e4, 4e4):
    nu = derive(pe).nu(dp)
    a = respond(pe, steady, nu).eta
    r = integrate_full(p, nu, cfg, steady=steady)
    print(f" {dp:15.0f}   {a:12.6f}   {r.eta:15.6f}   {abs(a - r.eta):.1e}")

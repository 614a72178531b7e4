import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_omit.casimir import CasimirModel, critical_separation, effective_frequency
from casimir_omit.errors import DegenerateDenominator
from casimir_omit.params import derive, paper_baseline
from casimir_omit.response import (
    double_closed_form,
    eta,
    linear_system_double,
    linear_system_single,
    respond,
    respond_double,
    respond_many,
    respond_single,
    single_closed_form,
    sweep_spectrum,
    sweep_switch,
    window_center,
)
from casimir_omit.steady import solve_double, solve_single

TWO_PI = 2 * math.pi


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


draws = st.fixed_dictionaries(
    {
        "gap": st.floats(min_value=1.5e-9, max_value=20e-9),
        "pump_power": st.floats(min_value=0.0, max_value=2e-3),
        "cavity_decay": st.floats(min_value=TWO_PI * 20e3, max_value=TWO_PI * 300e3),
        "mech_decay_1": st.floats(min_value=TWO_PI * 50, max_value=TWO_PI * 5e3),
        "coupling_ratio": st.floats(min_value=0.1, max_value=1.0),
        "offset": st.floats(min_value=-0.05, max_value=0.05),
    }
)


@given(draw=draws)
@settings(max_examples=60, deadline=None)
def test_single_closed_form_equals_linear_solve(draw):
    offset = draw.pop("offset")
    p = paper_baseline(**draw)
    s = solve_single(p)
    w = effective_frequency(p.casimir, p, s.x_s)
    nu = p.mech_freq_1 * (1 + offset)
    cf = single_closed_form(p, s.a_s, s.x_s, w, nu)
    ls = linear_system_single(p, s.a_s, s.x_s, w, nu)
    for a, b in zip(cf[:3], ls):
        assert rel(a, b) < 1e-10


@given(draw=draws)
@settings(max_examples=40, deadline=None)
def test_double_closed_form_equals_linear_solve(draw):
    offset = draw.pop("offset")
    draw["gap"] = max(draw["gap"], 2e-9)
    p = paper_baseline(mode="moveable_sphere", **draw)
    s = solve_double(p)
    nu = p.mech_freq_1 * (1 + offset)
    cf = double_closed_form(p, s, nu)
    ls = linear_system_double(p, s, nu)
    for a, b in zip((cf[0], cf[1], cf[2], cf[3]), ls):
        assert rel(a, b) < 1e-10


def test_lower_sideband_from_conjugate_equation(baseline):
    """da_minus follows from the conjugated cavity equation given X."""
    s = solve_single(baseline)
    der = derive(baseline)
    w = effective_frequency(baseline.casimir, baseline, s.x_s)
    det = baseline.pump_detuning - der.g * s.x_s
    for nu in np.linspace(0.95, 1.05, 7) * baseline.mech_freq_1:
        dp, dm, X, _, _ = single_closed_form(baseline, s.a_s, s.x_s, w, nu)
        implied = 1j * der.g * s.a_s * np.conj(X) / complex(baseline.cavity_decay, det + nu)
        assert rel(dm, implied) < 1e-10


@given(c=st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=30, deadline=None)
def test_eta_is_probe_independent(c):
    p = paper_baseline()
    s = solve_single(p)
    w = effective_frequency(p.casimir, p, s.x_s)
    nu = p.mech_freq_1 - 3e4
    e1 = eta(p, single_closed_form(p, s.a_s, s.x_s, w, nu, 1.0)[0], 1.0)
    e2 = eta(p, single_closed_form(p, s.a_s, s.x_s, w, nu, c)[0], c)
    assert rel(e1, e2) < 1e-12


def test_eta_edge_values(baseline):
    assert eta(baseline, 0.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        eta(baseline, 0.1, 0.0)


def test_empty_cavity_absorbs_at_resonance(baseline):
    p = baseline.replace(pump_power=0.0, casimir=CasimirModel.off())
    s = solve_single(p)
    r = respond_single(p, s, derive(p).nu(0.0))
    assert r.eta == pytest.approx(0.0, abs=1e-24)
    assert r.da_plus == pytest.approx(derive(p).eps_p / p.cavity_decay, rel=1e-14)


def test_reduction_to_bare_lorentzian(baseline):
    """Without pump and Casimir force the response is the cavity Lorentzian."""
    p = baseline.replace(pump_power=0.0, casimir=CasimirModel.off())
    s = solve_single(p)
    der = derive(p)
    for dp in (-3e5, -1e4, 0.0, 2e4, 5e5):
        r = respond_single(p, s, der.nu(dp))
        lorentz = der.eps_p / complex(p.cavity_decay, -dp)
        assert rel(r.da_plus, lorentz) < 1e-12
        t = 1 - 2 * p.coupling_ratio * p.cavity_decay / complex(p.cavity_decay, -dp)
        assert r.eta == pytest.approx(abs(t) ** 2, rel=1e-12, abs=1e-15)
        assert r.X == 0


def test_reduction_to_standard_omit(baseline):
    """Casimir off: textbook OMIT transmission with the bare mechanical mode."""
    p = baseline.replace(casimir=CasimirModel.off())
    s = solve_single(p)
    der = derive(p)
    det = p.pump_detuning - der.g * s.x_s
    m, gam, wm, Gm = p.mirror_mass, p.cavity_decay, p.mech_freq_1, p.mech_decay_1
    hbar = 1.054571817e-34
    for dp in np.linspace(-2e4, 2e4, 9):
        nu = der.nu(dp)
        # eliminate the lower sideband, then X, by hand
        lower = complex(gam, -det - nu)
        upper = complex(gam, det - nu)
        n = abs(s.a_s) ** 2
        mech = m * (wm**2 - nu**2 - 1j * nu * Gm)
        X = hbar * der.g * s.a_s.conjugate() * der.eps_p / upper
        X /= mech + 1j * hbar * der.g**2 * n / lower - 1j * hbar * der.g**2 * n / upper
        ref = (1j * der.g * s.a_s * X + der.eps_p) / upper
        r = respond_single(p, s, nu)
        assert rel(r.da_plus, ref) < 1e-9


def test_two_oscillator_ratio():
    p = paper_baseline(mode="moveable_sphere", gap=3e-9)
    s = solve_double(p)
    for nu in np.linspace(0.97, 1.03, 5) * p.mech_freq_1:
        r = respond_double(p, s, nu)
        assert rel(r.X2 / r.X1, -s.hbar_J / (p.sphere_mass * r.a2)) < 1e-12


def test_two_oscillator_without_coupling_reduces_to_single():
    p2 = paper_baseline(mode="moveable_sphere", casimir=CasimirModel.off())
    p1 = paper_baseline(casimir=CasimirModel.off())
    s2, s1 = solve_double(p2), solve_single(p1)
    for nu in np.linspace(0.98, 1.02, 5) * p1.mech_freq_1:
        r2, r1 = respond_double(p2, s2, nu), respond_single(p1, s1, nu)
        assert rel(r2.da_plus, r1.da_plus) < 1e-12
        assert rel(r2.da_minus, r1.da_minus) < 1e-12
        assert rel(r2.X1, r1.X) < 1e-12
        assert r2.X2 == 0
        assert r2.eta == pytest.approx(r1.eta, rel=1e-12)


def test_degenerate_denominator(baseline):
    p = baseline.replace(pump_power=0.0, casimir=CasimirModel.off(), mech_decay_1=0.0, cavity_decay=1e-300)
    with pytest.raises((DegenerateDenominator, ValueError)):
        single_closed_form(p, 0j, 0.0, p.mech_freq_1, p.mech_freq_1)


def test_spectrum_rows_and_order(baseline):
    grid = np.linspace(-5e4, 5e4, 101)
    res = sweep_spectrum(baseline, grid)
    assert len(res) == 101
    assert np.all(np.diff(res.delta_p_values) > 0)
    np.testing.assert_array_equal(res.delta_p_values, grid)
    assert res.ok.all()


def test_spectrum_parallel_is_identical(baseline):
    grid = np.linspace(-5e4, 5e4, 64)
    a = sweep_spectrum(baseline, grid, jobs=1)
    b = sweep_spectrum(baseline, grid, jobs=3)
    assert [p.da_plus for p in a.points] == [p.da_plus for p in b.points]
    assert [p.eta for p in a.points] == [p.eta for p in b.points]


def test_respond_many_preserves_order(baseline):
    s = solve_single(baseline)
    nus = [float(v) for v in np.linspace(0.99, 1.01, 20) * baseline.mech_freq_1]
    out = respond_many(baseline, s, nus, jobs=2)
    assert [r.nu for r in out] == nus
    assert [r.eta for r in out] == [respond(baseline, s, nu).eta for nu in nus]


def test_spectrum_rejects_bad_grid(baseline):
    with pytest.raises(ValueError):
        sweep_spectrum(baseline, [0.0, 1.0, 0.5])
    with pytest.raises(ValueError):
        sweep_spectrum(baseline, [])


def test_switch_flags_adhesion(baseline):
    d_crit = critical_separation(baseline.casimir, baseline)
    grid = np.array([0.5 * d_crit, 1.5e-9, 3e-9, 6e-9])
    res = sweep_switch(baseline, grid)
    assert res.status[0] == "AdhesionRegime"
    assert res.points[0] is None
    assert math.isnan(res.eta[0])
    assert res.status[1:] == ["ok"] * 3
    # each row matches an isolated solve
    for d, point in zip(grid[1:], res.points[1:]):
        p = baseline.replace(gap=float(d))
        ref = respond(p, solve_single(p), derive(p).nu(0.0))
        assert point.eta == pytest.approx(ref.eta, rel=1e-9)


def test_switch_endpoint_close_to_off(baseline):
    res = sweep_switch(baseline, [10e-9])
    off = baseline.replace(casimir=CasimirModel.off())
    ref = respond(off, solve_single(off), derive(off).nu(0.0)).eta
    assert abs(res.eta[0] - ref) < 0.05


@given(d=st.floats(min_value=1.2e-9, max_value=10e-9))
@settings(max_examples=8, deadline=None)
def test_red_shift_sign(d):
    p = paper_baseline(gap=d)
    assert window_center(p) < 0


def test_window_center_without_drive_or_casimir_shift():
    # negligible static displacement: the peak sits at Delta_p = 0
    p = paper_baseline(casimir=CasimirModel.off(), pump_power=1e-5)
    center = window_center(p)
    assert abs(center) <= p.mech_decay_1 / 10


def test_window_center_radiation_pressure_offset(baseline):
    # the static radiation-pressure displacement detunes the cavity by g x_s,
    # which pulls the Casimir-free peak slightly to the red at 1 mW
    p = baseline.replace(casimir=CasimirModel.off())
    center = window_center(p)
    assert -5e3 < center < -1e3
    # and the offset grows with the pump power
    weak = window_center(p.replace(pump_power=1e-4))
    assert center < weak < 0

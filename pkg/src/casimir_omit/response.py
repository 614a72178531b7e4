"""Linearized probe response around the steady state.

Fluctuations are decomposed into the two sidebands of the pump frame,

    delta_a = da_plus e^{-i nu t} + da_minus e^{+i nu t},
    delta_x = X e^{-i nu t} + conj(X) e^{+i nu t},

and the resulting algebraic system is solved in closed form.  The probe
output rate follows from the input-output relation with a port that carries
the fraction ``coupling_ratio`` of the cavity decay:

    eta = |1 - 2 eta_c gamma da_plus / eps_p|^2.

Every closed form here has a companion ``linear_system_*`` routine that
assembles the same sideband equations as a dense complex matrix and hands it
to ``numpy.linalg.solve``; the two routes are compared in the test suite.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .casimir import HBAR, effective_frequency
from .errors import DegenerateDenominator, PhysicsDomainError, NoConvergence
from .params import SystemParams, derive
from .steady import SteadyState1, SteadyState2, Treatment, solve_double, solve_single

DEGENERATE_RATIO = 1e-300


@dataclass(frozen=True)
class ResponsePoint:
    nu: float
    delta_p: float
    da_plus: complex
    da_minus: complex
    X: complex
    G_plus: complex
    G_minus: complex
    eta: float


@dataclass(frozen=True)
class ResponsePoint2(ResponsePoint):
    X1: complex
    X2: complex
    a1: complex
    a2: complex
    G1: complex
    G2: complex


def eta(params, da_plus, eps_p):
    """Probe output rate |t|^2 with t = 1 - 2 eta_c gamma da_plus / eps_p."""
    if not eps_p > 0:
        raise ValueError("eps_p must be positive")
    t = 1.0 - 2.0 * params.coupling_ratio * params.cavity_decay * da_plus / eps_p
    return t.real**2 + t.imag**2


def _guard(den, scale):
    if den == 0 or abs(den) <= DEGENERATE_RATIO * scale:
        raise DegenerateDenominator(f"sideband denominator {den!r} vanishes against scale {scale:.3g}")


def _probe(params):
    der = derive(params)
    # eta is eps_p independent: fall back to a unit probe for the transmission
    return der, der.eps_p


def single_closed_form(params, a_s, x_s, omega_eff, nu, eps_p=1.0):
    """Sideband amplitudes of the fixed-sphere system for explicit inputs.

    Returns ``(da_plus, da_minus, X, G_plus, G_minus)``.
    """
    g = derive(params).g
    m = params.mirror_mass
    gam = params.cavity_decay
    det = params.pump_detuning - g * x_s
    n_s = a_s.real**2 + a_s.imag**2
    chi = omega_eff**2 - nu**2 - 1j * nu * params.mech_decay_1
    Gp = complex(gam, -det - nu)
    Gm = complex(gam, det - nu)
    opt = 1j * HBAR * g**2 * n_s
    lhs = chi * Gp * Gm * m
    den = lhs - opt * (Gp - Gm)
    _guard(den, abs(lhs) + abs(opt * (Gp - Gm)))
    da_plus = (chi * Gp * m + opt) * eps_p / den
    X = HBAR * g * a_s.conjugate() * Gp * eps_p / den
    da_minus = 1j * HBAR * g**2 * a_s**2 * eps_p / den.conjugate()
    return da_plus, da_minus, X, Gp, Gm


def respond_single(params, steady, nu, model=None):
    """Closed-form response of the fixed-sphere system at beat frequency ``nu``."""
    model = params.casimir if model is None else model
    omega_eff = effective_frequency(model, params, steady.x_s)
    der, eps_p = _probe(params)
    unit = single_closed_form(params, steady.a_s, steady.x_s, omega_eff, nu)
    da_plus, da_minus, X, Gp, Gm = unit
    return ResponsePoint(
        nu=nu,
        delta_p=der.delta_p(nu),
        da_plus=da_plus * eps_p,
        da_minus=da_minus * eps_p,
        X=X * eps_p,
        G_plus=Gp,
        G_minus=Gm,
        eta=eta(params, da_plus, 1.0),
    )


def double_closed_form(params, steady, nu, eps_p=1.0):
    """Sideband amplitudes of the two-oscillator system.

    Returns ``(da_plus, da_minus, X1, X2, a1, a2, G1, G2)``.
    """
    g = derive(params).g
    m1, m2 = params.mirror_mass, params.sphere_mass
    gam = params.cavity_decay
    det = params.pump_detuning - g * steady.x1_s
    a_s, n_s, hJ = steady.a_s, steady.n_s, steady.hbar_J
    a1 = steady.k1 / m1 - nu**2 - 1j * nu * params.mech_decay_1
    a2 = steady.k2 / m2 - nu**2 - 1j * nu * params.mech_decay_2
    G1 = complex(gam, det - nu)
    G2 = complex(gam, -det - nu)
    mech = a1 * a2 * m1 * m2
    opt = 1j * HBAR * g**2 * a2 * m2 * n_s
    cross = hJ**2
    den = mech * G1 * G2 - opt * (G2 - G1) - cross * G1 * G2
    _guard(den, abs(mech * G1 * G2) + abs(opt * (G2 - G1)) + abs(cross * G1 * G2))
    da_plus = (mech * G2 + opt - cross * G2) * eps_p / den
    X1 = HBAR * g * a2 * m2 * a_s.conjugate() * G2 * eps_p / den
    X2 = -HBAR * g * hJ * a_s.conjugate() * G2 * eps_p / den
    da_minus = 1j * HBAR * g**2 * a2.conjugate() * m2 * a_s**2 * eps_p / den.conjugate()
    return da_plus, da_minus, X1, X2, a1, a2, G1, G2


def respond_double(params, steady, nu):
    """Closed-form response of mirror + moveable sphere at beat frequency ``nu``."""
    der, eps_p = _probe(params)
    da_plus, da_minus, X1, X2, a1, a2, G1, G2 = double_closed_form(params, steady, nu)
    return ResponsePoint2(
        nu=nu,
        delta_p=der.delta_p(nu),
        da_plus=da_plus * eps_p,
        da_minus=da_minus * eps_p,
        X=X1 * eps_p,
        G_plus=G2,
        G_minus=G1,
        eta=eta(params, da_plus, 1.0),
        X1=X1 * eps_p,
        X2=X2 * eps_p,
        a1=a1,
        a2=a2,
        G1=G1,
        G2=G2,
    )


# --- generic linear-system route ------------------------------------------------


def linear_system_single(params, a_s, x_s, omega_eff, nu, eps_p=1.0):
    """Solve the fixed-sphere sideband equations as a dense 3x3 system.

    Unknowns are (da_plus, conj(da_minus), X); the equation for da_minus is
    conjugated so that the system is complex-linear.  Returns
    ``(da_plus, da_minus, X)``.
    """
    g = derive(params).g
    m = params.mirror_mass
    gam = params.cavity_decay
    det = params.pump_detuning - g * x_s
    A = np.array(
        [
            [gam + 1j * det - 1j * nu, 0.0, -1j * g * a_s],
            [0.0, gam - 1j * det - 1j * nu, 1j * g * np.conj(a_s)],
            [
                -HBAR * g * np.conj(a_s),
                -HBAR * g * a_s,
                m * (omega_eff**2 - nu**2 - 1j * nu * params.mech_decay_1),
            ],
        ],
        dtype=complex,
    )
    b = np.array([eps_p, 0.0, 0.0], dtype=complex)
    u = np.linalg.solve(A, b)
    return complex(u[0]), complex(np.conj(u[1])), complex(u[2])


def linear_system_double(params, steady, nu, eps_p=1.0):
    """Dense 4x4 solve of the two-oscillator sideband equations.

    Unknowns are (da_plus, conj(da_minus), X1, X2).  Returns
    ``(da_plus, da_minus, X1, X2)``.
    """
    g = derive(params).g
    m1, m2 = params.mirror_mass, params.sphere_mass
    gam = params.cavity_decay
    det = params.pump_detuning - g * steady.x1_s
    a_s, hJ = steady.a_s, steady.hbar_J
    A = np.zeros((4, 4), dtype=complex)
    A[0, 0] = gam + 1j * det - 1j * nu
    A[0, 2] = -1j * g * a_s
    A[1, 1] = gam - 1j * det - 1j * nu
    A[1, 2] = 1j * g * np.conj(a_s)
    A[2, 0] = -HBAR * g * np.conj(a_s)
    A[2, 1] = -HBAR * g * a_s
    A[2, 2] = steady.k1 - m1 * nu**2 - 1j * nu * m1 * params.mech_decay_1
    A[2, 3] = hJ
    A[3, 2] = hJ
    A[3, 3] = steady.k2 - m2 * nu**2 - 1j * nu * m2 * params.mech_decay_2
    b = np.array([eps_p, 0, 0, 0], dtype=complex)
    u = np.linalg.solve(A, b)
    return complex(u[0]), complex(np.conj(u[1])), complex(u[2]), complex(u[3])


# --- sweeps ---------------------------------------------------------------------


@dataclass
class SweepResult:
    """Ordered response table over a detuning or gap grid.

    ``status`` holds ``"ok"`` or the name of the physics error that prevented
    a row from being computed; such rows keep ``None`` in ``points``.
    """

    axis: str
    grid: np.ndarray
    points: list
    status: list
    params: SystemParams
    delta_p: float | None = None
    steady: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def _column(self, name, dtype=float):
        nan = complex("nan") if dtype is complex else math.nan
        return np.array([getattr(p, name) if p is not None else nan for p in self.points], dtype=dtype)

    @property
    def eta(self):
        return self._column("eta")

    @property
    def delta_p_values(self):
        return self._column("delta_p")

    @property
    def nu_values(self):
        return self._column("nu")

    @property
    def da_plus(self):
        return self._column("da_plus", complex)

    @property
    def ok(self):
        return np.array([s == "ok" for s in self.status])


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if grid.size > 1:
        diff = np.diff(grid)
        if not (np.all(diff > 0) or np.all(diff < 0)):
            raise ValueError("grid must be strictly monotone")
    return grid


def solve_steady(params, model=None, *, treatment=Treatment.EXACT, self_shift=True, x0=None):
    """Dispatch to the single- or two-oscillator solver according to ``params.mode``."""
    if params.moveable:
        return solve_double(params, model, self_shift=self_shift, x0=x0)
    return solve_single(params, model, treatment=treatment, x0=x0)


def respond(params, steady, nu, model=None):
    if isinstance(steady, SteadyState2):
        return respond_double(params, steady, nu)
    return respond_single(params, steady, nu, model)


def _respond_chunk(args):
    params, steady, model, nus = args
    return [respond(params, steady, float(nu), model) for nu in nus]


def respond_many(params, steady, nus, model=None, jobs=1):
    """Evaluate the response on a list of beat frequencies, preserving order."""
    nus = [float(v) for v in nus]
    jobs = max(1, int(jobs or 1))
    if jobs == 1 or len(nus) < 2 * jobs:
        return _respond_chunk((params, steady, model, nus))
    size = -(-len(nus) // jobs)
    chunks = [(params, steady, model, nus[i : i + size]) for i in range(0, len(nus), size)]
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_respond_chunk, chunks):
            out.extend(part)
    return out


def default_spectrum_grid(params, points=2001, span=0.04):
    """Detuning grid of ``points`` values over +/- span * omega_m1."""
    half = span * params.mech_freq_1
    return np.linspace(-half, half, points)


def sweep_spectrum(
    params,
    grid=None,
    model=None,
    *,
    treatment=Treatment.EXACT,
    self_shift=True,
    steady=None,
    jobs=1,
):
    """Probe response versus probe-cavity detuning at fixed gap.

    One steady-state solve, then one closed-form evaluation per grid value.
    """
    grid = _check_grid(default_spectrum_grid(params) if grid is None else grid)
    if steady is None:
        steady = solve_steady(params, model, treatment=treatment, self_shift=self_shift)
    der = derive(params)
    points = respond_many(params, steady, [der.nu(dp) for dp in grid], model, jobs)
    return SweepResult(
        axis="delta_p",
        grid=grid,
        points=points,
        status=["ok"] * len(points),
        params=params,
        steady=[steady],
    )


def sweep_switch(
    params,
    grid,
    model=None,
    *,
    delta_p=0.0,
    treatment=Treatment.EXACT,
    self_shift=True,
):
    """Probe output rate at fixed detuning versus gap.

    Steady states are solved from the largest gap downwards, each seeded with
    the previous solution.  Gaps where the system sticks or loses stability
    are kept as flagged rows.
    """
    grid = _check_grid(grid)
    der = derive(params)
    nu = der.nu(delta_p)
    order = np.argsort(-grid, kind="stable")
    points = [None] * grid.size
    status = ["ok"] * grid.size
    states = [None] * grid.size
    seed = None
    for idx in order:
        p = params.replace(gap=float(grid[idx]))
        try:
            try:
                st = solve_steady(p, model, treatment=treatment, self_shift=self_shift, x0=seed)
            except NoConvergence:
                st = solve_steady(p, model, treatment=treatment, self_shift=self_shift)
            points[idx] = respond(p, st, nu, model)
        except PhysicsDomainError as exc:
            status[idx] = type(exc).__name__
            continue
        states[idx] = st
        seed = st.x1_s if isinstance(st, SteadyState2) else st.x_s
    return SweepResult(
        axis="gap",
        grid=grid,
        points=points,
        status=status,
        params=params,
        delta_p=delta_p,
        steady=states,
    )


def window_center(params, model=None, *, half_width=None, resolution=None, steady=None):
    """Detuning of maximum probe output near the mechanical resonance.

    Dense scan with a step no coarser than Gamma_m / 10 over a span that
    covers both Delta_p = 0 and the shifted resonance Omega_m - omega_m,
    padded by ``half_width`` (default 0.02 omega_m) on either side.
    """
    model = params.casimir if model is None else model
    if half_width is None:
        half_width = 0.02 * params.mech_freq_1
    if resolution is None:
        resolution = params.mech_decay_1 / 10.0
    if steady is None:
        steady = solve_steady(params, model)
    if isinstance(steady, SteadyState2):
        shift = math.sqrt(steady.k1 / params.mirror_mass) - params.mech_freq_1
    else:
        shift = effective_frequency(model, params, steady.x_s) - params.mech_freq_1
    lo = min(0.0, shift) - half_width
    hi = max(0.0, shift) + half_width
    n = int(math.ceil((hi - lo) / resolution)) + 1
    res = sweep_spectrum(params, np.linspace(lo, hi, n), model, steady=steady)
    return float(res.grid[int(np.nanargmax(res.eta))])

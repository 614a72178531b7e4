"""Self-consistent static operating point of the optomechanical system.

The cavity field follows the mirror adiabatically in steady state,
``a_s = eps_L / (gamma + i (Delta_L - g x_s))``, so the whole problem
collapses onto a single real unknown, the mirror displacement, which is found
with a damped Newton iteration.  The root that is returned is the one reached
by continuation from the trivial state (no pump, large gap): first the pump
power is ramped up at a large gap, then the gap is closed to its target value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .casimir import HBAR, critical_separation, force, stiffness
from .errors import (
    AdhesionRegime,
    MirrorContact,
    ModelHasNoAdhesion,
    NoConvergence,
    UnstableCoupledMode,
)
from .params import check, derive

ADHESION_TOL = 1e-6
CONTINUATION_START = 50e-9
POWER_STEPS = 8
GAP_STEPS = 32
FOLD_TOL = 1e-2
MAX_NEWTON = 100


class Treatment(str, enum.Enum):
    EXACT = "exact"
    QUADRATIC = "quadratic"


class Stability(str, enum.Enum):
    STABLE = "stable"
    ADHESIVE = "adhesive"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class SteadyState1:
    a_s: complex
    x_s: float
    n_s: float
    k_eff: float
    omega_eff: float | None
    residual: float
    gap: float
    treatment: Treatment


@dataclass(frozen=True)
class SteadyState2:
    a_s: complex
    x1_s: float
    x2_s: float
    n_s: float
    k1: float
    k2: float
    hbar_J: float
    static_pull: float
    residual: float
    gap: float
    self_shift: bool

    @property
    def stiffness_matrix(self):
        return np.array([[self.k1, self.hbar_J], [self.hbar_J, self.k2]])


def _model(params, model):
    return params.casimir if model is None else model


def _cavity(params, x):
    der = derive(params)
    detuning = params.pump_detuning - der.g * x
    denom = params.cavity_decay**2 + detuning**2
    n = der.eps_L**2 / denom
    # dn/dx
    dn = der.eps_L**2 * 2.0 * der.g * detuning / denom**2
    a = der.eps_L / complex(params.cavity_decay, detuning)
    return a, n, dn, der.g


def _single_balance(params, model, x, treatment):
    """Return (f, df/dx, scale) of the mirror force balance at displacement x."""
    d = params.gap
    k0 = params.mirror_mass * params.mech_freq_1**2
    _, n, dn, g = _cavity(params, x)
    if treatment is Treatment.EXACT:
        pull = force(model, params, d - x)
        dpull = -stiffness(model, params, d - x)
    else:
        curv = stiffness(model, params, d)
        pull = force(model, params, d) - curv * x
        dpull = -curv
    rad = HBAR * g * n
    f = k0 * x - pull - rad
    fp = k0 - dpull - HBAR * g * dn
    scale = max(abs(k0 * x), abs(pull), abs(rad))
    return f, fp, scale


def _newton(fun, x0, gap, tol=1e-12):
    x = float(x0)
    f, fp, _ = fun(x)
    converged = False
    for _ in range(MAX_NEWTON):
        if f == 0.0:
            return x
        if fp == 0.0 or not math.isfinite(fp):
            raise NoConvergence(f"vanishing Jacobian at x = {x!r}")
        step = -f / fp
        lam = 1.0
        while True:
            xn = x + lam * step
            if xn < gap:
                fn, fpn, _ = fun(xn)
                if abs(fn) <= abs(f) or lam < 1e-3:
                    break
            lam *= 0.5
            if lam < 1e-12:
                raise MirrorContact(f"Newton iterate cannot stay below the gap {gap!r}")
        dx = xn - x
        x, f, fp = xn, fn, fpn
        if abs(dx) <= tol * max(gap, abs(x)):
            if converged:
                return x
            converged = True  # one polishing step after the tolerance is met
    raise NoConvergence(f"Newton budget of {MAX_NEWTON} iterations exhausted")


def evaluate_single(params, x_s, model=None, treatment=Treatment.EXACT):
    """Build the ``SteadyState1`` record for a given mirror displacement.

    No solving happens here; ``residual`` tells how well ``x_s`` satisfies the
    balance.  Useful to inspect arbitrary operating points.
    """
    model = _model(params, model)
    treatment = Treatment(treatment)
    a, n, _, _ = _cavity(params, x_s)
    f, _, scale = _single_balance(params, model, x_s, treatment)
    residual = abs(f) / scale if scale > 0 else 0.0
    k0 = params.mirror_mass * params.mech_freq_1**2
    k_eff = k0 + stiffness(model, params, params.gap - x_s)
    omega_eff = math.sqrt(k_eff / params.mirror_mass) if k_eff > 0 else None
    return SteadyState1(
        a_s=a,
        x_s=x_s,
        n_s=n,
        k_eff=k_eff,
        omega_eff=omega_eff,
        residual=residual,
        gap=params.gap,
        treatment=treatment,
    )


def _check_gap(params, model):
    if model.is_off:
        return
    try:
        d_crit = critical_separation(model, params)
    except ModelHasNoAdhesion:
        return
    if params.gap <= d_crit * (1.0 + ADHESION_TOL):
        k = params.mirror_mass * params.mech_freq_1**2 + stiffness(model, params, params.gap)
        raise AdhesionRegime(
            f"gap {params.gap:.4g} m is below the adhesion threshold {d_crit:.4g} m: "
            f"net linearized stiffness {k:.4g} N/m is not positive"
        )


def _solve_at(params, model, treatment, x0):
    def fun(x):
        return _single_balance(params, model, x, treatment)

    return _newton(fun, x0, params.gap)


def _continuation(params, model, treatment):
    d_target = params.gap
    d_start = max(d_target, CONTINUATION_START)
    x = 0.0
    at_start = params.replace(gap=d_start)
    for frac in np.linspace(0.0, 1.0, POWER_STEPS + 1)[1:]:
        x = _solve_at(at_start.replace(pump_power=params.pump_power * frac), model, treatment, x)
    if d_start == d_target:
        return x
    log_d = math.log(d_start)
    log_target = math.log(d_target)
    h = (log_d - log_target) / GAP_STEPS
    while log_d > log_target:
        trial = max(log_d - h, log_target)
        d = d_target if trial == log_target else math.exp(trial)
        try:
            x_new = _solve_at(params.replace(gap=d), model, treatment, x)
        except (NoConvergence, MirrorContact):
            h *= 0.5
            if h < 1e-9:
                _raise_if_fold(params.replace(gap=math.exp(log_d)), model, treatment, x)
                raise
            continue
        log_d, x = trial, x_new
    return x


def _raise_if_fold(params, model, treatment, x):
    # the branch ends where the balance slope vanishes: no equilibrium beyond (pull-in)
    _, fp, _ = _single_balance(params, model, x, treatment)
    k0 = params.mirror_mass * params.mech_freq_1**2
    if fp < FOLD_TOL * k0:
        raise AdhesionRegime(
            f"no static equilibrium below gap {params.gap:.4g} m: the net stiffness of the "
            f"force balance drops to {fp:.4g} N/m and turns negative, the mirror is pulled in"
        )


def solve_single(
    params,
    model=None,
    *,
    treatment=Treatment.EXACT,
    x0=None,
    continuation=True,
    strict=True,
):
    """Steady state of the fixed-sphere system.

    Parameters
    ----------
    params : SystemParams
    model : CasimirModel, optional
        Defaults to ``params.casimir``.
    treatment : {"exact", "quadratic"}
        ``"exact"`` keeps the full ``force(d - x)`` law, ``"quadratic"``
        expands the interaction to second order about ``x = 0``.
    x0 : float, optional
        Seed for a single Newton solve.  Sweeps pass the previous solution
        here; when given, ``continuation`` is ignored.
    continuation : bool
        Track the branch from the trivial state (default) instead of starting
        Newton at ``x = 0`` directly.
    strict : bool
        When False, adhesion is not raised and the (possibly unstable) state
        is returned for classification.

    Raises
    ------
    AdhesionRegime, NoConvergence, MirrorContact
    """
    check(params)
    model = _model(params, model)
    treatment = Treatment(treatment)
    if strict:
        _check_gap(params, model)
    if x0 is not None:
        x = _solve_at(params, model, treatment, x0)
    elif continuation:
        x = _continuation(params, model, treatment)
    else:
        x = _solve_at(params, model, treatment, 0.0)
    state = evaluate_single(params, x, model, treatment)
    if strict and classify_stability(state, params, model) is not Stability.STABLE:
        raise AdhesionRegime(
            f"net stiffness {state.k_eff:.4g} N/m at the solved operating point is not positive"
        )
    return state


# --- moveable sphere -----------------------------------------------------------


def _coupled_springs(params, model, self_shift):
    d = params.gap
    curv = stiffness(model, params, d)
    shift = curv if self_shift else 0.0
    k1 = params.mirror_mass * params.mech_freq_1**2 + shift
    k2 = params.sphere_mass * params.mech_freq_2**2 + shift
    return k1, k2, -curv, force(model, params, d)


def solve_double(params, model=None, *, self_shift=True, x0=None, strict=True):
    """Steady state of mirror + moveable sphere, coupled through hbar*J x1 x2.

    The Casimir interaction is expanded to second order in (x1 - x2): the
    cross term gives the coupling, the static pull acts on the mirror, and
    with ``self_shift`` (default) both springs are softened by U''(d).  With
    ``self_shift=False`` the mechanical frequencies are taken as already
    renormalized inputs.
    """
    check(params)
    if not params.moveable:
        raise ValueError("solve_double needs mode='moveable_sphere'")
    model = _model(params, model)
    k1, k2, hJ, pull = _coupled_springs(params, model, self_shift)
    if strict:
        _check_matrix(params, k1, k2, hJ)
    k_red = k1 - hJ**2 / k2

    def balance(p):
        def fun(x):
            _, n, dn, g = _cavity(p, x)
            rad = HBAR * g * n
            f = k_red * x - pull - rad
            return f, k_red - HBAR * g * dn, max(abs(k_red * x), abs(pull), abs(rad))

        return fun

    if x0 is not None:
        x1 = _newton(balance(params), x0, params.gap)
    else:
        x1 = 0.0
        for frac in np.linspace(0.0, 1.0, POWER_STEPS + 1)[1:]:
            p = params.replace(pump_power=params.pump_power * frac)
            x1 = _newton(balance(p), x1, params.gap)
    x2 = -hJ * x1 / k2
    a, n, _, g = _cavity(params, x1)
    rad = HBAR * g * n
    r1 = abs(k1 * x1 - pull - rad + hJ * x2) / max(abs(k1 * x1), abs(pull), abs(rad), abs(hJ * x2), 1e-300)
    r2 = abs(k2 * x2 + hJ * x1) / max(abs(k2 * x2), abs(hJ * x1), 1e-300)
    ra = abs(a * complex(params.cavity_decay, params.pump_detuning - g * x1) - derive(params).eps_L)
    ra /= max(abs(derive(params).eps_L), 1e-300)
    return SteadyState2(
        a_s=a,
        x1_s=x1,
        x2_s=x2,
        n_s=n,
        k1=k1,
        k2=k2,
        hbar_J=hJ,
        static_pull=pull,
        residual=max(r1, r2, ra),
        gap=params.gap,
        self_shift=self_shift,
    )


def _matrix_class(params, k1, k2, hJ):
    k01 = params.mirror_mass * params.mech_freq_1**2
    k02 = params.sphere_mass * params.mech_freq_2**2
    if k1 <= ADHESION_TOL * k01 or k2 <= ADHESION_TOL * k02:
        return Stability.ADHESIVE
    if k1 * k2 - hJ**2 <= ADHESION_TOL * k01 * k02:
        return Stability.UNSTABLE
    return Stability.STABLE


def _check_matrix(params, k1, k2, hJ):
    cls = _matrix_class(params, k1, k2, hJ)
    if cls is Stability.ADHESIVE:
        raise AdhesionRegime(f"softened spring constants ({k1:.4g}, {k2:.4g}) N/m are not positive")
    if cls is Stability.UNSTABLE:
        raise UnstableCoupledMode(
            f"coupled stiffness matrix [[{k1:.4g}, {hJ:.4g}], [{hJ:.4g}, {k2:.4g}]] is not positive definite"
        )


def classify_stability(state, params, model=None):
    """Static stability of a solved operating point.

    Fixed sphere: stable iff the net stiffness k_eff is positive (relative
    tolerance 1e-6), adhesive otherwise.  Moveable sphere: stable iff the
    2x2 stiffness matrix is positive definite; a non-positive diagonal is
    reported as adhesive, a negative determinant as unstable.
    """
    if isinstance(state, SteadyState2):
        return _matrix_class(params, state.k1, state.k2, state.hbar_J)
    k0 = params.mirror_mass * params.mech_freq_1**2
    if state.k_eff <= ADHESION_TOL * k0:
        return Stability.ADHESIVE
    return Stability.STABLE


"""Time-domain check of the analytic response.

The equations of motion (either linearized about the steady state or in
their full nonlinear classical form) are integrated with an adaptive
explicit Runge-Kutta scheme while the probe is on.  Once transients have
died out, the trajectories are projected onto ``1``, ``e^{-i nu t}`` and
``e^{+i nu t}`` over an integer number of beat periods, which recovers the
steady value and the two sideband amplitudes without any windowing.

State vectors are rescaled to O(1) before integration; the scales only
affect conditioning, not the dynamics.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .casimir import HBAR, effective_frequency, force
from .errors import IntegratorFailure, MirrorContact, NonStationary
from .params import derive
from .steady import SteadyState2, solve_double, solve_single

DRIFT_LIMIT = 1e-6


class OracleVariant(str, enum.Enum):
    LINEARIZED = "linearized"
    FULL = "full"


@dataclass(frozen=True)
class OracleConfig:
    """Integration and demodulation settings.

    ``settle_time=None`` picks the settling time from the slowest decay rate
    of the linearized dynamics so that transients fall by
    ``10**-settle_decades``; it never drops below 5 / min(Gamma_m, gamma).
    ``probe_ratio`` (full variant) sets eps_p = probe_ratio * eps_L instead
    of deriving eps_p from the probe power.
    """

    rtol: float = 1e-10
    atol: float = 1e-14
    settle_time: float | None = None
    demod_periods: int = 64
    variant: OracleVariant = OracleVariant.LINEARIZED
    mech_decay_override: float | None = None
    samples_per_period: int = 32
    settle_decades: float = 9.0
    initial: str = "steady"
    probe_ratio: float | None = None
    method: str = "DOP853"
    dump_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", OracleVariant(self.variant))
        if self.demod_periods < 50:
            raise ValueError("demod_periods must be at least 50")
        if self.samples_per_period < 8:
            raise ValueError("samples_per_period must be at least 8")
        if self.initial not in ("steady", "zero"):
            raise ValueError("initial must be 'steady' or 'zero'")

    def minimum_settle(self, params):
        rates = [params.mech_decay_1, params.cavity_decay]
        if params.moveable:
            rates.append(params.mech_decay_2)
        return 5.0 / min(rates)


@dataclass(frozen=True)
class OracleResult:
    nu: float
    eps_p: float
    a_s: complex
    x_dc: float
    da_plus: complex
    da_minus: complex
    X: complex
    eta: float
    drift: float
    leakage: float
    settle_time: float
    params: object
    X2: complex | None = None
    x2_dc: float | None = None
    n_steps: int = 0


def with_override(params, config):
    """Parameters with the mechanical damping replaced for faster settling."""
    if config.mech_decay_override is None:
        return params
    changes = {"mech_decay_1": config.mech_decay_override}
    if params.moveable:
        changes["mech_decay_2"] = config.mech_decay_override
    return replace(params, **changes)


def demodulate(t, signal, nu):
    """Project ``signal`` sampled on a uniform, endpoint-free grid spanning an
    integer number of periods 2 pi / nu.

    Returns ``(c0, c_plus, c_minus)`` with
    signal ~ c0 + c_plus e^{-i nu t} + c_minus e^{+i nu t}.
    """
    t = np.asarray(t, dtype=float)
    signal = np.asarray(signal)
    phase = np.exp(1j * nu * t)
    c0 = signal.mean()
    c_plus = (signal * phase).mean()
    c_minus = (signal * phase.conj()).mean()
    return complex(c0), complex(c_plus), complex(c_minus)


def leakage_fraction(t, signal, nu, coeffs):
    """Share of the fluctuation power not captured by the three components."""
    c0, cp, cm = coeffs
    fluct = signal - c0
    model = cp * np.exp(-1j * nu * t) + cm * np.exp(1j * nu * t)
    total = float(np.sum(np.abs(fluct) ** 2))
    if total == 0.0:
        return 0.0
    return float(np.sum(np.abs(fluct - model) ** 2)) / total


def _window(nu, config, settle):
    period = 2.0 * math.pi / nu
    n = config.demod_periods * config.samples_per_period
    return settle + period * np.arange(n) / config.samples_per_period


class _System:
    """Scaled first-order form of the equations of motion.

    State layout: [Re u, Im u, w1, v1(, w2, v2)] with
    a = a0 + a_scale * u and x_i = x_i0 + x_scale * w_i.
    """

    def __init__(self, params, model, steady, eps_p, nu, nonlinear, frame):
        self.params = params
        self.model = model
        self.nu = nu
        self.nonlinear = nonlinear
        der = derive(params)
        self.g = der.g
        self.eps_L = der.eps_L
        self.eps_p = eps_p
        self.two = isinstance(steady, SteadyState2)
        if self.two:
            self.x_ss = steady.x1_s
            self.k1, self.k2, self.hJ = steady.k1, steady.k2, steady.hbar_J
            self.pull = steady.static_pull
        else:
            self.x_ss = steady.x_s
            self.omega_eff = effective_frequency(model, params, steady.x_s)
        self.a_ss = steady.a_s
        self.a0, self.x10, self.x20 = frame
        gam = params.cavity_decay
        a_ref = abs(self.a_ss) if self.a_ss != 0 else 0.0
        self.a_scale = eps_p / gam if eps_p > 0 else max(a_ref, 1.0)
        if not nonlinear or frame[0] != 0:
            self.x_scale = gam / self.g * self.a_scale / max(a_ref, self.a_scale)
        else:
            self.x_scale = max(abs(self.x_ss), gam / self.g)

    # linear part about the steady state, used for the dynamics and the settle estimate
    def jacobian(self):
        p = self.params
        D = p.pump_detuning - self.g * self.x_ss
        gam = p.cavity_decay
        A, Xs = self.a_scale, self.x_scale
        c = 1j * self.g * self.a_ss * Xs / A
        k = HBAR * self.g / Xs * A * 2.0
        ar, ai = self.a_ss.real, self.a_ss.imag
        n = 6 if self.two else 4
        M = np.zeros((n, n))
        M[0, 0], M[0, 1], M[0, 2] = -gam, D, c.real
        M[1, 0], M[1, 1], M[1, 2] = -D, -gam, c.imag
        M[2, 3] = 1.0
        if self.two:
            m1, m2 = p.mirror_mass, p.sphere_mass
            M[3, 0], M[3, 1] = k * ar / m1, k * ai / m1
            M[3, 2], M[3, 3], M[3, 4] = -self.k1 / m1, -p.mech_decay_1, -self.hJ / m1
            M[4, 5] = 1.0
            M[5, 2], M[5, 4], M[5, 5] = -self.hJ / m2, -self.k2 / m2, -p.mech_decay_2
        else:
            m = p.mirror_mass
            M[3, 0], M[3, 1] = k * ar / m, k * ai / m
            M[3, 2], M[3, 3] = -self.omega_eff**2, -p.mech_decay_1
        return M

    def slowest_rate(self):
        lam = np.linalg.eigvals(self.jacobian())
        return float(np.min(-lam.real))

    def first_step(self):
        # the automatic initial step can exceed a mechanical period when starting at rest
        return 0.01 / float(np.max(np.abs(np.linalg.eigvals(self.jacobian()))))

    def tolerances(self, atol):
        # velocities carry an extra factor of the mechanical frequency; an unscaled
        # atol on them is below the roundoff of the force sum and stalls the stepper
        tol = np.full(6 if self.two else 4, atol)
        tol[3] = atol * self.params.mech_freq_1
        if self.two:
            tol[5] = atol * self.params.mech_freq_2
        return tol

    def linear_rhs(self):
        M = self.jacobian()
        f = self.eps_p / self.a_scale
        nu = self.nu

        def rhs(t, y):
            dy = M @ y
            dy[0] += f * math.cos(nu * t)
            dy[1] -= f * math.sin(nu * t)
            return dy

        return rhs

    def full_rhs(self):
        p = self.params
        g, gam, Dl = self.g, p.cavity_decay, p.pump_detuning
        A, Xs = self.a_scale, self.x_scale
        a0, x10, x20 = self.a0, self.x10, self.x20
        lin0 = complex(-gam, g * x10 - Dl)
        r_cav = lin0 * a0 + self.eps_L
        f = self.eps_p / A
        nu = self.nu
        m1 = p.mirror_mass
        G1 = p.mech_decay_1
        if self.two:
            m2, G2 = p.sphere_mass, p.mech_decay_2
            k1, k2, hJ, pull = self.k1, self.k2, self.hJ, self.pull
            r1 = (-k1 * x10 + pull + HBAR * g * abs(a0) ** 2 - hJ * x20) / m1
            r2 = (-k2 * x20 - hJ * x10) / m2
        else:
            model, d = self.model, p.gap
            w2 = p.mech_freq_1**2
            f0 = force(model, p, d - x10)
            r1 = -w2 * x10 + (f0 + HBAR * g * abs(a0) ** 2) / m1

        def rhs(t, y):
            u = complex(y[0], y[1])
            dx1 = Xs * y[2]
            a = a0 + A * u
            du = (r_cav + lin0 * A * u + 1j * g * dx1 * a) / A
            du += f * complex(math.cos(nu * t), -math.sin(nu * t))
            rad = HBAR * g * ((a0.conjugate() * A * u).real * 2.0 + A * A * (u.real**2 + u.imag**2))
            out = np.empty_like(y)
            out[0], out[1] = du.real, du.imag
            out[2] = y[3]
            if self.two:
                dx2 = Xs * y[4]
                acc1 = r1 + (-k1 * dx1 + rad - hJ * dx2) / m1
                acc2 = r2 + (-k2 * dx2 - hJ * dx1) / m2
                out[3] = acc1 / Xs - G1 * y[3]
                out[4] = y[5]
                out[5] = acc2 / Xs - G2 * y[5]
            else:
                # trial stages may probe past contact; the terminal event reports it
                gap = max(d - x10 - dx1, 1e-3 * d)
                dpull = force(model, p, gap) - f0
                acc = r1 - w2 * dx1 + (dpull + rad) / m1
                out[3] = acc / Xs - G1 * y[3]
            return out

        return rhs

    def unscale(self, y):
        a = self.a0 + self.a_scale * (y[0] + 1j * y[1])
        x1 = self.x10 + self.x_scale * y[2]
        x2 = self.x20 + self.x_scale * y[4] if self.two else None
        return a, x1, x2


def _settle(system, params, config, extra_decades=0.0):
    floor = config.minimum_settle(params)
    if config.settle_time is not None:
        if config.settle_time < floor:
            raise ValueError(f"settle_time must be at least {floor:.4g} s")
        return config.settle_time
    rate = system.slowest_rate()
    if not rate > 0:
        raise NonStationary(f"linearized dynamics do not decay (slowest rate {rate:.4g} 1/s)")
    return max(floor, (config.settle_decades + extra_decades) * math.log(10.0) / rate)


def _integrate(rhs, y0, t_end, samples, config, contact=None, first_step=None, atol=None):
    events = None
    if contact is not None:
        contact.terminal = True
        events = [contact]
    try:
        sol = solve_ivp(
            rhs,
            (0.0, t_end),
            y0,
            method=config.method,
            t_eval=samples,
            rtol=config.rtol,
            atol=config.atol if atol is None else atol,
            events=events,
            first_step=first_step,
        )
    except Exception as exc:  # scipy raises plain ValueError/RuntimeError
        raise IntegratorFailure(str(exc)) from exc
    if not sol.success:
        raise IntegratorFailure(sol.message)
    if sol.status == 1:
        raise MirrorContact(f"mirror reached the sphere at t = {sol.t_events[0][0]:.6g} s")
    return sol


def _extract(system, sol, nu, config, params, eps_p, settle):
    t = sol.t
    a, x1, x2 = system.unscale(sol.y)
    ca = demodulate(t, a, nu)
    cx = demodulate(t, x1, nu)
    half = len(t) // 2
    # beat periods split evenly only when demod_periods is even
    half -= half % config.samples_per_period
    first = demodulate(t[:half], a[:half], nu)[1]
    second = demodulate(t[half : 2 * half], a[half : 2 * half], nu)[1]
    ref = max(abs(ca[1]), 1e-300)
    drift = abs(first - second) / ref if eps_p > 0 else abs(first - second)
    leak = leakage_fraction(t, a, nu, ca)
    cx2 = demodulate(t, x2, nu) if x2 is not None else None
    if eps_p > 0:
        t_amp = 1.0 - 2.0 * params.coupling_ratio * params.cavity_decay * ca[1] / eps_p
        eta_val = t_amp.real**2 + t_amp.imag**2
    else:
        eta_val = math.nan
    if config.dump_path:
        _dump(config.dump_path, t, a, x1, x2)
    return OracleResult(
        nu=nu,
        eps_p=eps_p,
        a_s=ca[0],
        x_dc=cx[0].real,
        da_plus=ca[1],
        da_minus=ca[2],
        X=cx[1],
        eta=eta_val,
        drift=drift,
        leakage=leak,
        settle_time=settle,
        params=params,
        X2=cx2[1] if cx2 is not None else None,
        x2_dc=cx2[0].real if cx2 is not None else None,
        n_steps=int(sol.nfev),
    )


def _dump(path, t, a, x1, x2):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re_a", "im_a", "x1"] + (["x2"] if x2 is not None else []))
        for i in range(len(t)):
            row = [repr(float(t[i])), repr(float(a[i].real)), repr(float(a[i].imag)), repr(float(x1[i]))]
            if x2 is not None:
                row.append(repr(float(x2[i])))
            w.writerow(row)


def integrate_linearized(params, steady, nu, config=OracleConfig(), model=None):
    """Integrate the linearized fluctuation equations from rest and demodulate.

    ``steady`` must come from the same (possibly overridden) parameters; the
    mechanical damping override only changes the fluctuation dynamics.  The
    returned ``a_s``/``x_dc`` are the mean fluctuations (zero for a linear
    system); sideband amplitudes are in physical units.
    """
    model = params.casimir if model is None else model
    params = with_override(params, config)
    eps_p = derive(params).eps_p
    system = _System(params, model, steady, eps_p, nu, nonlinear=False, frame=(0j, 0.0, 0.0))
    settle = _settle(system, params, config)
    samples = _window(nu, config, settle)
    y0 = np.zeros(6 if system.two else 4)
    sol = _integrate(
        system.linear_rhs(),
        y0,
        samples[-1],
        samples,
        config,
        first_step=system.first_step(),
        atol=system.tolerances(config.atol),
    )
    res = _extract(system, sol, nu, config, params, eps_p, settle)
    if eps_p > 0 and res.drift > DRIFT_LIMIT:
        raise NonStationary(f"sideband drift {res.drift:.3g} over the demodulation window")
    return res


def integrate_full(params, nu, config=OracleConfig(variant=OracleVariant.FULL), model=None, steady=None):
    """Integrate the full nonlinear equations of motion and demodulate.

    The trajectory starts either at the solved steady state
    (``config.initial == "steady"``) or with an empty cavity and the mirror at
    rest at x = 0 (``"zero"``).  The steady state is also used to estimate the
    settling time.  ``steady`` may be passed to avoid re-solving.
    """
    model = params.casimir if model is None else model
    params = with_override(params, config)
    if steady is None:
        steady = solve_double(params, model) if params.moveable else solve_single(params, model)
    der = derive(params)
    eps_p = config.probe_ratio * der.eps_L if config.probe_ratio is not None else der.eps_p
    if config.initial == "steady":
        if isinstance(steady, SteadyState2):
            frame = (steady.a_s, steady.x1_s, steady.x2_s)
        else:
            frame = (steady.a_s, steady.x_s, 0.0)
        extra = 0.0
    else:
        frame = (0j, 0.0, 0.0)
        extra = 3.0
    system = _System(params, model, steady, eps_p, nu, nonlinear=True, frame=frame)
    settle = _settle(system, params, config, extra)
    samples = _window(nu, config, settle)
    y0 = np.zeros(6 if system.two else 4)
    contact = None
    if not system.two:
        gap0 = params.gap - frame[1]

        def contact(t, y):
            return gap0 - system.x_scale * y[2]

    sol = _integrate(
        system.full_rhs(),
        y0,
        samples[-1],
        samples,
        config,
        contact,
        system.first_step(),
        system.tolerances(config.atol),
    )
    return _extract(system, sol, nu, config, params, eps_p, settle)

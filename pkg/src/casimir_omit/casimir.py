"""Sphere-plate Casimir interaction between the moveable mirror and the sphere.

All evaluators take the separation ``s`` (metres) between the two surfaces.
Sign conventions:

* ``potential(s)`` is the interaction energy U(s), negative for an
  attractive law and vanishing as s -> inf.
* ``force(s)`` is the *magnitude* of the attraction, dU/ds > 0.  The
  generalized force along increasing s is ``-force(s)``; on the mirror
  coordinate x (gap ``d - x``) the Casimir pull is ``+force(d - x)``.
* ``stiffness(s)`` is U''(s).  For the ideal PFA law it is negative, i.e.
  the Casimir term softens the mechanical spring.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import AdhesionRegime, ModelHasNoAdhesion, NonPositiveSeparation

HBAR = 1.054571817e-34
C_LIGHT = 2.99792458e8

BETA_DEFAULT = 2.0 / 3.0 - 10.0 / math.pi**2


class Law(str, enum.Enum):
    OFF = "off"
    IDEAL_PFA = "ideal_pfa"
    PFA_CORRECTED = "pfa_corrected"
    POWER_LAW = "power_law"


@dataclass(frozen=True)
class CasimirModel:
    """Selectable force law.

    ``beta`` is only used by ``PFA_CORRECTED``; ``amplitude`` (J m^(n-1))
    and ``exponent`` n only by ``POWER_LAW``, whose potential is
    ``-amplitude / s**(n - 1)`` so that the force falls off as ``s**-n``.
    """

    law: Law = Law.IDEAL_PFA
    beta: float = BETA_DEFAULT
    amplitude: float | None = None
    exponent: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "law", Law(self.law))
        if self.law is Law.POWER_LAW:
            if self.amplitude is None or not self.amplitude > 0:
                raise ValueError("power law needs a positive amplitude")
            if self.exponent is None or int(self.exponent) != self.exponent or self.exponent < 2:
                raise ValueError("power law exponent must be an integer >= 2")
            object.__setattr__(self, "exponent", int(self.exponent))

    @classmethod
    def off(cls):
        return cls(Law.OFF)

    @classmethod
    def ideal_pfa(cls):
        return cls(Law.IDEAL_PFA)

    @classmethod
    def pfa_corrected(cls, beta=BETA_DEFAULT):
        return cls(Law.PFA_CORRECTED, beta=beta)

    @classmethod
    def power_law(cls, amplitude, exponent):
        return cls(Law.POWER_LAW, amplitude=amplitude, exponent=exponent)

    @property
    def is_off(self):
        return self.law is Law.OFF


def sphere_plate_coefficient(radius):
    """Return V_sp = -pi^3 hbar c R / 720 in J m^2."""
    return -(math.pi**3) * HBAR * C_LIGHT * radius / 720.0


@dataclass(frozen=True)
class CasimirCoefficients:
    model: CasimirModel
    radius: float

    @property
    def v_sp(self):
        return sphere_plate_coefficient(self.radius)

    def potential_at(self, s):
        return _potential(self.model, self.radius, s)

    def force_at(self, s):
        return _force(self.model, self.radius, s)

    def stiffness_at(self, s):
        return _stiffness(self.model, self.radius, s)


def coefficients(model, params):
    return CasimirCoefficients(model, params.sphere_radius)


def _check_separation(s):
    if np.any(np.asarray(s) <= 0):
        raise NonPositiveSeparation(f"separation must be positive, got {s!r}")


def _potential(model, radius, s):
    _check_separation(s)
    law = model.law
    if law is Law.OFF:
        return 0.0 * s
    if law is Law.POWER_LAW:
        return -model.amplitude / s ** (model.exponent - 1)
    v = sphere_plate_coefficient(radius)
    u = v / s**2
    if law is Law.PFA_CORRECTED:
        # integral of the corrected force from s to infinity
        u = u * (1.0 + (s / radius) * (2.0 * model.beta - 1.0))
    return u


def _force(model, radius, s):
    _check_separation(s)
    law = model.law
    if law is Law.OFF:
        return 0.0 * s
    if law is Law.POWER_LAW:
        n = model.exponent
        return (n - 1) * model.amplitude / s**n
    f = -2.0 * sphere_plate_coefficient(radius) / s**3
    if law is Law.PFA_CORRECTED:
        f = f * (1.0 + (s / (2.0 * radius)) * (2.0 * model.beta - 1.0))
    return f


def _stiffness(model, radius, s):
    _check_separation(s)
    law = model.law
    if law is Law.OFF:
        return 0.0 * s
    if law is Law.POWER_LAW:
        n = model.exponent
        return -n * (n - 1) * model.amplitude / s ** (n + 1)
    v = sphere_plate_coefficient(radius)
    k = 6.0 * v / s**4
    if law is Law.PFA_CORRECTED:
        k = k + 2.0 * v * (2.0 * model.beta - 1.0) / (radius * s**3)
    return k


def potential(model, params, s):
    """Interaction energy U(s) in joules."""
    return _potential(model, params.sphere_radius, s)


def force(model, params, s):
    """Magnitude of the attractive Casimir force, dU/ds, in newtons."""
    return _force(model, params.sphere_radius, s)


def stiffness(model, params, s):
    """Curvature U''(s) of the interaction, in N/m (negative = softening)."""
    return _stiffness(model, params.sphere_radius, s)


def _oscillator(params, oscillator):
    if oscillator == 1:
        return params.mirror_mass, params.mech_freq_1
    if oscillator == 2:
        if params.sphere_mass is None or params.mech_freq_2 is None:
            raise ValueError("second oscillator is not configured")
        return params.sphere_mass, params.mech_freq_2
    raise ValueError(f"oscillator must be 1 or 2, got {oscillator}")


def effective_frequency(model, params, x_s=0.0, *, oscillator=1, gap=None):
    """Mechanical frequency shifted by the Casimir curvature at the operating point.

    Omega_m = sqrt(omega_m^2 + U''(d - x_s) / m).  Raises ``AdhesionRegime``
    when the shifted squared frequency is not positive.
    """
    mass, omega = _oscillator(params, oscillator)
    d = params.gap if gap is None else gap
    s = d - x_s
    if s <= 0:
        raise NonPositiveSeparation(f"d - x_s = {s!r} must be positive")
    w2 = omega**2 + _stiffness(model, params.sphere_radius, s) / mass
    if w2 <= 0:
        raise AdhesionRegime(
            f"Casimir curvature {stiffness(model, params, s):.6g} N/m exceeds the "
            f"restoring stiffness {mass * omega**2:.6g} N/m at separation {s:.6g} m"
        )
    return math.sqrt(w2)


def coupling_J(model, params, d=None):
    """Inter-mode coupling J in 1/(s m^2); hbar*J is the cross-spring constant."""
    d = params.gap if d is None else d
    _check_separation(d)
    if model.law is Law.IDEAL_PFA:
        return math.pi**3 * C_LIGHT * params.sphere_radius / (120.0 * d**4)
    return -_stiffness(model, params.sphere_radius, d) / HBAR


def critical_separation(model, params, *, oscillator=1):
    """Separation at which m omega_m^2 + U''(d) = 0.

    Below it the linearized stiffness of the mirror is non-positive and the
    mirror sticks to the sphere.
    """
    mass, omega = _oscillator(params, oscillator)
    k0 = mass * omega**2
    law = model.law
    if law is Law.OFF:
        raise ModelHasNoAdhesion("Casimir interaction is switched off")
    if law is Law.IDEAL_PFA:
        v = sphere_plate_coefficient(params.sphere_radius)
        return (6.0 * abs(v) / k0) ** 0.25
    if law is Law.POWER_LAW:
        n = model.exponent
        return (n * (n - 1) * model.amplitude / k0) ** (1.0 / (n + 1))

    def total(s):
        return k0 + _stiffness(model, params.sphere_radius, s)

    lo, hi = 1e-13, 1e-9
    while total(hi) <= 0:
        hi *= 2.0
        if hi > params.sphere_radius * 1e3:
            raise ModelHasNoAdhesion("no stable separation found")
    if total(lo) > 0:
        raise ModelHasNoAdhesion("stiffness stays positive down to 0.1 pm")
    return brentq(total, lo, hi, xtol=1e-24, rtol=4 * np.finfo(float).eps)

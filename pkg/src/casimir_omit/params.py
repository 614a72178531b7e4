"""Physical constants, system parameters and their derived quantities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .casimir import C_LIGHT, HBAR, CasimirModel, critical_separation
from .errors import InvalidParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Constants:
    hbar: float = HBAR
    c: float = C_LIGHT


CONSTANTS = Constants()


class Mode(str, enum.Enum):
    FIXED_SPHERE = "fixed_sphere"
    MOVEABLE_SPHERE = "moveable_sphere"


@dataclass(frozen=True)
class SystemParams:
    """Experimental configuration, SI units throughout.

    Rates are angular (rad/s); ``cavity_decay`` is the amplitude decay rate
    gamma.  ``coupling_ratio`` is the fraction of gamma that leaks through the
    input/output port: 1/2 is critical coupling, 1 reproduces the lossless
    one-port input-output relation.
    """

    wavelength: float
    cavity_length: float
    sphere_radius: float
    gap: float
    mirror_mass: float
    cavity_decay: float
    mech_decay_1: float
    mech_freq_1: float
    pump_detuning: float
    pump_power: float
    probe_power: float = 1e-6
    coupling_ratio: float = 0.5
    sphere_mass: float | None = None
    mech_decay_2: float | None = None
    mech_freq_2: float | None = None
    casimir: CasimirModel = field(default_factory=CasimirModel)
    mode: Mode = Mode.FIXED_SPHERE

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))

    def replace(self, **changes):
        return replace(self, **changes)

    @property
    def moveable(self):
        return self.mode is Mode.MOVEABLE_SPHERE


def paper_baseline(**overrides):
    """Parameter set of the reference experiment (1064 nm, 25 mm cavity,
    150 nm sphere, 145 ng mirror, pump detuned by the mechanical frequency).

    The sphere oscillator, when enabled with ``mode="moveable_sphere"``,
    defaults to a copy of the mirror oscillator.
    """
    omega_m = TWO_PI * 947e3
    values = dict(
        wavelength=1064e-9,
        cavity_length=25e-3,
        sphere_radius=150e-9,
        gap=2e-9,
        mirror_mass=145e-12,
        cavity_decay=TWO_PI * 80e3,
        mech_decay_1=TWO_PI * 141.0,
        mech_freq_1=omega_m,
        pump_detuning=omega_m,
        pump_power=1e-3,
        probe_power=1e-6,
        coupling_ratio=0.5,
    )
    values.update(overrides)
    if Mode(values.get("mode", Mode.FIXED_SPHERE)) is Mode.MOVEABLE_SPHERE:
        values.setdefault("sphere_mass", values["mirror_mass"])
        values.setdefault("mech_freq_2", values["mech_freq_1"])
        values.setdefault("mech_decay_2", values["mech_decay_1"])
    return SystemParams(**values)


@dataclass(frozen=True)
class DerivedParams:
    omega_c: float
    g: float
    omega_L: float
    omega_p: float
    eps_L: float
    eps_p: float
    pump_detuning: float

    def delta_p(self, nu):
        """Probe-cavity detuning omega_p - omega_c for a probe-pump beat nu."""
        return nu - self.pump_detuning

    def nu(self, delta_p):
        return delta_p + self.pump_detuning


def drive_amplitude(power, frequency, params):
    """Field amplitude sqrt(2 P eta_c gamma / (hbar omega)) in 1/s."""
    return math.sqrt(2.0 * power * params.coupling_ratio * params.cavity_decay / (HBAR * frequency))


def derive(params):
    omega_c = TWO_PI * C_LIGHT / params.wavelength
    omega_L = omega_c - params.pump_detuning
    # probe normalization frequency fixed at nu = omega_m1 for a whole sweep
    omega_p = omega_L + params.mech_freq_1
    return DerivedParams(
        omega_c=omega_c,
        g=omega_c / params.cavity_length,
        omega_L=omega_L,
        omega_p=omega_p,
        eps_L=drive_amplitude(params.pump_power, omega_L, params),
        eps_p=drive_amplitude(params.probe_power, omega_p, params),
        pump_detuning=params.pump_detuning,
    )


# --- validation ----------------------------------------------------------------

PFA_RATIO_LIMIT = 0.1
THERMAL_GAP = 1e-6
ADHESION_MARGIN = 1.2


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    code: str
    field: str
    message: str

    @property
    def is_error(self):
        return self.level == "error"


def _positive(value):
    try:
        return value is not None and math.isfinite(value) and value > 0
    except TypeError:
        return False


def validate(params):
    """Return a list of ``Diagnostic`` entries; never raises."""
    out = []

    def error(name, message):
        out.append(Diagnostic("error", "INVALID", name, message))

    for name in (
        "wavelength",
        "cavity_length",
        "sphere_radius",
        "gap",
        "mirror_mass",
        "cavity_decay",
        "mech_decay_1",
        "mech_freq_1",
    ):
        if not _positive(getattr(params, name)):
            error(name, f"must be strictly positive, got {getattr(params, name)!r}")
    for name in ("pump_power", "probe_power"):
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
            error(name, f"must be non-negative, got {value!r}")
    eta_c = params.coupling_ratio
    if not (isinstance(eta_c, (int, float)) and 0 < eta_c <= 1):
        error("coupling_ratio", f"must lie in (0, 1], got {eta_c!r}")
    if not isinstance(params.pump_detuning, (int, float)) or not math.isfinite(params.pump_detuning):
        error("pump_detuning", "must be a finite number")
    if params.moveable:
        for name in ("sphere_mass", "mech_decay_2", "mech_freq_2"):
            if not _positive(getattr(params, name)):
                error(name, "required and strictly positive for a moveable sphere")

    if out:
        return out

    d, radius = params.gap, params.sphere_radius
    if d / radius > PFA_RATIO_LIMIT:
        out.append(
            Diagnostic(
                "warning",
                "PFA_VALIDITY",
                "gap",
                f"d/R = {d / radius:.3g} > {PFA_RATIO_LIMIT}; proximity approximation is doubtful",
            )
        )
    if d >= THERMAL_GAP:
        out.append(
            Diagnostic(
                "warning",
                "THERMAL_REGIME",
                "gap",
                f"d = {d:.3g} m; thermal Casimir contribution is no longer negligible",
            )
        )
    if not params.casimir.is_off:
        try:
            d_crit = critical_separation(params.casimir, params)
        except Exception:  # no adhesion threshold for this law
            d_crit = None
        if d_crit is not None and d <= ADHESION_MARGIN * d_crit:
            out.append(
                Diagnostic(
                    "warning",
                    "ADHESION_RISK",
                    "gap",
                    f"d = {d:.4g} m is within {ADHESION_MARGIN}x the adhesion threshold {d_crit:.4g} m",
                )
            )
    return out


def check(params):
    """Raise ``InvalidParams`` if ``validate`` reports any error; return warnings."""
    diags = validate(params)
    errors = [x for x in diags if x.is_error]
    if errors:
        raise InvalidParams(errors)
    return diags

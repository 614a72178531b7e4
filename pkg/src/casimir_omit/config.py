"""Run configuration for the command-line front end.

A configuration is a JSON object with the sections below; every key is
optional and unknown keys are rejected.  Dimensioned scalars may be given as
plain SI numbers or as strings with a unit suffix, e.g. ``"2 nm"``,
``"1 mW"`` or ``"947 kHz_x2pi"`` (an angular rate 2 pi * 947e3 rad/s).

    params    system parameters (see ``SystemParams``), plus ``mode``
    casimir   law, beta, amplitude, exponent
    solver    treatment ("exact" | "quadratic"), self_shift (bool)
    spectrum  points, span (fraction of omega_m) or start/stop (rad/s)
    switch    d_min, d_max, points, delta_p
    oracle    delta_p (list), variant, probe_ratio, mech_decay_override,
              rtol, atol, settle_time, demod_periods
    cases     list of {name, params, casimir}: one output file per case
    output    prefix (file stem), svg (bool)
"""

from __future__ import annotations

import copy
import json
import re
from decimal import Decimal
from dataclasses import dataclass, field

import numpy as np

from .casimir import CasimirModel, Law
from .params import TWO_PI, Mode, SystemParams, paper_baseline
from .steady import Treatment

# --- units ------------------------------------------------------------------

# unit -> (decimal exponent, extra factor of 2 pi)
UNITS = {
    "length": {"m": (0, False), "mm": (-3, False), "um": (-6, False), "nm": (-9, False)},
    "mass": {
        "kg": (0, False),
        "g": (-3, False),
        "mg": (-6, False),
        "ug": (-9, False),
        "ng": (-12, False),
        "pg": (-15, False),
    },
    "rate": {
        "rad/s": (0, False),
        "Hz_x2pi": (0, True),
        "kHz_x2pi": (3, True),
        "MHz_x2pi": (6, True),
    },
    "power": {"W": (0, False), "mW": (-3, False), "uW": (-6, False), "nW": (-9, False)},
    "time": {"s": (0, False), "ms": (-3, False), "us": (-6, False)},
}

PARAM_DIMENSIONS = {
    "wavelength": "length",
    "cavity_length": "length",
    "sphere_radius": "length",
    "gap": "length",
    "mirror_mass": "mass",
    "sphere_mass": "mass",
    "cavity_decay": "rate",
    "mech_decay_1": "rate",
    "mech_decay_2": "rate",
    "mech_freq_1": "rate",
    "mech_freq_2": "rate",
    "pump_detuning": "rate",
    "pump_power": "power",
    "probe_power": "power",
    "coupling_ratio": None,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/_0-9]+)?\s*$")


class ConfigError(ValueError):
    """Bad configuration; ``field`` names the offending key path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def parse_quantity(value, dimension, where):
    """Convert a number or a unit-suffixed string to an SI float."""
    if isinstance(value, bool):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(where, f"expected a number or quantity string, got {value!r}")
    m = _QUANTITY.match(value)
    if m is None:
        raise ConfigError(where, f"cannot parse quantity {value!r}")
    number, unit = m.group(1), m.group(2)
    if unit is None:
        return float(number)
    if dimension is None:
        raise ConfigError(where, f"dimensionless value cannot carry unit {unit!r}")
    table = UNITS[dimension]
    if unit not in table:
        for dim, units in UNITS.items():
            if unit in units:
                raise ConfigError(where, f"unit {unit!r} is a {dim}, expected a {dimension}")
        raise ConfigError(where, f"unknown unit {unit!r}")
    exponent, angular = table[unit]
    # scale in decimal so that "3 nm" is the double nearest 3e-9
    value = float(Decimal(number).scaleb(exponent))
    return value * TWO_PI if angular else value


def _number(value, where, *, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _bool(value, where):
    if not isinstance(value, bool):
        raise ConfigError(where, f"expected true or false, got {value!r}")
    return value


def _section(doc, name, allowed):
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    unknown = sorted(set(sec) - set(allowed))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown key")
    return sec


# --- structured config --------------------------------------------------------


@dataclass(frozen=True)
class SpectrumGrid:
    points: int = 2001
    span: float = 0.04
    start: float | None = None
    stop: float | None = None

    def values(self, params):
        if self.start is not None:
            return np.linspace(self.start, self.stop, self.points)
        half = self.span * params.mech_freq_1
        return np.linspace(-half, half, self.points)


@dataclass(frozen=True)
class SwitchGrid:
    d_min: float = 1e-9
    d_max: float = 10e-9
    points: int = 181
    delta_p: float = 0.0

    def values(self):
        return np.linspace(self.d_min, self.d_max, self.points)


@dataclass(frozen=True)
class OracleSettings:
    delta_p: tuple = (-4e4, -2e4, 0.0, 2e4, 4e4)
    variant: str = "full"
    probe_ratio: float | None = 1e-3
    mech_decay_override: float | None = TWO_PI * 5e3
    rtol: float = 1e-10
    atol: float = 1e-14
    settle_time: float | None = None
    demod_periods: int = 64


@dataclass(frozen=True)
class Case:
    name: str
    params: SystemParams


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    treatment: Treatment = Treatment.EXACT
    self_shift: bool = True
    spectrum: SpectrumGrid = field(default_factory=SpectrumGrid)
    switch: SwitchGrid = field(default_factory=SwitchGrid)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    cases: tuple = ()
    prefix: str | None = None
    svg: bool = False
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def expanded_cases(self):
        if self.cases:
            return list(self.cases)
        return [Case("", self.params)]


_PARAM_KEYS = set(PARAM_DIMENSIONS) | {"mode"}
_CASIMIR_KEYS = {"law", "beta", "amplitude", "exponent"}


def _parse_params(sec, where, base=None):
    values = {}
    for key, raw in sec.items():
        if key == "mode":
            if raw not in ("fixed_sphere", "moveable_sphere"):
                raise ConfigError(f"{where}.mode", f"unknown mode {raw!r}")
            values[key] = raw
        else:
            values[key] = parse_quantity(raw, PARAM_DIMENSIONS[key], f"{where}.{key}")
    if base is None:
        return paper_baseline(**values)
    merged = {k: getattr(base, k) for k in PARAM_DIMENSIONS}
    merged["mode"] = base.mode
    merged.update(values)
    if Mode(merged["mode"]) is Mode.MOVEABLE_SPHERE:
        for k2, k1 in (("sphere_mass", "mirror_mass"), ("mech_freq_2", "mech_freq_1"), ("mech_decay_2", "mech_decay_1")):
            if merged.get(k2) is None:
                merged[k2] = merged[k1]
    merged["casimir"] = base.casimir
    return SystemParams(**merged)


def _parse_casimir(sec, where, base=None):
    base = base or CasimirModel()
    try:
        law = Law(sec.get("law", base.law))
    except ValueError:
        raise ConfigError(f"{where}.law", f"unknown law {sec.get('law')!r}") from None
    beta = _number(sec["beta"], f"{where}.beta") if "beta" in sec else base.beta
    amp = parse_quantity(sec["amplitude"], None, f"{where}.amplitude") if "amplitude" in sec else base.amplitude
    exp = _number(sec["exponent"], f"{where}.exponent", integer=True) if "exponent" in sec else base.exponent
    try:
        return CasimirModel(law, beta=beta, amplitude=amp, exponent=exp)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _parse_system(params_sec, casimir_sec, where, base=None):
    unknown = sorted(set(params_sec) - _PARAM_KEYS)
    if unknown:
        raise ConfigError(f"{where}params.{unknown[0]}", "unknown key")
    unknown = sorted(set(casimir_sec) - _CASIMIR_KEYS)
    if unknown:
        raise ConfigError(f"{where}casimir.{unknown[0]}", "unknown key")
    params = _parse_params(params_sec, f"{where}params", base)
    model = _parse_casimir(casimir_sec, f"{where}casimir", base.casimir if base else None)
    return params.replace(casimir=model)


TOP_KEYS = {"params", "casimir", "solver", "spectrum", "switch", "oracle", "cases", "output"}


def parse_config(doc):
    """Build a ``RunConfig`` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")

    params_sec = doc.get("params", {})
    casimir_sec = doc.get("casimir", {})
    if not isinstance(params_sec, dict):
        raise ConfigError("params", "must be an object")
    if not isinstance(casimir_sec, dict):
        raise ConfigError("casimir", "must be an object")
    params = _parse_system(params_sec, casimir_sec, "")

    solver = _section(doc, "solver", {"treatment", "self_shift"})
    try:
        treatment = Treatment(solver.get("treatment", "exact"))
    except ValueError:
        raise ConfigError("solver.treatment", f"unknown treatment {solver.get('treatment')!r}") from None
    self_shift = _bool(solver.get("self_shift", True), "solver.self_shift")

    spec = _section(doc, "spectrum", {"points", "span", "start", "stop"})
    points = _number(spec.get("points", 2001), "spectrum.points", integer=True)
    if points < 1:
        raise ConfigError("spectrum.points", "must be at least 1")
    if ("start" in spec) != ("stop" in spec):
        raise ConfigError("spectrum", "start and stop must be given together")
    if "start" in spec and "span" in spec:
        raise ConfigError("spectrum.span", "cannot be combined with start/stop")
    start = parse_quantity(spec["start"], "rate", "spectrum.start") if "start" in spec else None
    stop = parse_quantity(spec["stop"], "rate", "spectrum.stop") if "stop" in spec else None
    if start is not None and not stop > start:
        raise ConfigError("spectrum.stop", "must exceed start")
    span = _number(spec.get("span", 0.04), "spectrum.span")
    if not span > 0:
        raise ConfigError("spectrum.span", "must be positive")
    spectrum = SpectrumGrid(points, span, start, stop)

    sw = _section(doc, "switch", {"d_min", "d_max", "points", "delta_p"})
    switch = SwitchGrid(
        d_min=parse_quantity(sw.get("d_min", 1e-9), "length", "switch.d_min"),
        d_max=parse_quantity(sw.get("d_max", 10e-9), "length", "switch.d_max"),
        points=_number(sw.get("points", 181), "switch.points", integer=True),
        delta_p=parse_quantity(sw.get("delta_p", 0.0), "rate", "switch.delta_p"),
    )
    if not 0 < switch.d_min < switch.d_max:
        raise ConfigError("switch.d_max", "need 0 < d_min < d_max")
    if switch.points < 2:
        raise ConfigError("switch.points", "must be at least 2")

    osec = _section(
        doc,
        "oracle",
        {"delta_p", "variant", "probe_ratio", "mech_decay_override", "rtol", "atol", "settle_time", "demod_periods"},
    )
    defaults = OracleSettings()
    dps = osec.get("delta_p", list(defaults.delta_p))
    if not isinstance(dps, list) or not dps:
        raise ConfigError("oracle.delta_p", "must be a non-empty list")
    variant = osec.get("variant", defaults.variant)
    if variant not in ("linearized", "full"):
        raise ConfigError("oracle.variant", f"unknown variant {variant!r}")

    def optional(key, dim):
        value = osec.get(key, getattr(defaults, key))
        return None if value is None else parse_quantity(value, dim, f"oracle.{key}")

    oracle = OracleSettings(
        delta_p=tuple(parse_quantity(v, "rate", f"oracle.delta_p[{i}]") for i, v in enumerate(dps)),
        variant=variant,
        probe_ratio=optional("probe_ratio", None),
        mech_decay_override=optional("mech_decay_override", "rate"),
        rtol=_number(osec.get("rtol", defaults.rtol), "oracle.rtol"),
        atol=_number(osec.get("atol", defaults.atol), "oracle.atol"),
        settle_time=optional("settle_time", "time"),
        demod_periods=_number(osec.get("demod_periods", defaults.demod_periods), "oracle.demod_periods", integer=True),
    )
    if oracle.demod_periods < 50:
        raise ConfigError("oracle.demod_periods", "must be at least 50")

    raw_cases = doc.get("cases", [])
    if not isinstance(raw_cases, list):
        raise ConfigError("cases", "must be a list")
    cases, names = [], set()
    for i, entry in enumerate(raw_cases):
        where = f"cases[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(where, "must be an object")
        unknown = sorted(set(entry) - {"name", "params", "casimir"})
        if unknown:
            raise ConfigError(f"{where}.{unknown[0]}", "unknown key")
        name = entry.get("name")
        if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
            raise ConfigError(f"{where}.name", "must be a non-empty [A-Za-z0-9_.-] string")
        if name in names:
            raise ConfigError(f"{where}.name", f"duplicate case name {name!r}")
        names.add(name)
        cp = entry.get("params", {})
        cc = entry.get("casimir", {})
        if not isinstance(cp, dict) or not isinstance(cc, dict):
            raise ConfigError(where, "params and casimir must be objects")
        cases.append(Case(name, _parse_system(cp, cc, f"{where}.", base=params)))

    out = _section(doc, "output", {"prefix", "svg"})
    prefix = out.get("prefix")
    if prefix is not None and (not isinstance(prefix, str) or not re.fullmatch(r"[A-Za-z0-9_.-]+", prefix)):
        raise ConfigError("output.prefix", "must be a [A-Za-z0-9_.-] string")
    svg = _bool(out.get("svg", False), "output.svg")

    return RunConfig(
        params=params,
        treatment=treatment,
        self_shift=self_shift,
        spectrum=spectrum,
        switch=switch,
        oracle=oracle,
        cases=tuple(cases),
        prefix=prefix,
        svg=svg,
        source=copy.deepcopy(doc),
    )


# --- serialization ----------------------------------------------------------


def _params_doc(params, base=None):
    out = {}
    for key in PARAM_DIMENSIONS:
        value = getattr(params, key)
        if base is not None and getattr(base, key) == value:
            continue
        if value is not None:
            out[key] = value
    if base is None or base.mode != params.mode:
        out["mode"] = params.mode.value
    return out


def _casimir_doc(model, base=None):
    out = {}
    if base is None or base.law != model.law:
        out["law"] = model.law.value
    if base is None or base.beta != model.beta:
        out["beta"] = model.beta
    if model.amplitude is not None and (base is None or base.amplitude != model.amplitude):
        out["amplitude"] = model.amplitude
    if model.exponent is not None and (base is None or base.exponent != model.exponent):
        out["exponent"] = model.exponent
    return out


def to_document(cfg):
    """Fully explicit SI document; ``parse_config(to_document(c)) == c``."""
    o = cfg.oracle
    doc = {
        "params": _params_doc(cfg.params),
        "casimir": _casimir_doc(cfg.params.casimir),
        "solver": {"treatment": cfg.treatment.value, "self_shift": cfg.self_shift},
        "spectrum": {"points": cfg.spectrum.points},
        "switch": {
            "d_min": cfg.switch.d_min,
            "d_max": cfg.switch.d_max,
            "points": cfg.switch.points,
            "delta_p": cfg.switch.delta_p,
        },
        "oracle": {
            "delta_p": list(o.delta_p),
            "variant": o.variant,
            "probe_ratio": o.probe_ratio,
            "mech_decay_override": o.mech_decay_override,
            "rtol": o.rtol,
            "atol": o.atol,
            "settle_time": o.settle_time,
            "demod_periods": o.demod_periods,
        },
        "cases": [
            {
                "name": c.name,
                "params": _params_doc(c.params, cfg.params),
                "casimir": _casimir_doc(c.params.casimir, cfg.params.casimir),
            }
            for c in cfg.cases
        ],
        "output": {"svg": cfg.svg},
    }
    if cfg.spectrum.start is not None:
        doc["spectrum"].update(start=cfg.spectrum.start, stop=cfg.spectrum.stop)
    else:
        doc["spectrum"]["span"] = cfg.spectrum.span
    if cfg.prefix is not None:
        doc["output"]["prefix"] = cfg.prefix
    return doc


def dumps(cfg):
    return json.dumps(to_document(cfg), indent=2, sort_keys=True)


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(doc)


# --- presets ----------------------------------------------------------------
# Each preset starts from the baseline experiment (1064 nm, L = 25 mm,
# R = 150 nm, m = 145 ng, gamma = 2pi 80 kHz, Gamma_m = 2pi 141 Hz,
# Delta_L = omega_m = 2pi 947 kHz) and varies the quantity of one figure.
# Grid densities are our reproduction choices.

PRESETS = {
    # conventional OMIT: Casimir off, pump off versus 1 mW
    "fig2a": {
        "casimir": {"law": "off"},
        "cases": [
            {"name": "P0", "params": {"pump_power": "0 mW"}},
            {"name": "P1mW", "params": {"pump_power": "1 mW"}},
        ],
    },
    # spectra at shrinking gap at 1 mW, and the switch curve
    "fig2bc": {
        "params": {"gap": "2 nm", "pump_power": "1 mW"},
        "switch": {"d_min": "1 nm", "d_max": "10 nm", "points": 181},
        "cases": [
            {"name": "d10nm", "params": {"gap": "10 nm"}},
            {"name": "d3nm", "params": {"gap": "3 nm"}},
            {"name": "d2nm", "params": {"gap": "2 nm"}},
            {"name": "d1.8nm", "params": {"gap": "1.8 nm"}},
        ],
    },
    # no pump: Casimir off versus d = 2 nm
    "fig3a": {
        "params": {"gap": "2 nm", "pump_power": "0 mW"},
        "cases": [
            {"name": "off", "casimir": {"law": "off"}},
            {"name": "d2nm"},
        ],
    },
    # weak pumps at d = 2 nm
    "fig3d": {
        "params": {"gap": "2 nm"},
        "cases": [
            {"name": "P0", "params": {"pump_power": "0 uW"}},
            {"name": "P5uW", "params": {"pump_power": "5 uW"}},
            {"name": "P10uW", "params": {"pump_power": "10 uW"}},
            {"name": "P20uW", "params": {"pump_power": "20 uW"}},
        ],
    },
    # two identical oscillators at 1 mW
    "fig4": {
        "params": {"mode": "moveable_sphere", "pump_power": "1 mW"},
        "spectrum": {"points": 4001, "span": 0.04},
        "cases": [
            {"name": "d4nm", "params": {"gap": "4 nm"}},
            {"name": "d2nm", "params": {"gap": "2 nm"}},
        ],
    },
}


def merge(base, override):
    """Recursive merge of two documents; lists and scalars are replaced."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load(path=None, preset=None):
    """Read a config file, layered over ``preset`` when both are given."""
    if path is None and preset is None:
        raise ConfigError("--config", "a config file or a preset is required")
    doc = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("--preset", f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        doc = copy.deepcopy(PRESETS[preset])
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(user, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        doc = merge(doc, user)
    return parse_config(doc)


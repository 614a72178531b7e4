"""omitctl: command-line front end for spectra, switch curves and oracle runs.

Exit codes: 0 success, 2 configuration error, 3 physics-domain error
(adhesion, contact, unstable mode), 4 numerical failure.  Files written by
a failing run are removed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as cfgmod
from .casimir import HBAR, coupling_J, critical_separation, effective_frequency, sphere_plate_coefficient
from .errors import InvalidParams, ModelHasNoAdhesion, NumericalError, OmitError, PhysicsDomainError
from .oracle import OracleConfig, integrate_full, integrate_linearized, with_override
from .params import TWO_PI, check, derive
from .response import respond, solve_steady, sweep_spectrum, sweep_switch
from .steady import SteadyState2, classify_stability
from .svgplot import render_csv

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERIC = 0, 2, 3, 4

SPECTRUM_COLUMNS = (
    "delta_p_rad_s",
    "nu_rad_s",
    "eta",
    "re_da_plus",
    "im_da_plus",
    "re_da_minus",
    "im_da_minus",
)
ORACLE_COLUMNS = ("delta_p_rad_s", "nu_rad_s", "eta_analytic", "eta_oracle", "abs_diff")


def available_jobs(requested=None):
    """--jobs, else $OMITCTL_JOBS, else the number of cores."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("OMITCTL_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise cfgmod.ConfigError("OMITCTL_JOBS", f"expected an integer, got {env!r}") from None
    return os.cpu_count() or 1


def fmt(value):
    """Shortest round-trip decimal of a double."""
    return repr(float(value))


def _csv(columns, rows):
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _point_row(point, delta_p=None, nu=None):
    if point is None:
        nan = math.nan
        return [delta_p, nu, nan, nan, nan, nan, nan]
    return [
        point.delta_p,
        point.nu,
        point.eta,
        point.da_plus.real,
        point.da_plus.imag,
        point.da_minus.real,
        point.da_minus.imag,
    ]


def spectrum_csv(result):
    return _csv(SPECTRUM_COLUMNS, [_point_row(p) for p in result.points])


def switch_csv(result):
    der = derive(result.params)
    nu = der.nu(result.delta_p)
    rows = []
    for d, p in zip(result.grid, result.points):
        rows.append([float(d)] + _point_row(p, result.delta_p, nu))
    return _csv(("d_m",) + SPECTRUM_COLUMNS, rows)


def _stem(cfg, command, case):
    stem = cfg.prefix or command
    return f"{stem}_{case.name}" if case.name else stem


# --- commands -------------------------------------------------------------------


def info_report(params, cfg):
    check(params)
    der = derive(params)
    model = params.casimir
    lines = []

    def add(label, value, unit=""):
        lines.append(f"{label:<14}= {value}{(' ' + unit) if unit else ''}")

    add("mode", params.mode.value)
    add("casimir law", model.law.value)
    add("gap d", fmt(params.gap), "m")
    add("omega_c", fmt(der.omega_c), "rad/s")
    add("g", fmt(der.g), "rad/(s m)")
    add("eps_L", fmt(der.eps_L), "1/s")
    add("V_sp", fmt(sphere_plate_coefficient(params.sphere_radius)), "J m^2")
    try:
        add("d_crit", fmt(critical_separation(model, params)), "m")
    except ModelHasNoAdhesion:
        add("d_crit", "none")
    hbar_j = 0.0 if model.is_off else HBAR * coupling_J(model, params)
    steady = solve_steady(params, treatment=cfg.treatment, self_shift=cfg.self_shift)
    if isinstance(steady, SteadyState2):
        omega = math.sqrt(steady.k1 / params.mirror_mass)
        add("Omega_m", fmt(omega), f"rad/s  (2pi * {omega / TWO_PI / 1e3:.6g} kHz)")
        add("hbar J", fmt(hbar_j), "N/m")
        add("k1", fmt(steady.k1), "N/m")
        add("k2", fmt(steady.k2), "N/m")
        add("n_s", fmt(steady.n_s))
        add("x1_s", fmt(steady.x1_s), "m")
        add("x2_s", fmt(steady.x2_s), "m")
    else:
        omega = effective_frequency(model, params, steady.x_s)
        add("Omega_m", fmt(omega), f"rad/s  (2pi * {omega / TWO_PI / 1e3:.6g} kHz)")
        add("hbar J", fmt(hbar_j), "N/m")
        add("k_eff", fmt(steady.k_eff), "N/m")
        add("n_s", fmt(steady.n_s))
        add("x_s", fmt(steady.x_s), "m")
    add("stability", classify_stability(steady, params).value)
    warnings = check(params)
    if warnings:
        for w in warnings:
            lines.append(f"warning {w.code} [{w.field}]: {w.message}")
    else:
        lines.append("warnings      = none")
    return "\n".join(lines) + "\n"


def cmd_info(cfg, args):
    blocks = []
    for case in cfg.expanded_cases():
        header = f"[{case.name}]\n" if case.name else ""
        blocks.append(header + info_report(case.params, cfg))
    sys.stdout.write("\n".join(blocks))
    return {}


def cmd_spectrum(cfg, args):
    files = {}
    for case in cfg.expanded_cases():
        check(case.params)
        grid = cfg.spectrum.values(case.params)
        res = sweep_spectrum(
            case.params, grid, treatment=cfg.treatment, self_shift=cfg.self_shift, jobs=args.jobs
        )
        stem = _stem(cfg, "spectrum", case)
        text = spectrum_csv(res)
        files[stem + ".csv"] = text
        if args.svg:
            files[stem + ".svg"] = render_csv(
                text,
                "delta_p_rad_s",
                "eta",
                x_label="delta_p / 2pi (kHz)",
                y_label="eta",
                x_scale=1.0 / (TWO_PI * 1e3),
                title=stem,
            )
    return files


def cmd_switch(cfg, args):
    files = {}
    for case in cfg.expanded_cases():
        check(case.params)
        res = sweep_switch(
            case.params,
            cfg.switch.values(),
            delta_p=cfg.switch.delta_p,
            treatment=cfg.treatment,
            self_shift=cfg.self_shift,
        )
        stem = _stem(cfg, "switch", case)
        text = switch_csv(res)
        files[stem + ".csv"] = text
        if args.svg:
            files[stem + ".svg"] = render_csv(
                text, "d_m", "eta", x_label="d (nm)", y_label="eta", x_scale=1e9, title=stem
            )
    return files


def _oracle_point(task):
    params, settings, delta_p = task
    ocfg = OracleConfig(
        rtol=settings.rtol,
        atol=settings.atol,
        settle_time=settings.settle_time,
        demod_periods=settings.demod_periods,
        variant=settings.variant,
        mech_decay_override=settings.mech_decay_override,
        probe_ratio=settings.probe_ratio,
    )
    pe = with_override(params, ocfg)
    steady = solve_steady(pe)
    nu = derive(pe).nu(delta_p)
    analytic = respond(pe, steady, nu).eta
    if settings.variant == "full":
        res = integrate_full(params, nu, ocfg, steady=steady)
    else:
        res = integrate_linearized(params, steady, nu, ocfg)
    return [delta_p, nu, analytic, res.eta, abs(res.eta - analytic)]


def cmd_oracle(cfg, args):
    files = {}
    for case in cfg.expanded_cases():
        check(case.params)
        tasks = [(case.params, cfg.oracle, dp) for dp in cfg.oracle.delta_p]
        if args.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=min(args.jobs, len(tasks))) as pool:
                rows = list(pool.map(_oracle_point, tasks))
        else:
            rows = [_oracle_point(t) for t in tasks]
        stem = _stem(cfg, "oracle", case)
        text = _csv(ORACLE_COLUMNS, rows)
        files[stem + ".csv"] = text
        if args.svg:
            files[stem + ".svg"] = render_csv(
                text,
                "delta_p_rad_s",
                "abs_diff",
                x_label="delta_p / 2pi (kHz)",
                y_label="|eta_oracle - eta_analytic|",
                x_scale=1.0 / (TWO_PI * 1e3),
                title=stem,
            )
    return files


COMMANDS = {"info": cmd_info, "spectrum": cmd_spectrum, "switch": cmd_switch, "oracle": cmd_oracle}


def _write(files, out_dir):
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out_dir / name
            written.append(path)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except BaseException:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise
    return written


def build_parser():
    parser = argparse.ArgumentParser(prog="omitctl", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", metavar="FILE", help="JSON run configuration (optional with --preset)")
    parser.add_argument("--preset", choices=sorted(cfgmod.PRESETS), help="figure preset, overlaid by --config")
    parser.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    parser.add_argument("--svg", action="store_true", help="also write an SVG plot per CSV")
    parser.add_argument("--jobs", type=int, metavar="N", help="worker processes (default: $OMITCTL_JOBS or cores)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, args.preset)
        args.jobs = available_jobs(args.jobs)
        args.svg = args.svg or cfg.svg
    except cfgmod.ConfigError as exc:
        print(f"omitctl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        files = COMMANDS[args.command](cfg, args)
        _write(files, Path(args.out))
    except InvalidParams as exc:
        for d in exc.diagnostics:
            print(f"omitctl: invalid {d.field}: {d.message}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsDomainError as exc:
        print(f"omitctl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except NumericalError as exc:
        print(f"omitctl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OmitError as exc:
        print(f"omitctl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name in files:
        print(Path(args.out) / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

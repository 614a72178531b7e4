import csv
import io
import json
import math

import numpy as np
import pytest

from casimir_omit import cli
from casimir_omit import config as cfgmod
from casimir_omit.casimir import critical_separation
from casimir_omit.params import paper_baseline

TWO_PI = 2 * math.pi


def run(tmp_path, *argv, doc=None):
    args = list(argv)
    if doc is not None:
        path = tmp_path / "run.json"
        path.write_text(json.dumps(doc))
        args += ["--config", str(path)]
    return cli.main(args + ["--out", str(tmp_path / "out")])


def read_csv(path):
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def info_values(text):
    out = {}
    for line in text.splitlines():
        if "=" in line and not line.startswith("warning"):
            key, value = line.split("=", 1)
            out[key.strip()] = value.split()[0]
    return out


# --- units and config ----------------------------------------------------------------


@pytest.mark.parametrize(
    "text, dim, expected",
    [
        ("3 nm", "length", 3e-9),
        ("25 mm", "length", 0.025),
        ("145 ng", "mass", 145e-12),
        ("1 mW", "power", 1e-3),
        ("80 kHz_x2pi", "rate", TWO_PI * 80e3),
        ("1064e-9", "length", 1.064e-6),
        (2.5e-9, "length", 2.5e-9),
    ],
)
def test_quantities(text, dim, expected):
    assert cfgmod.parse_quantity(text, dim, "x") == expected


def test_unit_dimension_mismatch_names_both():
    with pytest.raises(cfgmod.ConfigError, match="power.*length"):
        cfgmod.parse_quantity("2 mW", "length", "params.gap")


@pytest.mark.parametrize("bad", ["2 parsecs", "nm", True, [1]])
def test_bad_quantities(bad):
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse_quantity(bad, "length", "params.gap")


@pytest.mark.parametrize("name", sorted(cfgmod.PRESETS))
def test_preset_round_trip(name):
    cfg = cfgmod.load(preset=name)
    again = cfgmod.loads(cfgmod.dumps(cfg))
    assert again == cfg
    assert cfgmod.dumps(again) == cfgmod.dumps(cfg)


def test_round_trip_of_custom_document():
    doc = {
        "params": {"gap": "3 nm", "pump_power": "0.5 mW", "coupling_ratio": 1.0},
        "casimir": {"law": "pfa_corrected"},
        "spectrum": {"points": 11, "start": "-10 kHz_x2pi", "stop": "10 kHz_x2pi"},
        "output": {"prefix": "run", "svg": True},
    }
    cfg = cfgmod.parse_config(doc)
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg
    assert cfg.params.gap == 3e-9
    assert cfg.spectrum.values(cfg.params)[0] == -TWO_PI * 1e4


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"params": {"gapp": "2 nm"}}, "gapp"),
        ({"colour": 1}, "colour"),
        ({"params": {"gap": "2 mW"}}, "params.gap"),
        ({"spectrum": {"points": 0}}, "spectrum.points"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, doc, field):
    assert run(tmp_path, "spectrum", doc=doc) == cli.EXIT_CONFIG
    assert field in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_invalid_physical_value_exits_2(tmp_path, capsys):
    assert run(tmp_path, "info", doc={"params": {"mirror_mass": -1.0}}) == cli.EXIT_CONFIG
    assert "mirror_mass" in capsys.readouterr().err


def test_config_or_preset_required(tmp_path):
    assert cli.main(["info"]) == cli.EXIT_CONFIG


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"params": ')
    assert cli.main(["info", "--config", str(path)]) == cli.EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err


# --- info ------------------------------------------------------------------------------


def test_info_fig2bc(capsys):
    assert cli.main(["info", "--preset", "fig2bc", "--out", "."]) == 0
    text = capsys.readouterr().out
    block = text.split("[d2nm]\n")[1].split("\n[")[0]
    vals = info_values(block)
    assert float(vals["gap d"]) == 2e-9
    assert float(vals["d_crit"]) == pytest.approx(0.699e-9, abs=0.5e-12)
    assert float(vals["Omega_m"]) == pytest.approx(TWO_PI * 939.9e3, rel=2e-4)
    for key in ("omega_c", "g", "eps_L", "V_sp", "hbar J", "k_eff", "n_s", "x_s", "stability"):
        assert key in vals
    assert "PFA_VALIDITY" in block or "warnings      = none" in block


def test_info_model_off(tmp_path, capsys):
    assert run(tmp_path, "info", doc={"casimir": {"law": "off"}}) == 0
    vals = info_values(capsys.readouterr().out)
    assert float(vals["Omega_m"]) == paper_baseline().mech_freq_1
    assert float(vals["hbar J"]) == 0.0
    assert vals["d_crit"] == "none"


def test_info_adhesion_exit_3(tmp_path, capsys):
    assert run(tmp_path, "info", doc={"params": {"gap": "0.5 nm"}}) == cli.EXIT_PHYSICS
    err = capsys.readouterr().err
    assert "AdhesionRegime" in err
    assert "stiffness" in err


# --- spectrum / switch / oracle ----------------------------------------------------------


def test_spectrum_fig2a(tmp_path):
    assert cli.main(["spectrum", "--preset", "fig2a", "--out", str(tmp_path), "--jobs", "1"]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["spectrum_P0.csv", "spectrum_P1mW.csv"]
    header = (tmp_path / "spectrum_P0.csv").read_text().splitlines()[0]
    assert header == ",".join(cli.SPECTRUM_COLUMNS)
    off = read_csv(tmp_path / "spectrum_P0.csv")
    on = read_csv(tmp_path / "spectrum_P1mW.csv")
    step = on["delta_p_rad_s"][1] - on["delta_p_rad_s"][0]
    zero = np.argmin(np.abs(on["delta_p_rad_s"]))
    assert on["delta_p_rad_s"][zero] == 0.0
    assert off["eta"][zero] <= 0.05
    assert on["eta"][zero] >= 0.9
    peak = on["delta_p_rad_s"][np.argmax(on["eta"])]
    assert abs(peak) <= step, f"1 mW maximum at {peak:.1f} rad/s, grid step {step:.1f} rad/s"


def test_switch_fig2bc(tmp_path):
    assert cli.main(["switch", "--preset", "fig2bc", "--out", str(tmp_path), "--svg"]) == 0
    data = read_csv(tmp_path / "switch_d2nm.csv")
    assert len(data["d_m"]) == 181
    assert data["d_m"][0] == 1e-9 and data["d_m"][-1] == 10e-9
    d_min = data["d_m"][np.nanargmin(data["eta"])]
    assert 1.5e-9 <= d_min <= 2.1e-9
    assert (tmp_path / "switch_d2nm.svg").exists()


def test_switch_rows_below_adhesion_are_flagged(tmp_path):
    p = paper_baseline()
    doc = {"switch": {"d_min": "0.5 nm", "d_max": "1.5 nm", "points": 11}}
    assert run(tmp_path, "switch", doc=doc) == 0
    data = read_csv(tmp_path / "out" / "switch.csv")
    below = data["d_m"] < critical_separation(p.casimir, p)
    # between d_crit and ~0.93 nm the static pull has no equilibrium either
    pulled_in = (data["d_m"] > critical_separation(p.casimir, p)) & (data["d_m"] < 0.93e-9)
    assert below.any() and pulled_in.any()
    below |= pulled_in
    assert np.isnan(data["eta"][below]).all()
    assert np.isfinite(data["eta"][~below]).all()
    assert np.isfinite(data["nu_rad_s"]).all()


@pytest.mark.slow
def test_oracle_csv(tmp_path):
    doc = {"oracle": {"rtol": 1e-9}}
    assert run(tmp_path, "oracle", "--jobs", "1", doc=doc) == 0
    text = (tmp_path / "out" / "oracle.csv").read_text()
    assert text.splitlines()[0] == "delta_p_rad_s,nu_rad_s,eta_analytic,eta_oracle,abs_diff"
    data = read_csv(tmp_path / "out" / "oracle.csv")
    assert len(data["abs_diff"]) == 5
    assert (data["abs_diff"] <= 1e-3).all()


def test_svg_is_rendered_from_csv(tmp_path):
    doc = {"spectrum": {"points": 41}, "output": {"svg": True}}
    assert run(tmp_path, "spectrum", "--jobs", "1", doc=doc) == 0
    text = (tmp_path / "out" / "spectrum.csv").read_text()
    svg = (tmp_path / "out" / "spectrum.svg").read_text()
    assert svg.startswith("<svg")
    expected = cli.render_csv(
        text,
        "delta_p_rad_s",
        "eta",
        x_label="delta_p / 2pi (kHz)",
        y_label="eta",
        x_scale=1.0 / (TWO_PI * 1e3),
        title="spectrum",
    )
    assert svg == expected
    polyline = svg.split('points="')[1].split('"')[0]
    assert len(polyline.split()) == 41


def test_partial_outputs_removed(tmp_path, capsys):
    # second case lands in the adhesion regime after the first one succeeds
    doc = {
        "spectrum": {"points": 21},
        "cases": [{"name": "ok", "params": {"gap": "3 nm"}}, {"name": "stuck", "params": {"gap": "0.5 nm"}}],
    }
    assert run(tmp_path, "spectrum", "--jobs", "1", doc=doc) == cli.EXIT_PHYSICS
    out = tmp_path / "out"
    assert not out.exists() or not any(out.iterdir())


def test_write_failure_cleans_up(tmp_path, monkeypatch):
    files = {"a.csv": "x\n", "b.csv": "y\n"}
    real_open = open

    def flaky(path, *a, **kw):
        if str(path).endswith("b.csv"):
            raise OSError("disk full")
        return real_open(path, *a, **kw)

    monkeypatch.setattr("builtins.open", flaky)
    with pytest.raises(OSError):
        cli._write(files, tmp_path)
    assert not (tmp_path / "a.csv").exists()


def test_jobs_fallback(monkeypatch):
    monkeypatch.setenv("OMITCTL_JOBS", "3")
    assert cli.available_jobs(None) == 3
    assert cli.available_jobs(2) == 2
    monkeypatch.delenv("OMITCTL_JOBS")
    assert cli.available_jobs(None) >= 1
    monkeypatch.setenv("OMITCTL_JOBS", "many")
    with pytest.raises(cfgmod.ConfigError):
        cli.available_jobs(None)


def test_env_jobs_used_by_main(tmp_path, monkeypatch):
    monkeypatch.setenv("OMITCTL_JOBS", "2")
    doc = {"spectrum": {"points": 9}}
    assert run(tmp_path, "spectrum", doc=doc) == 0
    serial = (tmp_path / "out" / "spectrum.csv").read_bytes()
    assert run(tmp_path, "spectrum", "--jobs", "1", doc=doc) == 0
    assert (tmp_path / "out" / "spectrum.csv").read_bytes() == serial

import json
import subprocess

import pytest

from pair_radiance import cli
from pair_radiance.config import build_config, parse_config
from pair_radiance.errors import ConfigError, NumericalFailure
from pair_radiance.sampler import read_events_csv
from pair_radiance.units import M_SUN

REFERENCE = {
    "scenario": "binary_metric",
    "system": {"mass_kg": 2 * M_SUN, "mu": 0.5, "period_s": 3600.0, "radius1_m": 1e7, "radius2_m": 1e7},
    "numerics": {"seed": 7, "mc_samples": 20000, "orders": 16},
}


def write(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def with_system(**changes):
    data = json.loads(json.dumps(REFERENCE))
    data["system"].update(changes)
    return data


def run_cli(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    """Rows of a CSV artifact with the comment header stripped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [ln.split(",") for ln in lines]


# --- config parsing ---

def test_minimal_config_gets_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, {"scenario": "binary_metric", "system": REFERENCE["system"]}))
    assert cfg.numerics.orders == 32 and cfg.numerics.seed == 0
    assert cfg.numerics.alpha_variant == "paper" and cfg.output.format == "csv"
    assert cfg.physics.derived.v_R == pytest.approx(0.0026, abs=5e-5)


def test_mass_fraction_out_of_range():
    with pytest.raises(ConfigError) as exc:
        build_config(with_system(mu=1.5))
    assert any("mu" in e and "(0, 1)" in e for e in exc.value.errors)


def test_overlapping_bodies():
    with pytest.raises(ConfigError) as exc:
        build_config(with_system(radius1_m=3e8, radius2_m=3e8))
    assert any("overlap" in e and "a1 + a2 < R" in e for e in exc.value.errors)


def test_all_errors_reported_together():
    data = with_system(mu=-0.2, radius1_m=-1.0, colour="blue")
    data["numerics"]["orders"] = 1
    data["extra"] = True
    with pytest.raises(ConfigError) as exc:
        build_config(data)
    joined = "\n".join(exc.value.errors)
    for key in ("system.mu", "system.radius1_m", "system.colour", "numerics.orders", "extra"):
        assert key in joined


def test_timing_must_be_unique():
    with pytest.raises(ConfigError, match="exactly one"):
        build_config(with_system(omega_rad_s=1e-3))


def test_inconsistent_density():
    with pytest.raises(ConfigError, match="density1_kg_m3"):
        build_config(with_system(density1_kg_m3=1.0))


def test_dielectric_scenario_needs_kappa():
    data = json.loads(json.dumps(REFERENCE))
    data["scenario"] = "binary_dielectric"
    with pytest.raises(ConfigError, match="kappa"):
        build_config(data)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        parse_config(tmp_path / "nope.json")


def test_config_hash_ignores_output_path():
    a = build_config(REFERENCE)
    b = a.with_updates(output={"path": "elsewhere.csv"})
    c = a.with_updates(numerics={"seed": 8})
    assert a.config_hash == b.config_hash != c.config_hash


# --- command line ---

def test_power_on_reference_binary(tmp_path, capsys):
    code, out, _ = run_cli(["power", "--config", write(tmp_path, REFERENCE)], capsys)
    assert code == 0
    rows = dict(r for r in table(out)[1:] if r[0] != "flags")
    assert float(rows["metric_coefficient"]) == pytest.approx(5.4e-27, rel=0.10)
    assert float(rows["waiting_time"]) > 1e22
    assert "# alpha_variant: paper" in out
    assert "G=6.6743e-11 c=299792458.0 hbar=1.054571817e-34 M_sun=1.98892e+30" in out


def test_integrals_are_byte_identical(tmp_path, capsys, monkeypatch):
    path = write(tmp_path, REFERENCE)
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert cli.main(["integrals", "--config", path, "--out", str(first)]) == 0
    monkeypatch.setenv("PAIR_RADIANCE_THREADS", "4")
    assert cli.main(["integrals", "--config", path, "--out", str(second), "--threads", "3"]) == 0
    assert first.read_bytes() == second.read_bytes()
    rows = table(first.read_text())
    assert rows[0] == ["integral", "method", "value", "std_error", "n_evals"]
    assert [r[:2] for r in rows[1:]] == [["IE", "NestedGauss"], ["IE", "MonteCarlo"],
                                        ["IM", "NestedGauss"], ["IM", "MonteCarlo"]]


def test_scan_over_frequency(tmp_path, capsys):
    data = dict(REFERENCE, scan={"parameter": "omega_rad_s", "start": 1e-4, "stop": 1e-2, "num": 5})
    code, out, _ = run_cli(["scan", "--config", write(tmp_path, data)], capsys)
    assert code == 0
    rows = table(out)
    assert rows[0][:3] == ["omega_rad_s", "R_m", "v_R"]
    v = [float(r[2]) for r in rows[1:]]
    assert len(v) == 5 and all(b > a for a, b in zip(v, v[1:]))
    # Kepler: v_R grows as omega^(1/3)
    assert v[-1] / v[0] == pytest.approx(100 ** (1 / 3), rel=1e-12)


def test_scan_requires_section(tmp_path, capsys):
    code, _, err = run_cli(["scan", "--config", write(tmp_path, REFERENCE)], capsys)
    assert code == 2 and "scan" in err


def test_seed_and_variant_overrides(tmp_path, capsys):
    path = write(tmp_path, REFERENCE)
    code, out, _ = run_cli(["compare", "--config", path, "--seed", "99", "--alpha-variant", "rederived"], capsys)
    assert code == 0
    assert "# seed: 99" in out and "# alpha_variant: rederived" in out
    rows = dict(table(out)[1:])
    assert float(rows["log10_P_G_paper_over_P_M"]) > 80


def test_json_output(tmp_path, capsys):
    code, out, _ = run_cli(["compare", "--config", write(tmp_path, REFERENCE), "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["meta"]["constants"]["c"] == 299792458.0
    assert doc["columns"] == ["quantity", "value"]


def test_sample_writes_event_file(tmp_path, capsys):
    data = json.loads(json.dumps(REFERENCE))
    data["numerics"]["n_events"] = 50
    out = tmp_path / "events.csv"
    assert cli.main(["sample", "--config", write(tmp_path, data), "--out", str(out)]) == 0
    events = read_events_csv(out)
    assert len(events) == 50 and all(e.m == 2 for e in events)
    assert all(e.helicities[0] is not e.helicities[1] for e in events)
    assert "# acceptance:" in out.read_text()


def test_sphere_commands(tmp_path, capsys):
    data = {"scenario": "sphere",
            "system": {"radius_m": 100.0, "orbit_radius_m": 3000.0, "omega_rad_s": 1e3, "kappa": -0.5},
            "numerics": {"orders": 12, "grid_points": 5}}
    path = write(tmp_path, data)
    for cmd, header in (("rate", "source"), ("spectrum", "source"), ("angular", "source")):
        code, out, _ = run_cli([cmd, "--config", path], capsys)
        assert code == 0 and table(out)[0][0] == header
    code, _, err = run_cli(["compare", "--config", path], capsys)
    assert code == 2 and "binary" in err


def test_config_error_exit_code(tmp_path, capsys):
    code, _, err = run_cli(["power", "--config", write(tmp_path, with_system(mu=1.5))], capsys)
    assert code == 2 and "mu" in err


def test_bad_json_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run_cli(["power", "--config", str(path)], capsys)[0] == 2


def test_io_error_exit_code(tmp_path, capsys):
    assert run_cli(["power", "--config", str(tmp_path / "missing.json")], capsys)[0] == 4


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(cfg, threads):
        raise NumericalFailure("non-finite integrand value nan at {'l': 0.5}")

    monkeypatch.setitem(cli.HANDLERS, "rate", boom)
    code, _, err = run_cli(["rate", "--config", write(tmp_path, REFERENCE)], capsys)
    assert code == 3 and "non-finite" in err


def test_console_script(tmp_path):
    path = write(tmp_path, REFERENCE)
    res = subprocess.run(["pair-radiance", "compare", "--config", path], capture_output=True, text=True)
    assert res.returncode == 0 and "P_G_paper_W" in res.stdout

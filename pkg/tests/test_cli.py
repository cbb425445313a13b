import csv
import io
import json
import math

import numpy as np
import pytest
import yaml

from qdslow import cli, scenario, sweep
from qdslow.errors import ConfigError
from qdslow.units import OMEGA0, mev_to_rate


def small_config(**extra):
    data = {
        "name": "small", "mode": "phenomenological",
        "drive": {"omega_p": "3 Omega0", "delta_p": "0 Omega0", "delta_s": "0 Omega0"},
        "coefficients": {"gamma0_2": "1 Omega0", "gamma0_3": "2 Omega0", "f2": 0.1, "f3": 0.2},
        "sweep": {"axis": "delta_s", "start": "-1 Omega0", "stop": "1 Omega0", "points": 3},
        "outputs": ["chi", "n"],
    }
    data.update(extra)
    return data


def test_preset_contents():
    fig3 = scenario.preset("fig3")
    assert fig3.drive.omega_p == pytest.approx(3 * OMEGA0)
    assert [b.coeffs.f2 for b in fig3.branches] == [0.0, 0.1, 0.2]
    assert all(b.coeffs.f3 == 2 * b.coeffs.f2 for b in fig3.branches)
    fig2 = scenario.preset("fig2")
    assert fig2.branches[0].bath2.w_c == pytest.approx(mev_to_rate(1.0))
    assert [b.bath2.temperature for b in fig2.branches] == [5.0, 15.0, 45.0]
    fig7 = scenario.preset("fig7")
    assert all(b.coeffs.g3 == pytest.approx(2 * b.coeffs.g2) for b in fig7.branches)
    assert fig7.branches[-1].coeffs.g2 == pytest.approx(0.15 / OMEGA0)
    fig5 = scenario.preset("fig5")
    assert [(b.coeffs.f2, b.coeffs.f3) for b in fig5.branches] == [(0, 0), (-0.2, -0.4), (-0.2, 0.4), (0.2, -0.4)]


def test_unknown_preset():
    with pytest.raises(ConfigError, match="fig2, fig3"):
        scenario.preset("fig9")


@pytest.mark.parametrize("name", scenario.PRESET_NAMES)
def test_presets_validate_and_round_trip(name):
    cfg = scenario.preset(name)
    again = scenario.parse_config(yaml.safe_load(cfg.to_yaml()))
    assert again.config_hash == cfg.config_hash
    assert np.all(np.diff(cfg.grid) > 0)


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d.update(mode="quantum"), "mode"),
    (lambda d: d["sweep"].update(points=1), "sweep.points"),
    (lambda d: d["sweep"].update(points=2_000_000), "sweep.points"),
    (lambda d: d["sweep"].update(axis="temperature", start="5 K", stop="45 K"), "sweep.axis"),
    (lambda d: d["sweep"].update(start="1 Omega0", stop="-1 Omega0"), "sweep"),
    (lambda d: d["drive"].update(omega_p="3"), "drive.omega_p"),
    (lambda d: d.update(outputs=["plot"]), "outputs"),
    (lambda d: d["coefficients"].pop("gamma0_2"), "coefficients.gamma0_2"),
])
def test_config_validation_messages(mutate, field):
    data = small_config()
    mutate(data)
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        scenario.parse_config(data)


def test_dotted_overrides():
    data = scenario.apply_overrides(small_config(), ["sweep.points=5", "coefficients.f2=0.3",
                                                     "optical.eps_bac=12"])
    cfg = scenario.parse_config(data)
    assert len(cfg.grid) == 5 and cfg.branches[0].coeffs.f2 == 0.3 and cfg.optical.eps_bac == 12
    with pytest.raises(ConfigError):
        scenario.apply_overrides(small_config(), ["sweep.points"])


def test_zero_coupling_rows_are_constant():
    data = small_config(optical={"mu12_nm": 0.0})
    data["sweep"]["points"] = 2
    res = sweep.run_sweep(scenario.parse_config(data))
    for row in res.rows:
        rec = dict(zip(res.columns, row))
        assert rec["chi_re"] == 13.0 and rec["chi_im"] == 0.0


def test_csv_shape_and_json_round_trip():
    res = sweep.run_sweep(scenario.parse_config(small_config()))
    text = sweep.render_table(res, "csv")
    lines = text.split("\n")
    assert len(lines) == 5 and lines[-1] == ""  # header + 3 rows, LF terminated
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    records = json.loads(sweep.render_table(res, "json"))["records"]
    for r_csv, r_json in zip(rows, records):
        for key in ("axis_value", "chi_re", "chi_im", "n_re", "n_im"):
            assert float(r_csv[key]) == r_json[key]
    assert "window_center" not in rows[0] and "gamma2_re" not in rows[0]


def test_metadata_has_provenance():
    cfg = scenario.parse_config(small_config())
    meta = json.loads(sweep.render_table(sweep.run_sweep(cfg), "json"))["metadata"]
    assert meta["config_sha256"] == cfg.config_hash and meta["version"]


def test_determinism_and_threads():
    data = small_config(outputs=["chi", "n", "slowdown", "rates"])
    a = sweep.render_table(sweep.run_sweep(scenario.parse_config(data)))
    b = sweep.render_table(sweep.run_sweep(scenario.parse_config(data)))
    c = sweep.render_table(sweep.run_sweep(scenario.parse_config(dict(data, workers=3))))
    assert a == b == c


def test_fig4_slowdown_ordering():
    res = sweep.run_sweep(scenario.preset("fig4"))
    col = {c: i for i, c in enumerate(res.columns)}
    by_branch = {}
    for row in res.rows:
        by_branch.setdefault(row[col["branch"]], []).append(row[col["slowdown"]])
    f0, f1, f2 = (np.array(by_branch[k]) for k in ("f2=0", "f2=0.1", "f2=0.2"))
    assert np.all(f2[1:] > f1[1:]) and np.all(f1[1:] > f0[1:])


def test_window_failure_gives_nan_with_warning():
    data = small_config(outputs=["chi", "window"])
    data["sweep"].update(start="-6 Omega0", stop="6 Omega0", points=241)
    with pytest.warns(sweep.WindowWarning):
        res = sweep.run_sweep(scenario.parse_config(data))
    assert all(math.isnan(r[res.columns.index("window_center")]) for r in res.rows)


def test_temperature_sweep_microscopic():
    data = scenario.preset_dict("fig2")
    data["sweep"] = {"axis": "temperature", "start": "5 K", "stop": "45 K", "points": 3}
    data["drive"]["omega_p"] = "2 Omega0"
    data.pop("branches")
    res = sweep.run_sweep(scenario.parse_config(data))
    g = [r[res.columns.index("gamma2_re")] for r in res.rows]
    assert g[0] < g[1] < g[2]


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "s.yaml"
    cfg.write_text(yaml.safe_dump(small_config()))
    out = tmp_path / "o.csv"
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4
    assert cli.main(["sweep", "--config", str(cfg), "--set", "sweep.points=0"]) == 1
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.yaml")]) == 1
    assert cli.main(["preset", "--name", "nope"]) == 1
    assert "fig3" in capsys.readouterr().err
    singular = dict(small_config(), coefficients={"gamma0_2": "0 Omega0", "gamma0_3": "0 Omega0"})
    singular["drive"]["omega_p"] = "0 Omega0"
    singular["sweep"].update(start="0 Omega0", stop="1 Omega0", points=2)
    cfg.write_text(yaml.safe_dump(singular))
    assert cli.main(["sweep", "--config", str(cfg)]) == 2
    assert "delta_s=0" in capsys.readouterr().err


def test_cli_preset_emit_config_and_rates(tmp_path, capsys):
    assert cli.main(["preset", "--name", "fig3", "--emit-config"]) == 0
    text = capsys.readouterr().out
    cfg = tmp_path / "fig3.yaml"
    cfg.write_text(text)
    assert scenario.load_config(cfg).config_hash == scenario.preset("fig3").config_hash
    assert cli.main(["rates", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "f2=0.2,1,0,2,0,0.6,0,1.2,0" in out
    assert cli.main(["preset", "--name", "fig3", "--format", "json", "--set", "sweep.points=3"]) == 0
    assert len(json.loads(capsys.readouterr().out)["records"]) == 9

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from upbsim.cli import main
from upbsim.config import ConfigError, RunConfig, config_from_dict, dump_config, load_config
from upbsim.io import load_sidecar


FAST = [
    "--set", "numerics.n_max=2",
    "--set", "numerics.tau_points=256",
    "--set", "optimizer.coarse_points=24",
]


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


def test_config_roundtrip(tmp_path):
    cfg = RunConfig()
    path = tmp_path / "config.yaml"
    dump_config(cfg, path)
    loaded = load_config(path)
    assert dataclasses.asdict(loaded) == dataclasses.asdict(cfg)
    dump_config(loaded, tmp_path / "config2.yaml")
    again = load_config(tmp_path / "config2.yaml")
    assert dataclasses.asdict(again) == dataclasses.asdict(cfg)


def test_config_validation_errors(tmp_path):
    with pytest.raises(ConfigError):
        config_from_dict({"params": {"kappa_h_ghz": -1.0}})
    with pytest.raises(ConfigError):
        config_from_dict({"params": {"no_such_field": 1.0}})
    with pytest.raises(ConfigError):
        config_from_dict({"detector": {"kernel": "boxcar"}})


def test_cli_rejects_bad_config(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("params:\n  kappa_h_ghz: -3.0\n")
    assert run_cli("--config", bad, "steady") == 1
    assert run_cli("--set", "params.not_a_key=1", "steady") == 1


def test_steady_and_g2zero_outputs(tmp_path):
    out = tmp_path / "out"
    code = run_cli("--outdir", out, *FAST, "steady", "--theta-in", "0", "--theta-out", "90")
    assert code == 0
    payload = json.loads((out / "steady.json").read_text())
    assert payload["n_h"] > 0
    assert payload["qd_population"] >= 0
    assert (out / "steady.json.config.json").exists()
    dist_rows = list(csv.DictReader((out / "steady_distribution.csv").open()))
    assert [r["n"] for r in dist_rows] == ["0", "1", "2"]

    code = run_cli("--outdir", out, *FAST, "g2zero", "--theta-in", "0", "--theta-out", "90")
    assert code == 0
    payload = json.loads((out / "g2zero.json").read_text())
    assert payload["status"] == "ok"
    assert payload["g2_bare"] < 1.0  # cross-polarized detection is antibunched


def test_g2tau_convolution_raises_minimum(tmp_path):
    out = tmp_path / "out"
    code = run_cli("--outdir", out, *FAST, "g2tau", "--theta-in", "0", "--theta-out", "90",
                   "--tau-points", "512")
    assert code == 0
    rows = list(csv.DictReader((out / "g2tau.csv").open()))
    taus = np.array([float(r["tau_ns"]) for r in rows])
    bare = np.array([float(r["g2_bare"]) for r in rows])
    conv = np.array([float(r["g2_convolved"]) for r in rows])
    assert taus[0] < 0 < taus[-1]  # symmetric grid
    assert conv.min() >= bare.min() - 1e-9
    sidecar = load_sidecar(out / "g2tau.csv")
    assert sidecar["numerics"]["n_max"] == 2


def test_fig2_fig3_emit_panel_csvs(tmp_path):
    out = tmp_path / "out"
    code = run_cli("--outdir", out, *FAST, "fig2", "--points", "4", "--no-convolve")
    assert code == 0
    for name in ("fig2_points", "fig2_nout", "fig2_g2_bare", "fig2_g2_convolved"):
        assert (out / f"{name}.csv").exists()
        assert (out / f"{name}.csv.config.json").exists()
    rows = list(csv.DictReader((out / "fig2_points.csv").open()))
    assert len(rows) == 16

    code = run_cli("--outdir", out, *FAST, "fig3", "--points", "4", "--no-convolve")
    assert code == 0
    for name in ("fig3_points", "fig3_nout", "fig3_g2_bare", "fig3_g2_convolved"):
        assert (out / f"{name}.csv").exists()
    rows = list(csv.DictReader((out / "fig3_g2_bare.csv").open()))
    assert set(rows[0]) == {"hwp_deg", "qwp_deg", "g2_bare", "status"}


def test_fig3_reruns_are_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert run_cli("--outdir", out, *FAST, "fig3", "--points", "3", "--no-convolve") == 0
    assert (out_a / "fig3_points.csv").read_bytes() == (out_b / "fig3_points.csv").read_bytes()


def test_brightness_smoke(tmp_path):
    out = tmp_path / "out"
    code = run_cli(
        "--outdir", out, *FAST,
        "--set", "sweep.brightness_splittings_ghz=[0.0]",
        "--set", "optimizer.coarse_points=16",
        "brightness", "--theta-points", "2",
    )
    assert code == 0
    rows = list(csv.DictReader((out / "brightness.csv").open()))
    assert len(rows) == 2
    assert all(r["status"] == "ok" for r in rows)


def test_squeeze_outputs(tmp_path):
    out = tmp_path / "out"
    code = run_cli("--outdir", out, *FAST, "squeeze")
    assert code == 0
    summary = json.loads((out / "squeeze_summary.json").read_text())
    assert abs(summary["squeezing_db_at_r_0.004"] + 0.0347) < 5e-5
    assert summary["arrow-D"]["g2_bare"] < summary["arrow-C"]["g2_bare"]
    for name in ("squeeze_table", "dist_arrow_c", "dist_arrow_d", "dist_coherent"):
        assert (out / f"{name}.csv").exists()
    table = list(csv.DictReader((out / "squeeze_table.csv").open()))
    for row in table:
        alpha, r = float(row["alpha_bar"]), float(row["r"])
        exact, approx = float(row["p2_exact"]), float(row["p2_approx"])
        # absolute accuracy is O(alpha^6): tight relative to the alpha^4/2
        # two-photon scale everywhere, and to the exact value away from the
        # engineered zero
        assert abs(exact - approx) / (alpha**4 / 2) < 0.05
        if r <= alpha**2 / 2:
            assert float(row["rel_err"]) < 0.05
        if r == alpha**2:
            assert exact < 10.0 * alpha**8


def test_preset_arrow_a(tmp_path):
    out = tmp_path / "out"
    code = run_cli("--outdir", out, *FAST, "g2zero", "--preset", "arrow-A")
    assert code == 0
    payload = json.loads((out / "g2zero.json").read_text())
    assert payload["label"] == "arrow-A"
    assert abs(payload["projection"]["v_re"] - 1.0) < 1e-12
    assert payload["g2_bare"] < 1.0


def test_selftest_passes():
    assert run_cli("selftest") == 0

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from upbfigs import FigureRequest, SchemaError, SidecarMissingError, render
from upbfigs.cli import main


def _write_csv(path: Path, header, rows, sidecar=True):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    if sidecar:
        Path(str(path) + ".config.json").write_text(json.dumps({"params": {"n_in": 0.06}}))
    return path


def _map_csv(path: Path, n=5, fail_points=(), value="g2_bare", sidecar=True):
    rows = []
    angles = np.linspace(0.0, 180.0, n, endpoint=False)
    for i, a in enumerate(angles):
        for j, b in enumerate(angles):
            failed = (i, j) in fail_points
            val = "nan" if failed else repr(float(10 ** (np.sin(a / 30) * np.cos(b / 40))))
            status = "low_intensity" if failed else "ok"
            rows.append([repr(float(a)), repr(float(b)), val, status])
    return _write_csv(path, ["hwp_deg", "qwp_deg", value, "status"], rows, sidecar)


def _curve_csv(path: Path):
    taus = np.linspace(-2, 2, 201)
    rows = [
        [repr(float(t)), repr(float(1 - 0.9 * np.exp(-abs(t) / 0.2))),
         repr(float(1 - 0.4 * np.exp(-abs(t) / 0.5)))]
        for t in taus
    ]
    return _write_csv(path, ["tau_ns", "g2_bare", "g2_convolved"], rows)


def _dist_csv(path: Path, mean=0.01):
    from math import exp, factorial

    rows = []
    for n in range(4):
        poisson = exp(-mean) * mean**n / factorial(n)
        rows.append([str(n), repr(poisson * (0.5 if n == 2 else 1.0)), repr(poisson)])
    return _write_csv(path, ["n", "p_n", "p_poisson_ref"], rows)


def _brightness_csv(path: Path):
    rows = []
    for s in (0.0, 10.0):
        for th in (0.0, 15.0, 30.0, 45.0):
            rows.append([repr(s), repr(th), repr(1e-4 * (1 + th / 10) * (1 + s / 20)),
                         repr(0.02), "ok"])
    rows.append([repr(10.0), repr(60.0), "nan", "nan", "low_intensity"])
    return _write_csv(
        path,
        ["splitting_ghz", "theta_in_deg", "mean_n_out", "g2_bare", "status"],
        rows,
    )


def test_missing_sidecar_is_refused(tmp_path):
    path = _map_csv(tmp_path / "map.csv", sidecar=False)
    out = tmp_path / "map.png"
    with pytest.raises(SidecarMissingError):
        render(FigureRequest(inputs=(path,), kind="map", output=out))
    assert not out.exists()


def test_empty_grid_is_an_error(tmp_path):
    path = _write_csv(tmp_path / "empty.csv", ["hwp_deg", "qwp_deg", "g2_bare", "status"], [])
    out = tmp_path / "empty.png"
    with pytest.raises(SchemaError):
        render(FigureRequest(inputs=(path,), kind="map", output=out))
    assert not out.exists()


def test_incomplete_grid_is_an_error(tmp_path):
    rows = [["0.0", "0.0", "1.0", "ok"], ["0.0", "45.0", "1.1", "ok"],
            ["45.0", "0.0", "0.9", "ok"]]
    path = _write_csv(tmp_path / "partial.csv", ["hwp_deg", "qwp_deg", "g2_bare", "status"], rows)
    with pytest.raises(SchemaError):
        render(FigureRequest(inputs=(path,), kind="map", output=tmp_path / "x.png"))


def test_map_render_marks_failed_pixels_white(tmp_path):
    import matplotlib.pyplot as plt

    clean = _map_csv(tmp_path / "clean.csv")
    holey = _map_csv(tmp_path / "holey.csv", fail_points=((2, 2), (2, 3)))
    out_clean = render(FigureRequest(inputs=(clean,), kind="map", output=tmp_path / "clean.png"))
    out_holey = render(FigureRequest(inputs=(holey,), kind="map", output=tmp_path / "holey.png"))
    img_clean = plt.imread(out_clean)
    img_holey = plt.imread(out_holey)
    white_clean = int(np.all(img_clean == 1.0, axis=-1).sum())
    white_holey = int(np.all(img_holey == 1.0, axis=-1).sum())
    assert white_holey > white_clean  # failure pixels render white
    assert out_clean.read_bytes() != out_holey.read_bytes()


def test_map_render_is_byte_deterministic(tmp_path):
    path = _map_csv(tmp_path / "map.csv", fail_points=((1, 1),))
    out_a = render(FigureRequest(inputs=(path,), kind="map", output=tmp_path / "a.png"))
    out_b = render(FigureRequest(inputs=(path,), kind="map", output=tmp_path / "b.png"))
    assert out_a.read_bytes() == out_b.read_bytes()


def test_map_requires_value_column_when_ambiguous(tmp_path):
    rows = [
        ["0.0", "0.0", "1.0", "2.0", "ok"],
        ["0.0", "45.0", "1.0", "2.0", "ok"],
        ["45.0", "0.0", "1.2", "0.5", "ok"],
        ["45.0", "45.0", "1.1", "0.7", "ok"],
    ]
    path = _write_csv(
        tmp_path / "multi.csv",
        ["theta_in_deg", "theta_out_deg", "mean_n_out", "g2_bare", "status"],
        rows,
    )
    with pytest.raises(SchemaError):
        render(FigureRequest(inputs=(path,), kind="map", output=tmp_path / "x.png"))
    out = render(
        FigureRequest(
            inputs=(path,), kind="map", output=tmp_path / "ok.png", value_column="g2_bare"
        )
    )
    assert out.exists()


def test_curve_render(tmp_path):
    path = _curve_csv(tmp_path / "g2tau.csv")
    out = render(FigureRequest(inputs=(path,), kind="curve", output=tmp_path / "curve.png",
                               title="delay correlation"))
    assert out.exists() and out.stat().st_size > 0
    bad = _write_csv(tmp_path / "bad.csv", ["tau_ns", "g2_bare"], [["0.0", "1.0"]])
    with pytest.raises(SchemaError):
        render(FigureRequest(inputs=(bad,), kind="curve", output=tmp_path / "bad.png"))


def test_distribution_render_multiple_inputs(tmp_path):
    a = _dist_csv(tmp_path / "dist_a.csv", mean=0.01)
    b = _dist_csv(tmp_path / "dist_b.csv", mean=0.02)
    out = render(FigureRequest(inputs=(a, b), kind="distribution",
                               output=tmp_path / "dist.png"))
    assert out.exists()


def test_brightness_render(tmp_path):
    path = _brightness_csv(tmp_path / "brightness.csv")
    out = render(FigureRequest(inputs=(path,), kind="brightness",
                               output=tmp_path / "brightness.png"))
    assert out.exists()


def test_cli_roundtrip_and_errors(tmp_path):
    path = _map_csv(tmp_path / "map.csv")
    out = tmp_path / "cli.png"
    assert main(["--kind", "map", "--input", str(path), "--output", str(out)]) == 0
    assert out.exists()
    no_sidecar = _map_csv(tmp_path / "nosc.csv", sidecar=False)
    assert main(["--kind", "map", "--input", str(no_sidecar),
                 "--output", str(tmp_path / "x.png")]) == 1


def test_renders_real_simulator_output(tmp_path):
    # end-to-end against the primary package when it is installed
    upbsim_cli = pytest.importorskip("upbsim.cli")
    out = tmp_path / "sim"
    code = upbsim_cli.main([
        "--outdir", str(out), "--set", "numerics.n_max=2",
        "fig3", "--points", "5", "--no-convolve",
    ])
    assert code == 0
    image = render(FigureRequest(inputs=(out / "fig3_g2_bare.csv",), kind="map",
                                 output=tmp_path / "fig3.png", title="waveplate map"))
    assert image.exists()

"""CSV/JSON serialization with provenance sidecars.

Every data file gets a ``<name>.config.json`` sidecar holding the fully
resolved configuration, so any figure can be reproduced from its artifacts
alone.  Formatting is deterministic: floats are written with ``repr`` (their
shortest round-trip form) and JSON keys are sorted; no timestamps anywhere.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import CorrelationCurve
from .observables import PhotonDistribution
from .sweep import BrightnessPoint, SweepGrid


def _fmt(x) -> str:
    if isinstance(x, float):
        if np.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def sidecar_path(path: Path) -> Path:
    return Path(str(path) + ".config.json")


def write_sidecar(path: Path, config: dict) -> Path:
    side = sidecar_path(path)
    side.write_text(json.dumps(config, sort_keys=True, indent=2) + "\n")
    return side


def load_sidecar(path: Path) -> dict:
    return json.loads(sidecar_path(path).read_text())


def write_grid_csv(
    path: Path,
    grid: SweepGrid,
    config: dict,
    axis_names: tuple[str, str],
    value_columns: tuple[str, ...] = ("mean_n_out", "g2_bare", "g2_convolved"),
) -> Path:
    """Long-format grid CSV: axis columns (degrees), value columns, status."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*axis_names, *value_columns, "status"])
        for x, y, n_out, g2b, g2c, status in grid.rows():
            values = {"mean_n_out": n_out, "g2_bare": g2b, "g2_convolved": g2c}
            writer.writerow(
                [
                    _fmt(float(np.rad2deg(x))),
                    _fmt(float(np.rad2deg(y))),
                    *(_fmt(values[c]) for c in value_columns),
                    status,
                ]
            )
    write_sidecar(path, config)
    return path


def write_curve_csv(path: Path, bare: CorrelationCurve, convolved: CorrelationCurve, config: dict) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau_ns", "g2_bare", "g2_convolved"])
        for t, b, c in zip(bare.tau_grid, bare.values, convolved.values):
            writer.writerow([_fmt(float(t)), _fmt(float(b)), _fmt(float(c))])
    write_sidecar(path, config)
    return path


def write_brightness_csv(path: Path, points: list[BrightnessPoint], config: dict) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["splitting_ghz", "theta_in_deg", "mean_n_out", "g2_bare", "u_re", "u_im", "v_re", "v_im", "status"]
        )
        for p in points:
            writer.writerow(
                [
                    _fmt(p.splitting_ghz),
                    _fmt(float(np.rad2deg(p.theta_in))),
                    _fmt(p.mean_n_out),
                    _fmt(p.g2_bare),
                    _fmt(float(p.projection.u.real)),
                    _fmt(float(p.projection.u.imag)),
                    _fmt(float(p.projection.v.real)),
                    _fmt(float(p.projection.v.imag)),
                    p.status,
                ]
            )
    write_sidecar(path, config)
    return path


def write_distribution_csv(path: Path, dist: PhotonDistribution, config: dict) -> Path:
    """Columns n, p_n, p_poisson_ref (Poisson at the same mean, for comparison)."""
    path = Path(path)
    mean = dist.mean()
    n = np.arange(len(dist.probabilities))
    from scipy.stats import poisson

    ref = poisson.pmf(n, mean)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "p_n", "p_poisson_ref"])
        for k in n:
            writer.writerow([int(k), _fmt(float(dist.probabilities[k])), _fmt(float(ref[k]))])
    write_sidecar(path, config)
    return path


def write_json(path: Path, payload: dict, config: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n")
    if config is not None:
        write_sidecar(path, config)
    return path

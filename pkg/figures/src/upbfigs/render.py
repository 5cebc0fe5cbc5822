"""Render upbsim CSV outputs into static figures.

Consumes only the simulator's documented file formats: long-format map CSVs
(axis columns in degrees, one or more value columns, a status column),
correlation-curve CSVs (tau_ns, g2_bare, g2_convolved), photon-number
distribution CSVs (n, p_n, p_poisson_ref), and brightness CSVs. Every input
must carry its ``<name>.config.json`` provenance sidecar; files without one
are refused.

Rendering is deterministic: fixed style, no timestamps, so identical inputs
give byte-identical images. Failed sweep points (status != ok, or NaN values)
are drawn white; correlation maps use a logarithmic color scale clipped to
[1e-3, 1e1] and diverging at 1, separating bunching from antibunching.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import TwoSlopeNorm

FIGURE_KINDS = ("map", "curve", "distribution", "brightness")

G2_CLIP = (1e-3, 1e1)


class SidecarMissingError(FileNotFoundError):
    """Input CSV has no provenance sidecar; refuse to render."""


class SchemaError(ValueError):
    """Input CSV does not match the producing module's contract."""


@dataclass(frozen=True)
class FigureRequest:
    inputs: tuple[Path, ...]
    kind: str
    output: Path
    value_column: str | None = None
    title: str = ""
    labels: tuple[str, str] | None = None  # (x, y) axis labels

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))


def _read_csv(path: Path) -> tuple[list[str], list[dict]]:
    sidecar = Path(str(path) + ".config.json")
    if not sidecar.exists():
        raise SidecarMissingError(
            f"{path} has no {sidecar.name} provenance sidecar; refusing to render"
        )
    json.loads(sidecar.read_text())  # must parse
    with Path(path).open() as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path} is empty")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path} contains a header but no data rows")
    return list(reader.fieldnames), rows


def _float(value: str) -> float:
    return float("nan") if value in ("", "nan") else float(value)


def _style():
    plt.rcParams.update(
        {
            "figure.dpi": 110,
            "savefig.dpi": 110,
            "font.size": 9,
            "axes.titlesize": 10,
            "svg.hashsalt": "upbfigs",
        }
    )


def _save(fig, output: Path) -> Path:
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, metadata={"Software": "upbfigs"})
    plt.close(fig)
    return output


def _render_map(request: FigureRequest) -> Path:
    header, rows = _read_csv(request.inputs[0])
    if len(header) < 4 or header[-1] != "status":
        raise SchemaError(f"map CSV needs axis0, axis1, value..., status; got {header}")
    ax_x, ax_y = header[0], header[1]
    value_cols = [c for c in header[2:-1]]
    column = request.value_column or (value_cols[0] if len(value_cols) == 1 else None)
    if column is None or column not in value_cols:
        raise SchemaError(
            f"value column must be one of {value_cols}; got {request.value_column!r}"
        )
    xs = sorted({_float(r[ax_x]) for r in rows})
    ys = sorted({_float(r[ax_y]) for r in rows})
    if len(xs) * len(ys) != len(rows):
        raise SchemaError("map CSV rows do not form a complete grid")
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}
    grid = np.full((len(xs), len(ys)), np.nan)
    for r in rows:
        value = _float(r[column])
        if r["status"] != "ok":
            value = np.nan
        grid[x_index[_float(r[ax_x])], y_index[_float(r[ax_y])]] = value

    fig, ax = plt.subplots(figsize=(4.6, 3.8), constrained_layout=True)
    extent = (min(ys), max(ys), min(xs), max(xs))
    if column.startswith("g2"):
        shown = np.log10(np.clip(grid, *G2_CLIP))
        norm = TwoSlopeNorm(vcenter=0.0, vmin=np.log10(G2_CLIP[0]), vmax=np.log10(G2_CLIP[1]))
        cmap = plt.get_cmap("RdBu_r").copy()
        cmap.set_bad("white")
        im = ax.imshow(shown, origin="lower", aspect="auto", extent=extent, norm=norm, cmap=cmap)
        cb = fig.colorbar(im, ax=ax)
        cb.set_label(f"log10 {column}")
    else:
        cmap = plt.get_cmap("viridis").copy()
        cmap.set_bad("white")
        im = ax.imshow(grid, origin="lower", aspect="auto", extent=extent, cmap=cmap)
        cb = fig.colorbar(im, ax=ax)
        cb.set_label(column)
    labels = request.labels or (ax_y, ax_x)
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    ax.set_title(request.title or column)
    return _save(fig, request.output)


def _render_curve(request: FigureRequest) -> Path:
    header, rows = _read_csv(request.inputs[0])
    needed = {"tau_ns", "g2_bare", "g2_convolved"}
    if not needed.issubset(header):
        raise SchemaError(f"curve CSV needs columns {sorted(needed)}; got {header}")
    tau = np.array([_float(r["tau_ns"]) for r in rows])
    bare = np.array([_float(r["g2_bare"]) for r in rows])
    conv = np.array([_float(r["g2_convolved"]) for r in rows])
    fig, ax = plt.subplots(figsize=(4.6, 3.2), constrained_layout=True)
    ax.plot(tau, bare, color="#888888", lw=1.0, label="bare")
    ax.plot(tau, conv, color="#1f4e9c", lw=1.8, label="detector-convolved")
    sparse = slice(None, None, max(1, len(tau) // 60))
    ax.plot(tau[sparse], conv[sparse], "o", color="#c03030", ms=3.0)
    ax.axhline(1.0, color="k", lw=0.6, ls=":")
    labels = request.labels or ("delay (ns)", "g2")
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    ax.set_title(request.title)
    ax.legend(frameon=False)
    return _save(fig, request.output)


def _render_distribution(request: FigureRequest) -> Path:
    series = []
    for path in request.inputs:
        header, rows = _read_csv(path)
        if not {"n", "p_n"}.issubset(header):
            raise SchemaError(f"distribution CSV needs columns n, p_n; got {header}")
        n = np.array([int(r["n"]) for r in rows])
        p = np.array([_float(r["p_n"]) for r in rows])
        ref = (
            np.array([_float(r["p_poisson_ref"]) for r in rows])
            if "p_poisson_ref" in header
            else None
        )
        series.append((Path(path).stem, n, p, ref))

    fig, (ax_p, ax_dev) = plt.subplots(
        1, 2, figsize=(7.2, 3.2), constrained_layout=True
    )
    width = 0.8 / len(series)
    for i, (name, n, p, ref) in enumerate(series):
        offset = (i - (len(series) - 1) / 2) * width
        ax_p.bar(n + offset, p, width=width, label=name)
        if ref is not None:
            ax_p.plot(n + offset, ref, "k_", ms=9)
            ax_dev.plot(n, p - ref, "o-", ms=3.5, label=name)
    ax_p.set_yscale("log")
    ax_p.set_xlabel("photon number n")
    ax_p.set_ylabel("P(n)")
    ax_p.legend(frameon=False, fontsize=7)
    ax_dev.axhline(0.0, color="k", lw=0.6)
    ax_dev.set_xlabel("photon number n")
    ax_dev.set_ylabel("P(n) - Poisson(n)")
    fig.suptitle(request.title)
    return _save(fig, request.output)


def _render_brightness(request: FigureRequest) -> Path:
    header, rows = _read_csv(request.inputs[0])
    needed = {"splitting_ghz", "theta_in_deg", "mean_n_out", "status"}
    if not needed.issubset(header):
        raise SchemaError(f"brightness CSV needs columns {sorted(needed)}; got {header}")
    fig, ax = plt.subplots(figsize=(4.6, 3.2), constrained_layout=True)
    splittings = sorted({_float(r["splitting_ghz"]) for r in rows})
    for s in splittings:
        pts = [
            (_float(r["theta_in_deg"]), _float(r["mean_n_out"]))
            for r in rows
            if _float(r["splitting_ghz"]) == s and r["status"] == "ok"
        ]
        pts.sort()
        if pts:
            ax.plot(*zip(*pts), "o-", ms=3.5, label=f"splitting {s:g} GHz")
    ax.set_yscale("log")
    labels = request.labels or ("input polarization (deg)", "mean photon number")
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    ax.set_title(request.title)
    ax.legend(frameon=False, fontsize=7)
    return _save(fig, request.output)


_RENDERERS = {
    "map": _render_map,
    "curve": _render_curve,
    "distribution": _render_distribution,
    "brightness": _render_brightness,
}


def render(request: FigureRequest) -> Path:
    """Render one figure; returns the written image path.

    Raises SidecarMissingError / SchemaError before any file is written.
    """
    _style()
    return _RENDERERS[request.kind](request)

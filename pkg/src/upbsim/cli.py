"""Command-line interface: subcommand dispatch, config resolution, serialization.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from . import io
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .dynamics import convolve_detector, default_tau_grid, g2_tau, g2_zero
from .hilbert import SpaceLayout, mode_operators
from .liouvillian import DegenerateSteadyStateError, TruncationError
from .model import SystemParams
from .observables import (
    PhotonDistribution,
    SqueezeSpec,
    displaced_squeezed_fock_probs,
    number_variance,
    photon_distribution,
    quadrature_minimum,
    squeezing_db,
    two_photon_amplitude_approx,
)
from .polarization import OutputProjection, linear_output, output_mode
from .selftest import run_selftest
from .sweep import (
    NoFeasibleOutputError,
    brightness_curve,
    point_stats,
    search_projection,
    solve_bundle,
    sweep_linear,
    sweep_waveplates,
)

PRESETS = ("arrow-A", "arrow-B", "arrow-C", "arrow-D")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="upbsim",
        description="Two-mode cavity QED simulator: polarization-projected photon statistics",
    )
    parser.add_argument("--config", type=Path, default=None, help="YAML config file")
    parser.add_argument("--outdir", type=Path, default=None, help="output directory (overrides config)")
    parser.add_argument("--workers", type=int, default=None, help="sweep worker count (overrides config)")
    parser.add_argument("--n-max", type=int, default=None, help="photon truncation (overrides config)")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override any config entry, e.g. --set params.g_ghz=10",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--preset", choices=PRESETS, default=None)
    point.add_argument("--theta-in", type=float, default=None, help="input polarization, degrees from H")
    point.add_argument("--theta-out", type=float, default=None, help="linear detection angle, degrees")
    point.add_argument("--hwp", type=float, default=None, help="output half-wave-plate angle, degrees")
    point.add_argument("--qwp", type=float, default=None, help="output quarter-wave-plate angle, degrees")

    sub.add_parser("steady", parents=[point], help="steady-state summary (JSON + number distribution)")
    sub.add_parser("g2zero", parents=[point], help="equal-time correlation of the projected output")
    g2t = sub.add_parser("g2tau", parents=[point], help="two-time correlation curve (CSV)")
    g2t.add_argument("--tau-points", type=int, default=None)
    f2 = sub.add_parser("fig2", help="map vs linear input/output polarization angles")
    f2.add_argument("--points", type=int, default=None)
    f2.add_argument("--no-convolve", action="store_true")
    f3 = sub.add_parser("fig3", help="maps vs output wave-plate angles")
    f3.add_argument("--points", type=int, default=None)
    f3.add_argument("--no-convolve", action="store_true")
    br = sub.add_parser("brightness", help="brightness at the antibunching-optimal output vs input angle")
    br.add_argument("--theta-points", type=int, default=None)
    sub.add_parser("squeeze", help="displaced-squeezed-state analysis tables")
    sub.add_parser("selftest", help="run the built-in oracle suite")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    data = cfg.to_dict()
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set needs SECTION.KEY=VALUE, got {item!r}")
        key, _, raw = item.partition("=")
        value = yaml.safe_load(raw)
        parts = key.split(".")
        node = data
        for p in parts[:-1]:
            if p not in node:
                raise ConfigError(f"unknown config path {key!r}")
            node = node[p]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config path {key!r}")
        node[parts[-1]] = value
    if args.outdir is not None:
        data["output_dir"] = str(args.outdir)
    if args.workers is not None:
        data["sweep"]["workers"] = int(args.workers)
    if args.n_max is not None:
        data["numerics"]["n_max"] = int(args.n_max)
    return config_from_dict(data)


def _resolve_point(cfg: RunConfig, args) -> tuple[SystemParams, OutputProjection, str]:
    """(params-with-drive, projection, label) for point commands.

    arrow-A/B live on the linear-polarization map (its default splitting);
    arrow-C/D are the waveplate-map extrema, re-found per parameter set.
    """
    n_max = cfg.numerics.n_max
    if args.preset is not None:
        if args.preset == "arrow-A":
            params = cfg.system_params(theta_in_deg=0.0, splitting_ghz=cfg.sweep.fig2_splitting_ghz)
            return params, linear_output(np.pi / 2), "arrow-A"
        if args.preset == "arrow-B":
            params = cfg.system_params(theta_in_deg=45.0, splitting_ghz=cfg.sweep.fig2_splitting_ghz)
            bundle = solve_bundle(params, SpaceLayout(n_max), rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
            thetas = np.linspace(0.0, np.pi, 3600, endpoint=False)
            best = None
            for th in thetas:
                n, g2b, _, status = point_stats(bundle, linear_output(th).coeffs)
                if status == "ok" and (best is None or g2b < best[0]):
                    best = (g2b, th)
            if best is None:
                raise NoFeasibleOutputError("no linear output with usable intensity")
            return params, linear_output(best[1]), "arrow-B"
        objective = "max" if args.preset == "arrow-C" else "min"
        params = cfg.system_params(theta_in_deg=45.0)
        bundle = solve_bundle(params, SpaceLayout(n_max), rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
        point = search_projection(bundle, objective, cfg.optimizer.coarse_points, cfg.optimizer.fatol)
        return params, point.projection, args.preset
    params = cfg.system_params(theta_in_deg=args.theta_in)
    if args.hwp is not None or args.qwp is not None:
        proj = output_mode(
            np.deg2rad(args.hwp or 0.0),
            np.deg2rad(args.qwp or 0.0),
            cfg.optics.polarizer_axis,
            cfg.optics.plate_order,
        )
        return params, proj, "waveplates"
    theta_out = 90.0 if args.theta_out is None else args.theta_out
    return params, linear_output(np.deg2rad(theta_out)), "linear"


def _cmd_steady(cfg: RunConfig, args, outdir: Path) -> int:
    params, proj, label = _resolve_point(cfg, args)
    layout = SpaceLayout(cfg.numerics.n_max)
    bundle = solve_bundle(params, layout, rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
    ops = mode_operators(layout)
    rho = bundle.rho
    dist = photon_distribution(rho, proj)
    n_out = bundle.moments.mean_n(proj.coeffs)
    payload = {
        "label": label,
        "n_h": rho.expect(ops["a_h"].dag() @ ops["a_h"]).real,
        "n_v": rho.expect(ops["a_v"].dag() @ ops["a_v"]).real,
        "qd_population": rho.expect(ops["sigma"].dag() @ ops["sigma"]).real,
        "projection": {"u_re": proj.u.real, "u_im": proj.u.imag, "v_re": proj.v.real, "v_im": proj.v.imag},
        "n_out": n_out,
        "g2_bare": g2_zero(rho, proj, ops),
        "number_variance": number_variance(dist),
        "distribution_residual": dist.residual,
    }
    io.write_json(outdir / "steady.json", payload, cfg.to_dict())
    io.write_distribution_csv(outdir / "steady_distribution.csv", dist, cfg.to_dict())
    print(f"wrote {outdir / 'steady.json'} and {outdir / 'steady_distribution.csv'}")
    return 0


def _cmd_g2zero(cfg: RunConfig, args, outdir: Path) -> int:
    params, proj, label = _resolve_point(cfg, args)
    layout = SpaceLayout(cfg.numerics.n_max)
    bundle = solve_bundle(params, layout, rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
    n, g2b, _, status = point_stats(bundle, proj.coeffs)
    payload = {
        "label": label,
        "projection": {"u_re": proj.u.real, "u_im": proj.u.imag, "v_re": proj.v.real, "v_im": proj.v.imag},
        "mean_n_out": n,
        "g2_bare": g2b,
        "status": status,
    }
    io.write_json(outdir / "g2zero.json", payload, cfg.to_dict())
    print(f"wrote {outdir / 'g2zero.json'}")
    return 0


def _cmd_g2tau(cfg: RunConfig, args, outdir: Path) -> int:
    params, proj, label = _resolve_point(cfg, args)
    layout = SpaceLayout(cfg.numerics.n_max)
    ops = mode_operators(layout)
    bundle = solve_bundle(params, layout, rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
    n_tau = args.tau_points or cfg.numerics.tau_points
    taus = default_tau_grid(params, n_tau)
    bare = g2_tau(bundle.lind, bundle.rho, proj, taus, ops, cfg.numerics.rtol, cfg.numerics.atol)
    conv = convolve_detector(bare, cfg.detector_fwhm_ns, cfg.detector.kernel)
    io.write_curve_csv(outdir / "g2tau.csv", bare, conv, cfg.to_dict())
    print(f"wrote {outdir / 'g2tau.csv'} ({label}, g2_bare(0)={bare.at_zero():.4g}, "
          f"g2_conv(0)={conv.at_zero():.4g})")
    return 0


def _grid_deg(points: int) -> np.ndarray:
    return np.deg2rad(np.linspace(0.0, 180.0, points, endpoint=False))


def _cmd_fig2(cfg: RunConfig, args, outdir: Path) -> int:
    points = args.points or cfg.sweep.fig2_points
    params = cfg.system_params(splitting_ghz=cfg.sweep.fig2_splitting_ghz)
    grid = sweep_linear(
        params,
        _grid_deg(points),
        _grid_deg(points),
        n_max=cfg.numerics.n_max,
        convolve=not args.no_convolve,
        fwhm=cfg.detector_fwhm_ns,
        kernel_shape=cfg.detector.kernel,
        workers=cfg.sweep.workers,
        rtol=cfg.numerics.rtol,
        atol=cfg.numerics.atol,
    )
    conf = cfg.to_dict()
    names = ("theta_in_deg", "theta_out_deg")
    io.write_grid_csv(outdir / "fig2_points.csv", grid, conf, names)
    for col in ("mean_n_out", "g2_bare", "g2_convolved"):
        io.write_grid_csv(outdir / f"fig2_{'nout' if col == 'mean_n_out' else col}.csv",
                          grid, conf, names, (col,))
    print(f"wrote fig2 CSVs to {outdir}")
    return 0


def _cmd_fig3(cfg: RunConfig, args, outdir: Path) -> int:
    points = args.points or cfg.sweep.fig3_points
    params = cfg.system_params()
    grid = sweep_waveplates(
        params,
        _grid_deg(points),
        _grid_deg(points),
        n_max=cfg.numerics.n_max,
        polarizer_axis=cfg.optics.polarizer_axis,
        plate_order=cfg.optics.plate_order,
        convolve=not args.no_convolve,
        fwhm=cfg.detector_fwhm_ns,
        kernel_shape=cfg.detector.kernel,
        rtol=cfg.numerics.rtol,
        atol=cfg.numerics.atol,
    )
    conf = cfg.to_dict()
    names = ("hwp_deg", "qwp_deg")
    io.write_grid_csv(outdir / "fig3_points.csv", grid, conf, names)
    for col in ("mean_n_out", "g2_bare", "g2_convolved"):
        io.write_grid_csv(outdir / f"fig3_{'nout' if col == 'mean_n_out' else col}.csv",
                          grid, conf, names, (col,))
    print(f"wrote fig3 CSVs to {outdir}")
    return 0


def _cmd_brightness(cfg: RunConfig, args, outdir: Path) -> int:
    points = args.theta_points or cfg.sweep.brightness_theta_points
    params = cfg.system_params()
    thetas = np.deg2rad(np.linspace(0.0, 45.0, points))
    rows = brightness_curve(
        params,
        thetas,
        cfg.sweep.brightness_splittings_ghz,
        n_max=cfg.numerics.n_max,
        coarse=cfg.optimizer.coarse_points,
        fatol=cfg.optimizer.fatol,
        workers=cfg.sweep.workers,
    )
    io.write_brightness_csv(outdir / "brightness.csv", rows, cfg.to_dict())
    print(f"wrote {outdir / 'brightness.csv'}")
    return 0


def _cmd_squeeze(cfg: RunConfig, args, outdir: Path) -> int:
    conf = cfg.to_dict()
    # closed-form vs exact two-photon weight
    import csv as _csv

    table = outdir / "squeeze_table.csv"
    with table.open("w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["alpha_bar", "r", "p2_exact", "p2_approx", "rel_err"])
        for alpha in (0.02, 0.05, 0.08, 0.1):
            for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
                spec = SqueezeSpec(alpha_bar=alpha, r=frac * alpha**2)
                exact = float(displaced_squeezed_fock_probs(spec, 6).probabilities[2])
                approx = two_photon_amplitude_approx(spec)
                rel = abs(exact - approx) / exact if exact > 0 else float("nan")
                writer.writerow([repr(alpha), repr(spec.r), repr(exact), repr(approx), repr(rel)])
    io.write_sidecar(table, conf)

    # squeezing character at the waveplate-map extrema
    layout = SpaceLayout(cfg.numerics.n_max)
    ops = mode_operators(layout)
    params = cfg.system_params(theta_in_deg=45.0)
    bundle = solve_bundle(params, layout, rtol=cfg.numerics.rtol, atol=cfg.numerics.atol)
    summary = {"squeezing_db_at_r_0.004": squeezing_db(0.004)}
    for name, objective in (("arrow-D", "min"), ("arrow-C", "max")):
        point = search_projection(bundle, objective, cfg.optimizer.coarse_points, cfg.optimizer.fatol)
        dist = photon_distribution(bundle.rho, point.projection)
        v_min, lam = quadrature_minimum(bundle.rho, point.projection, ops)
        amp = bundle.moments.amplitude(point.projection.coeffs)
        summary[name] = {
            "g2_bare": point.g2,
            "mean_n_out": point.mean_n,
            "number_variance": number_variance(dist),
            "fano": number_variance(dist) / dist.mean(),
            "min_quadrature_variance": v_min,
            "squeezed_quadrature_angle_rad": lam,
            "displacement_phase_rad": float(np.mod(np.angle(amp), np.pi)),
        }
        io.write_distribution_csv(outdir / f"dist_{name.replace('-', '_').lower()}.csv", dist, conf)
    # coherent reference at the antibunched mean photon number
    from scipy.stats import poisson

    mean_ref = summary["arrow-D"]["mean_n_out"]
    ref_probs = poisson.pmf(np.arange(cfg.numerics.n_max + 1), mean_ref)
    ref = PhotonDistribution(ref_probs, float(1 - ref_probs.sum()))
    io.write_distribution_csv(outdir / "dist_coherent.csv", ref, conf)
    io.write_json(outdir / "squeeze_summary.json", summary, conf)
    print(f"wrote {table}, distribution CSVs, and {outdir / 'squeeze_summary.json'}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except (ConfigError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "selftest":
            return 0 if run_selftest() else 2
        handler = {
            "steady": _cmd_steady,
            "g2zero": _cmd_g2zero,
            "g2tau": _cmd_g2tau,
            "fig2": _cmd_fig2,
            "fig3": _cmd_fig3,
            "brightness": _cmd_brightness,
            "squeeze": _cmd_squeeze,
        }[args.command]
        return handler(cfg, args, outdir)
    except (DegenerateSteadyStateError, TruncationError, NoFeasibleOutputError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

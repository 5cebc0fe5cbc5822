"""Run configuration: YAML file with nested sections, CLI-overridable.

Physical quantities are given in experiment-friendly units (GHz, degrees, ps)
and converted to internal rad/ns + radians when building SystemParams.  A
config round-trips: load -> dump -> load compares equal, and physical fields
are validated on load.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .model import SystemParams, ParameterError, TWO_PI
from .polarization import input_drive


class ConfigError(ValueError):
    """Malformed or physically invalid configuration."""


@dataclass
class PhysicsSection:
    g_ghz: float = 12.0
    kappa_h_ghz: float = 40.0
    kappa_v_ghz: float = 40.0
    gamma_par_ghz: float = 1.0
    gamma_star_ghz: float = 1.0
    phi_deg: float = 94.0
    cavity_splitting_ghz: float = 10.0
    laser_detuning_ghz: float = 0.0
    n_in: float = 0.06
    theta_in_deg: float = 45.0
    purcell_f_p: float = 11.2


@dataclass
class NumericsSection:
    n_max: int = 3
    tau_points: int = 2048
    rtol: float = 1e-10
    atol: float = 1e-13


@dataclass
class DetectorSection:
    fwhm_ps: float = 530.0
    kernel: str = "gaussian"


@dataclass
class OpticsSection:
    plate_order: str = "hwp_qwp"
    polarizer_axis: str = "H"


@dataclass
class SweepSection:
    fig2_points: int = 121
    fig3_points: int = 121
    fig2_splitting_ghz: float = 0.0
    brightness_theta_points: int = 10
    brightness_splittings_ghz: list = field(default_factory=lambda: [0.0, 10.0, 20.0])
    workers: int = 1


@dataclass
class OptimizerSection:
    coarse_points: int = 64
    fatol: float = 1e-6
    seed: int = 7
    restarts: int = 8


@dataclass
class RunConfig:
    params: PhysicsSection = field(default_factory=PhysicsSection)
    numerics: NumericsSection = field(default_factory=NumericsSection)
    detector: DetectorSection = field(default_factory=DetectorSection)
    optics: OpticsSection = field(default_factory=OpticsSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    output_dir: str = "out"

    def validate(self) -> None:
        p = self.params
        if p.n_in < 0:
            raise ConfigError("params.n_in must be >= 0")
        if self.numerics.n_max < 1:
            raise ConfigError("numerics.n_max must be >= 1")
        if self.detector.kernel not in ("gaussian", "biexponential"):
            raise ConfigError("detector.kernel must be 'gaussian' or 'biexponential'")
        if self.optics.plate_order not in ("hwp_qwp", "qwp_hwp"):
            raise ConfigError("optics.plate_order must be 'hwp_qwp' or 'qwp_hwp'")
        if self.optics.polarizer_axis not in ("H", "V"):
            raise ConfigError("optics.polarizer_axis must be 'H' or 'V'")
        if self.sweep.workers < 1:
            raise ConfigError("sweep.workers must be >= 1")
        try:
            self.system_params()
        except ParameterError as exc:
            raise ConfigError(f"params: {exc}") from exc

    def system_params(self, theta_in_deg: float | None = None, splitting_ghz: float | None = None) -> SystemParams:
        """SystemParams in rad/ns for a given input angle and cavity splitting.

        The drive anchor: at 45 degrees the two amplitudes are equal with
        (eta_H + eta_V)/kappa_mean = sqrt(n_in); other angles redistribute the
        same total power eta_H^2 + eta_V^2.
        """
        p = self.params
        if theta_in_deg is None:
            theta_in_deg = p.theta_in_deg
        if splitting_ghz is None:
            splitting_ghz = p.cavity_splitting_ghz
        kappa_h = TWO_PI * p.kappa_h_ghz
        kappa_v = TWO_PI * p.kappa_v_ghz
        kappa_mean = 0.5 * (kappa_h + kappa_v)
        eta_total = kappa_mean * np.sqrt(p.n_in / 2.0)
        drive = input_drive(np.deg2rad(theta_in_deg), eta_total)
        half_split = np.pi * splitting_ghz
        return SystemParams(
            omega_l=TWO_PI * p.laser_detuning_ghz,
            omega_c_h=+half_split,
            omega_c_v=-half_split,
            omega_qd=0.0,
            g=TWO_PI * p.g_ghz,
            phi=np.deg2rad(p.phi_deg),
            eta_h=drive.eta_h,
            eta_v=drive.eta_v,
            kappa_h=kappa_h,
            kappa_v=kappa_v,
            gamma_par=TWO_PI * p.gamma_par_ghz,
            gamma_star=TWO_PI * p.gamma_star_ghz,
            drive_phase_v=drive.phase_v,
            purcell_f_p=p.purcell_f_p,
        )

    @property
    def detector_fwhm_ns(self) -> float:
        return self.detector.fwhm_ps / 1000.0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "params": PhysicsSection,
    "numerics": NumericsSection,
    "detector": DetectorSection,
    "optics": OpticsSection,
    "sweep": SweepSection,
    "optimizer": OptimizerSection,
}


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    kwargs = {}
    for key, value in data.items():
        if key == "output_dir":
            kwargs[key] = str(value)
            continue
        cls = _SECTIONS.get(key)
        if cls is None:
            raise ConfigError(f"unknown config section {key!r}")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(value) - names
        if unknown:
            raise ConfigError(f"unknown keys in section {key!r}: {sorted(unknown)}")
        kwargs[key] = cls(**value)
    cfg = RunConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    return config_from_dict(data)


def dump_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))

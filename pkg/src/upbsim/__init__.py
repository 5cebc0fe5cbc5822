"""Simulator for a quantum-dot transition coupled to two polarized cavity modes.

Builds the driven dissipative two-mode Jaynes-Cummings model, solves for
steady states, and evaluates polarization-projected photon statistics:
mean photon number, g2(0) and g2(tau), photon-number distributions, and
quadrature squeezing, plus the polarization-sweep maps and operating-point
search built on top of them.
"""

from .config import RunConfig, load_config
from .dynamics import CorrelationCurve, convolve_detector, evolve, g2_tau, g2_zero
from .hilbert import Operator, SpaceLayout, embed, fock_annihilation, two_level_lowering
from .liouvillian import DensityMatrix, Superoperator, build_liouvillian, steady_state
from .model import SystemParams, build_hamiltonian, collapse_operators, default_params, qd_mode_operator
from .observables import (
    PhotonDistribution,
    SqueezeSpec,
    displaced_squeezed_fock_probs,
    mode_rotation,
    number_variance,
    photon_distribution,
    quadrature_variance,
    squeezing_db,
    two_photon_amplitude_approx,
)
from .polarization import OutputProjection, hwp, input_drive, linear_output, output_mode, qwp
from .sweep import brightness_curve, optimize_output, sweep_linear, sweep_waveplates

__version__ = "0.1.0"

__all__ = [
    "CorrelationCurve",
    "DensityMatrix",
    "Operator",
    "OutputProjection",
    "PhotonDistribution",
    "RunConfig",
    "SpaceLayout",
    "SqueezeSpec",
    "Superoperator",
    "SystemParams",
    "brightness_curve",
    "build_hamiltonian",
    "build_liouvillian",
    "collapse_operators",
    "convolve_detector",
    "default_params",
    "displaced_squeezed_fock_probs",
    "embed",
    "evolve",
    "fock_annihilation",
    "g2_tau",
    "g2_zero",
    "hwp",
    "input_drive",
    "linear_output",
    "load_config",
    "mode_rotation",
    "number_variance",
    "optimize_output",
    "output_mode",
    "photon_distribution",
    "qd_mode_operator",
    "quadrature_variance",
    "qwp",
    "squeezing_db",
    "steady_state",
    "sweep_linear",
    "sweep_waveplates",
    "two_level_lowering",
    "two_photon_amplitude_approx",
]

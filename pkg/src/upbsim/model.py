"""Physical parameters and construction of the Hamiltonian and collapse operators.

A single two-level emitter (quantum dot) couples to two orthogonally polarized
cavity modes through the dipole-projected mode
b = cos(phi) a_V + sin(phi) a_H, with phi the dipole angle measured from the
V cavity axis.  In the frame rotating at the drive frequency the Hamiltonian is

    H = (wL - wcV) n_V + (wL - wcH) n_H + (wL - wQD) sigma†sigma
        + g (sigma b† + sigma† b)
        + eta_H (a_H + a_H†) + eta_V (e^{i phase} a_V† + e^{-i phase} a_V)

All rates and angular frequencies are in rad/ns (f GHz <-> 2*pi*f rad/ns);
times are in ns.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .hilbert import Operator, SpaceLayout, mode_operators

TWO_PI = 2.0 * np.pi

DEFAULT_N_MAX = 3


class ParameterError(ValueError):
    """A physical parameter violates its constraints."""


@dataclass(frozen=True)
class SystemParams:
    """All symbols of the Hamiltonian and dissipators, in rad/ns.

    Frequencies are stored relative to a common rotating-frame reference;
    only detunings enter the dynamics.  Drive amplitudes are real and
    non-negative; a relative H/V drive phase (from the input-polarization
    decomposition) is carried separately in ``drive_phase_v``.
    ``purcell_f_p`` is descriptive metadata and enters no computation.
    """

    omega_l: float = 0.0
    omega_c_h: float = 0.0
    omega_c_v: float = 0.0
    omega_qd: float = 0.0
    g: float = 0.0
    phi: float = 0.0
    eta_h: float = 0.0
    eta_v: float = 0.0
    kappa_h: float = 1.0
    kappa_v: float = 1.0
    gamma_par: float = 0.0
    gamma_star: float = 0.0
    drive_phase_v: float = 0.0
    purcell_f_p: float = 0.0

    def __post_init__(self):
        if self.kappa_h <= 0 or self.kappa_v <= 0:
            raise ParameterError("cavity decay rates kappa_h, kappa_v must be > 0")
        for name in ("g", "eta_h", "eta_v", "gamma_par", "gamma_star"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")

    @property
    def kappa_mean(self) -> float:
        return 0.5 * (self.kappa_h + self.kappa_v)

    @property
    def n_in(self) -> float:
        """Drive-strength figure ((eta_H + eta_V)/kappa)^2 with kappa the mean decay."""
        return ((self.eta_h + self.eta_v) / self.kappa_mean) ** 2

    @property
    def cavity_splitting(self) -> float:
        """omega_c_H - omega_c_V in rad/ns."""
        return self.omega_c_h - self.omega_c_v

    @property
    def is_weak_coupling(self) -> bool:
        return self.g < min(self.kappa_h, self.kappa_v)

    def min_nonzero_rate(self) -> float:
        rates = [r for r in (self.kappa_h, self.kappa_v, self.gamma_par, self.gamma_star) if r > 0]
        return min(rates)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


def default_params(
    cavity_splitting_ghz: float = 10.0,
    n_in: float = 0.06,
    g_ghz: float = 12.0,
    kappa_ghz: float = 40.0,
    gamma_par_ghz: float = 1.0,
    gamma_star_ghz: float = 1.0,
    phi_deg: float = 94.0,
) -> SystemParams:
    """Stock operating point: weak coupling (g < kappa), both modes driven equally.

    The laser sits at the emitter resonance, centred between the two cavity
    modes (H above, V below).  The drive is scaled so that
    ((eta_H + eta_V)/kappa)^2 = n_in with eta_H = eta_V.
    """
    kappa = TWO_PI * kappa_ghz
    eta = kappa * np.sqrt(n_in) / 2.0
    half_split = TWO_PI * cavity_splitting_ghz / 2.0
    return SystemParams(
        omega_l=0.0,
        omega_c_h=+half_split,
        omega_c_v=-half_split,
        omega_qd=0.0,
        g=TWO_PI * g_ghz,
        phi=np.deg2rad(phi_deg),
        eta_h=eta,
        eta_v=eta,
        kappa_h=kappa,
        kappa_v=kappa,
        gamma_par=TWO_PI * gamma_par_ghz,
        gamma_star=TWO_PI * gamma_star_ghz,
        purcell_f_p=11.2,
    )


def qd_mode_operator(phi: float, layout: SpaceLayout) -> Operator:
    """Dipole-projected cavity operator b = cos(phi) a_V + sin(phi) a_H."""
    ops = mode_operators(layout)
    return np.cos(phi) * ops["a_v"] + np.sin(phi) * ops["a_h"]


def build_hamiltonian(params: SystemParams, layout: SpaceLayout) -> Operator:
    """Rotating-frame Hamiltonian; Hermitian by construction."""
    ops = mode_operators(layout)
    a_h, a_v, sigma = ops["a_h"], ops["a_v"], ops["sigma"]
    b = qd_mode_operator(params.phi, layout)

    d_h = params.omega_l - params.omega_c_h
    d_v = params.omega_l - params.omega_c_v
    d_qd = params.omega_l - params.omega_qd

    h = (
        d_v * (a_v.dag() @ a_v)
        + d_h * (a_h.dag() @ a_h)
        + d_qd * (sigma.dag() @ sigma)
        + params.g * (sigma @ b.dag() + sigma.dag() @ b)
        + params.eta_h * (a_h + a_h.dag())
    )
    if params.eta_v != 0.0:
        ph = np.exp(1j * params.drive_phase_v)
        h = h + params.eta_v * (ph * a_v.dag() + np.conj(ph) * a_v)
    return Operator(h.matrix, layout)


def collapse_operators(params: SystemParams, layout: SpaceLayout) -> list[Operator]:
    """Lindblad collapse operators; zero-rate channels are omitted.

    Pure dephasing enters as sqrt(2*gamma_star) sigma†sigma, which decays
    emitter coherences at gamma_star on top of gamma_par/2 while leaving
    populations untouched.
    """
    ops = mode_operators(layout)
    out: list[Operator] = []
    if params.kappa_h > 0:
        out.append(np.sqrt(params.kappa_h) * ops["a_h"])
    if params.kappa_v > 0:
        out.append(np.sqrt(params.kappa_v) * ops["a_v"])
    if params.gamma_par > 0:
        out.append(np.sqrt(params.gamma_par) * ops["sigma"])
    if params.gamma_star > 0:
        proj_e = ops["sigma"].dag() @ ops["sigma"]
        out.append(np.sqrt(2.0 * params.gamma_star) * proj_e)
    return out

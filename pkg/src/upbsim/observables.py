"""Photon statistics of the projected output mode and squeezed-state analysis.

Number statistics of the superposition mode c = u a_H + v a_V are obtained by
an explicit passive mode rotation: a Gaussian-free, truncation-exact unitary
U with U† a_H U = c, after which the H-mode number distribution of U rho U†
is the distribution of c.  Quadratures use the normalization
X(lam) = (c e^{-i lam} + c† e^{i lam})/2, so the vacuum variance is 1/4 and a
squeezed vacuum reaches e^{-2r}/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .hilbert import Operator, SpaceLayout, fock_annihilation, mode_operators
from .liouvillian import DensityMatrix, TruncationError
from .polarization import OutputProjection

RESIDUAL_WARN = 1e-4


@dataclass(frozen=True)
class SqueezeSpec:
    """Displacement (alpha_bar, vartheta) and squeeze (r, theta) of D(a)S(xi)|0>."""

    alpha_bar: float
    r: float
    vartheta: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if self.alpha_bar < 0 or self.r < 0:
            raise ValueError("alpha_bar and r must be non-negative")
        object.__setattr__(self, "vartheta", float(np.mod(self.vartheta, 2 * np.pi)))
        object.__setattr__(self, "theta", float(np.mod(self.theta, 2 * np.pi)))


@dataclass(frozen=True)
class PhotonDistribution:
    """P(0..n_max) for one mode; residual 1 - sum(P) diagnoses truncation."""

    probabilities: np.ndarray
    residual: float
    status: str = "ok"

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -1e-10) or np.any(p > 1 + 1e-10):
            raise ValueError("probabilities outside [0, 1] beyond tolerance")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def n_max(self) -> int:
        return len(self.probabilities) - 1

    def mean(self) -> float:
        n = np.arange(len(self.probabilities))
        return float(np.sum(n * self.probabilities))


@dataclass(frozen=True)
class ModeMoments:
    """First through fourth normally-ordered moments of (a_H, a_V) on a state.

    m1[i] = <a_i>, m2[i,j] = <a_i†a_j>, s2[i,j] = <a_i a_j>,
    m4[i,j,k,l] = <a_i†a_j†a_k a_l>.  Everything any polarization projection
    needs is a contraction of these against the projection coefficients.
    """

    m1: np.ndarray
    m2: np.ndarray
    s2: np.ndarray
    m4: np.ndarray

    def mean_n(self, w: np.ndarray) -> float:
        return float(np.real(np.einsum("i,j,ij->", w.conj(), w, self.m2)))

    def g4(self, w: np.ndarray) -> float:
        """<c†c†cc> for c defined by coefficients w."""
        wc = w.conj()
        return float(np.real(np.einsum("i,j,k,l,ijkl->", wc, wc, w, w, self.m4)))

    def amplitude(self, w: np.ndarray) -> complex:
        return complex(w @ self.m1)

    def anomalous(self, w: np.ndarray) -> complex:
        """<cc> for c defined by coefficients w."""
        return complex(np.einsum("i,j,ij->", w, w, self.s2))


def projected_moments(rho: DensityMatrix, ops: dict) -> ModeMoments:
    pair = (ops["a_h"], ops["a_v"])
    m1 = np.array([rho.expect(p) for p in pair])
    m2 = np.array([[rho.expect(pair[i].dag() @ pair[j]) for j in range(2)] for i in range(2)])
    s2 = np.array([[rho.expect(pair[i] @ pair[j]) for j in range(2)] for i in range(2)])
    m4 = np.zeros((2, 2, 2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            left = pair[i].dag() @ pair[j].dag()
            for k in range(2):
                for l in range(2):
                    m4[i, j, k, l] = rho.expect(left @ pair[k] @ pair[l])
    return ModeMoments(m1, m2, s2, m4)


def mode_rotation(c: OutputProjection, layout: SpaceLayout) -> Operator:
    """Two-mode unitary with U† a_H U = u a_H + v a_V (identity on the emitter).

    U = exp(-i sum_ij a_i† h_ij a_j) with h = i log(W) for the 2x2 unitary W
    whose first row is (u, v).  The generator conserves total photon number,
    so U is exact on every complete total-N sector of the truncated space.
    """
    w = np.array([[c.u, c.v], [-np.conj(c.v), np.conj(c.u)]], dtype=complex)
    h_small = 1j * logm(w)
    h_small = 0.5 * (h_small + h_small.conj().T)  # scrub roundoff anti-Hermitian part
    ops = mode_operators(layout)
    pair = (ops["a_h"], ops["a_v"])
    gen = np.zeros((layout.dim, layout.dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            gen += h_small[i, j] * (pair[i].dag() @ pair[j]).matrix
    return Operator(expm(-1j * gen), layout)


def photon_distribution(rho: DensityMatrix, c: OutputProjection) -> PhotonDistribution:
    """Number distribution of the projected mode via mode rotation."""
    layout = rho.layout
    u = mode_rotation(c, layout)
    rotated = u.matrix @ rho.matrix @ u.matrix.conj().T
    diag = np.real(np.diag(rotated))
    probs = np.zeros(layout.n_max + 1)
    dim_m = layout.dim_mode
    for n_h in range(dim_m):
        block = diag[n_h * dim_m * 2 : (n_h + 1) * dim_m * 2]
        probs[n_h] = block.sum()
    residual = float(1.0 - probs.sum())
    status = "ok" if abs(residual) <= RESIDUAL_WARN else "truncation_warning"
    return PhotonDistribution(np.clip(probs, -1e-10, None), residual, status)


def number_variance(dist: PhotonDistribution) -> float:
    n = np.arange(len(dist.probabilities))
    mean = float(np.sum(n * dist.probabilities))
    return float(np.sum(n**2 * dist.probabilities) - mean**2)


def displaced_squeezed_fock_probs(spec: SqueezeSpec, n_max: int) -> PhotonDistribution:
    """|<n | D(alpha) S(xi) |0>|^2 for n <= n_max, by matrix exponentials.

    The state is built in an enlarged internal ladder so the reported range
    0..n_max is accurate; the residual is the true weight above n_max.  If the
    internal edge still holds weight, the inputs are too large for the
    truncation and a TruncationError is raised.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    internal = max(32, 4 * (n_max + 1))
    a = fock_annihilation(internal - 1).matrix
    alpha = spec.alpha_bar * np.exp(1j * spec.vartheta)
    xi = spec.r * np.exp(1j * spec.theta)
    displace = expm(alpha * a.conj().T - np.conj(alpha) * a)
    squeeze = expm(0.5 * (np.conj(xi) * (a @ a) - xi * (a.conj().T @ a.conj().T)))
    psi = displace @ (squeeze @ np.eye(internal, 1, dtype=complex)[:, 0])
    weights = np.abs(psi) ** 2
    edge = float(weights[-2:].sum())
    if edge > 1e-8:
        raise TruncationError(
            f"displacement/squeeze too large for internal ladder (edge weight {edge:.2e})"
        )
    probs = weights[: n_max + 1]
    residual = float(1.0 - probs.sum())
    return PhotonDistribution(probs, residual, "ok" if residual <= RESIDUAL_WARN else "truncation_warning")


def two_photon_amplitude_approx(spec: SqueezeSpec) -> float:
    """Small-field two-photon weight (alpha_bar^2 - r)^2 / 2; zero-phase only."""
    if spec.theta != 0.0 or spec.vartheta != 0.0:
        raise ValueError("approximation is stated for theta = vartheta = 0")
    return float((spec.alpha_bar**2 - spec.r) ** 2 / 2.0)


def squeezing_db(r: float) -> float:
    """Quadrature squeezing in dB: 10 log10 of e^{-2r} (0 at r=0, negative for r>0)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return float(10.0 * np.log10(np.exp(-2.0 * r)))


def _quad_terms(rho: DensityMatrix, c: OutputProjection, ops: dict):
    c_op = c.u * ops["a_h"] + c.v * ops["a_v"]
    amp = rho.expect(c_op)
    cc = rho.expect(c_op @ c_op)
    ccd = rho.expect(c_op @ c_op.dag()).real
    cdc = rho.expect(c_op.dag() @ c_op).real
    s = cc - amp**2
    return amp, s, ccd, cdc


def quadrature_variance(rho: DensityMatrix, c: OutputProjection, quad_angle: float, ops: dict) -> float:
    """Variance of X(lam) = (c e^{-i lam} + c† e^{i lam})/2 on rho."""
    amp, s, ccd, cdc = _quad_terms(rho, c, ops)
    return float(
        0.25 * (2.0 * np.real(np.exp(-2j * quad_angle) * s) + ccd + cdc - 2.0 * abs(amp) ** 2)
    )


def quadrature_minimum(rho: DensityMatrix, c: OutputProjection, ops: dict) -> tuple[float, float]:
    """(min over lam of Var X(lam), minimizing lam in [0, pi))."""
    amp, s, ccd, cdc = _quad_terms(rho, c, ops)
    v_min = 0.25 * (ccd + cdc - 2.0 * abs(amp) ** 2 - 2.0 * abs(s))
    lam = 0.5 * (np.angle(s) + np.pi) if abs(s) > 0 else 0.0
    return float(v_min), float(np.mod(lam, np.pi))


def estimate_squeeze_magnitude(rho: DensityMatrix, c: OutputProjection, ops: dict) -> float:
    """r-hat = -ln(4 min Var X)/2; an estimator, exact for pure squeezed states."""
    v_min, _ = quadrature_minimum(rho, c, ops)
    if v_min <= 0:
        raise ValueError("non-positive quadrature variance")
    return float(-0.5 * np.log(4.0 * v_min))

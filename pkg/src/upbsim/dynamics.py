"""Time propagation, two-time photon correlations, and detector convolution.

Propagation integrates the vectorized master equation with an adaptive stiff
solver (BDF on the real-stacked state, with the constant sparse Jacobian
supplied).  g2(tau) follows from the regression rule: evolve the
operator-perturbed steady state c rho c† under the same generator and trace
against c†c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .hilbert import Operator
from .liouvillian import DensityMatrix, Superoperator, unvectorize, vectorize
from .model import SystemParams
from .polarization import OutputProjection

RTOL = 1e-10
ATOL = 1e-13
INTENSITY_FLOOR = 1e-12
DEFAULT_N_TAU = 2048
DETECTOR_FWHM_NS = 0.530


class IntegrationError(RuntimeError):
    """The adaptive integrator failed to reach the requested time."""


class ResolutionError(ValueError):
    """Curve sampling too coarse for the requested convolution kernel."""


@dataclass(frozen=True)
class CorrelationCurve:
    """g2 samples on a uniform delay grid, symmetric about zero by reflection."""

    tau_grid: np.ndarray  # ns, ascending, symmetric about 0
    values: np.ndarray    # g2(tau), same length
    mean_n: float         # <c†c> used for normalization

    def __post_init__(self):
        t = np.asarray(self.tau_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("tau_grid and values must be 1-D arrays of equal length")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "tau_grid", t)
        object.__setattr__(self, "values", v)

    @property
    def spacing(self) -> float:
        return float(self.tau_grid[1] - self.tau_grid[0])

    def at_zero(self) -> float:
        i = int(np.argmin(np.abs(self.tau_grid)))
        return float(self.values[i])


def default_tau_grid(params: SystemParams, n: int = DEFAULT_N_TAU) -> np.ndarray:
    """Uniform grid over [0, 10 / min nonzero rate]ic delays in ns."""
    span = 10.0 / params.min_nonzero_rate()
    return np.linspace(0.0, span, n)


def _real_stacked(lind: Superoperator) -> sp.csr_matrix:
    """[[Re L, -Im L], [Im L, Re L]] acting on [Re y; Im y]."""
    lr = sp.csr_matrix(lind.matrix.real)
    li = sp.csr_matrix(lind.matrix.imag)
    return sp.bmat([[lr, -li], [li, lr]], format="csr")


def propagate(
    lind: Superoperator,
    y0: np.ndarray,
    taus: np.ndarray,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> np.ndarray:
    """exp(L tau) y0 sampled at each tau (ascending, taus[0] >= 0).

    Returns an array of shape (len(taus), d^2).  Dense-output interpolation of
    the adaptive solver hits the grid points exactly.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0:
        return np.empty((0, y0.size), dtype=complex)
    if taus[0] < 0 or np.any(np.diff(taus) <= 0) and taus.size > 1:
        raise ValueError("taus must be ascending and non-negative")
    jac = _real_stacked(lind)
    yr0 = np.concatenate([y0.real, y0.imag])

    out = np.empty((taus.size, y0.size), dtype=complex)
    start = 0
    if taus[0] == 0.0:
        out[0] = y0
        start = 1
    if start == taus.size:
        return out
    sol = solve_ivp(
        lambda _t, y: jac @ y,
        (0.0, float(taus[-1])),
        yr0,
        method="BDF",
        t_eval=taus[start:],
        jac=lambda _t, _y: jac,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationError(f"BDF integration failed: {sol.message}")
    n = y0.size
    out[start:] = (sol.y[:n] + 1j * sol.y[n:]).T
    return out


def evolve(
    lind: Superoperator,
    rho0: DensityMatrix,
    tau: float,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> DensityMatrix:
    """rho(tau) = exp(L tau) rho0."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0.0:
        return rho0
    y = propagate(lind, vectorize(rho0.matrix), np.array([tau]), rtol, atol)[0]
    rho = unvectorize(y, lind.dim)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(lind.layout, rho)


def projected_mode_operator(c: OutputProjection, ops: dict) -> Operator:
    return c.u * ops["a_h"] + c.v * ops["a_v"]


def g2_zero(rho: DensityMatrix, c: OutputProjection, ops: dict) -> float:
    """<c†c†cc> / <c†c>^2; NaN (low-intensity) below the photon-number floor."""
    c_op = projected_mode_operator(c, ops)
    n = rho.expect(c_op.dag() @ c_op).real
    if n < INTENSITY_FLOOR:
        return float("nan")
    g4 = rho.expect(c_op.dag() @ c_op.dag() @ c_op @ c_op).real
    return float(g4 / n**2)


def g2_tau(
    lind: Superoperator,
    rho_ss: DensityMatrix,
    c: OutputProjection,
    tau_grid: np.ndarray,
    ops: dict,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> CorrelationCurve:
    """Regression-rule g2(tau) on tau_grid >= 0, reflected to negative delays.

    G2(tau) = Tr[c†c exp(L tau)(c rho c†)], normalized by <c†c>^2; the
    stationary pair correlation is symmetric, g2(-tau) = g2(tau).
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    c_op = projected_mode_operator(c, ops)
    n = rho_ss.expect(c_op.dag() @ c_op).real
    if n < INTENSITY_FLOOR:
        raise ValueError("projected intensity below floor; no correlation curve")
    seed = c_op.matrix @ rho_ss.matrix @ c_op.matrix.conj().T
    evolved = propagate(lind, vectorize(seed), tau_grid, rtol, atol)
    tr_vec = (c_op.dag() @ c_op).matrix.T.reshape(-1, order="F")
    g2_pos = np.real(evolved @ tr_vec) / n**2
    taus = np.concatenate([-tau_grid[:0:-1], tau_grid])
    vals = np.concatenate([g2_pos[:0:-1], g2_pos])
    return CorrelationCurve(taus, vals, float(n))


def detector_kernel(spacing: float, fwhm: float, shape: str = "gaussian") -> np.ndarray:
    """Unit-area discrete response kernel, truncated at +-4 sigma."""
    sigma = fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
    half = int(np.ceil(4.0 * sigma / spacing))
    t = np.arange(-half, half + 1) * spacing
    if shape == "gaussian":
        k = np.exp(-0.5 * (t / sigma) ** 2)
    elif shape == "biexponential":
        # two-sided exponential with matched FWHM (half-width at half max = fwhm/2)
        k = np.exp(-np.abs(t) * (np.log(2.0) / (fwhm / 2.0)))
    else:
        raise ValueError(f"unknown kernel shape {shape!r}")
    return k / k.sum()


def convolve_detector(
    curve: CorrelationCurve,
    fwhm: float = DETECTOR_FWHM_NS,
    shape: str = "gaussian",
) -> CorrelationCurve:
    """Smear a correlation curve with the detector response.

    The grid must resolve the kernel (spacing <= fwhm/10).  Beyond the sampled
    window the curve is padded with its asymptote, 1.  In the delta-kernel
    limit (fwhm below spacing/100) the input is returned unchanged.
    """
    dt = curve.spacing
    if fwhm <= dt / 100.0:
        return CorrelationCurve(curve.tau_grid, curve.values.copy(), curve.mean_n)
    if dt > fwhm / 10.0:
        raise ResolutionError(
            f"grid spacing {dt:.3g} ns too coarse for fwhm {fwhm:.3g} ns (need <= fwhm/10)"
        )
    kernel = detector_kernel(dt, fwhm, shape)
    half = len(kernel) // 2
    padded = np.concatenate([np.ones(half), curve.values, np.ones(half)])
    smeared = np.convolve(padded, kernel, mode="valid")
    return CorrelationCurve(curve.tau_grid, smeared, curve.mean_n)

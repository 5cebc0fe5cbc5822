import numpy as np
import pytest
from scipy.linalg import expm

from upbsim.dynamics import (
    CorrelationCurve,
    ResolutionError,
    convolve_detector,
    evolve,
    g2_tau,
    g2_zero,
)
from upbsim.hilbert import SpaceLayout, mode_operators
from upbsim.liouvillian import DensityMatrix, build_liouvillian, steady_state, vectorize
from upbsim.model import SystemParams, build_hamiltonian, collapse_operators, default_params
from upbsim.polarization import OutputProjection, linear_output


def _lindblad_for(params, layout):
    return build_liouvillian(
        build_hamiltonian(params, layout), collapse_operators(params, layout)
    )


def _basis_state(layout, n_h, n_v, q):
    rho = np.zeros((layout.dim, layout.dim), dtype=complex)
    i = layout.index(n_h, n_v, q)
    rho[i, i] = 1.0
    return DensityMatrix(layout, rho)


def test_evolve_zero_time_is_identity():
    layout = SpaceLayout(1)
    lind = _lindblad_for(default_params(), layout)
    rho0 = _basis_state(layout, 1, 0, 0)
    assert evolve(lind, rho0, 0.0) is rho0


def test_fock_state_decay():
    # empty decaying cavity from |1>: <n(tau)> = e^{-kappa tau}
    layout = SpaceLayout(2)
    kappa = 1.3
    params = SystemParams(kappa_h=kappa, kappa_v=0.7)
    lind = _lindblad_for(params, layout)
    rho0 = _basis_state(layout, 1, 0, 0)
    ops = mode_operators(layout)
    n_op = ops["a_h"].dag() @ ops["a_h"]
    for kt in (0.5, 1.0, 2.0):
        rho_t = evolve(lind, rho0, kt / kappa)
        assert abs(rho_t.expect(n_op).real - np.exp(-kt)) < 1e-6
        assert abs(np.trace(rho_t.matrix) - 1.0) < 1e-9


def test_g2_zero_coherent_state():
    layout = SpaceLayout(6)
    params = default_params().replace(g=0.0)
    rho = steady_state(_lindblad_for(params, layout))
    ops = mode_operators(layout)
    for theta in (0.0, np.pi / 3):
        val = g2_zero(rho, linear_output(theta), ops)
        assert abs(val - 1.0) < 1e-6


def test_g2_zero_single_photon_state():
    layout = SpaceLayout(2)
    rho = _basis_state(layout, 1, 0, 0)
    ops = mode_operators(layout)
    assert g2_zero(rho, linear_output(0.0), ops) == 0.0


def test_g2_zero_thermal_state():
    # Bose-Einstein diagonal state in the H mode: g2(0) = 2 up to a
    # truncation tail that is negligible for n_bar = 0.02 at n_max = 6
    layout = SpaceLayout(6)
    n_bar = 0.02
    p = n_bar / (1.0 + n_bar)
    weights = np.array([(1 - p) * p**n for n in range(layout.n_max + 1)])
    weights /= weights.sum()
    rho = np.zeros((layout.dim, layout.dim), dtype=complex)
    for n, w in enumerate(weights):
        rho[layout.index(n, 0, 0), layout.index(n, 0, 0)] = w
    ops = mode_operators(layout)
    val = g2_zero(DensityMatrix(layout, rho), linear_output(0.0), ops)
    assert abs(val - 2.0) < 1e-6


def test_g2_zero_low_intensity_flag():
    layout = SpaceLayout(1)
    rho = _basis_state(layout, 0, 0, 0)
    ops = mode_operators(layout)
    assert np.isnan(g2_zero(rho, linear_output(0.3), ops))


def _small_system():
    params = SystemParams(
        omega_c_h=0.4, omega_c_v=-0.4, omega_qd=0.1, g=0.6, phi=np.deg2rad(80.0),
        eta_h=0.25, eta_v=0.2, kappa_h=1.3, kappa_v=1.0, gamma_par=0.25, gamma_star=0.15,
    )
    layout = SpaceLayout(1)
    lind = _lindblad_for(params, layout)
    return params, layout, lind, steady_state(lind)


def test_g2_tau_regression_matches_dense_propagator():
    params, layout, lind, rho = _small_system()
    ops = mode_operators(layout)
    proj = OutputProjection(np.sqrt(0.3), complex(np.sqrt(0.7) * np.exp(0.4j)))
    taus = np.linspace(0.0, 8.0, 64)
    curve = g2_tau(lind, rho, proj, taus, ops)

    c_mat = (proj.u * ops["a_h"] + proj.v * ops["a_v"]).matrix
    n = np.real(np.trace(rho.matrix @ c_mat.conj().T @ c_mat))
    dense = lind.matrix.toarray()
    seed = (c_mat @ rho.matrix @ c_mat.conj().T).reshape(-1, order="F")
    tr = (c_mat.conj().T @ c_mat).T.reshape(-1, order="F")
    mid = curve.values.size // 2
    for i, tau in enumerate(taus):
        brute = np.real(tr @ (expm(dense * tau) @ seed)) / n**2
        assert abs(brute - curve.values[mid + i]) < 1e-8


def test_g2_tau_structure_and_long_time_limit():
    params, layout, lind, rho = _small_system()
    ops = mode_operators(layout)
    proj = linear_output(0.4)
    span = 10.0 / params.min_nonzero_rate()
    taus = np.linspace(0.0, span, 400)
    curve = g2_tau(lind, rho, proj, taus, ops)
    # symmetric grid, g2(-tau) = g2(tau)
    assert np.allclose(curve.tau_grid, -curve.tau_grid[::-1])
    assert np.allclose(curve.values, curve.values[::-1])
    # consistency with the equal-time path
    assert abs(curve.at_zero() - g2_zero(rho, proj, ops)) < 1e-9
    # factorization at long delays
    assert abs(curve.values[-1] - 1.0) < 5e-3
    assert curve.values.min() > -1e-9


def test_regression_trace_matches_intensity_and_decays_without_drive():
    # passive system: Tr[exp(L tau)(a rho a†)] = <a†a>(tau), non-increasing
    layout = SpaceLayout(2)
    params = SystemParams(kappa_h=1.0, kappa_v=1.0, gamma_par=0.2)
    lind = _lindblad_for(params, layout)
    rho = _basis_state(layout, 2, 0, 0)
    ops = mode_operators(layout)
    a = ops["a_h"].matrix
    seed = a @ rho.matrix @ a.conj().T
    from upbsim.dynamics import propagate

    taus = np.linspace(0.0, 5.0, 60)
    evolved = propagate(lind, vectorize(seed), taus)
    d = layout.dim
    traces = np.real([np.trace(v.reshape((d, d), order="F")) for v in evolved])
    n0 = rho.expect(ops["a_h"].dag() @ ops["a_h"]).real
    assert abs(traces[0] - n0) < 1e-12
    assert np.all(np.diff(traces) <= 1e-10)


def test_convolve_delta_kernel_limit():
    taus = np.linspace(-2, 2, 801)
    values = 1.0 - 0.8 * np.exp(-np.abs(taus) / 0.3)
    curve = CorrelationCurve(taus, values, 0.01)
    out = convolve_detector(curve, fwhm=1e-6)
    assert np.abs(out.values - values).max() < 1e-9


def test_convolve_constant_curve_unchanged():
    taus = np.linspace(-3, 3, 1201)
    curve = CorrelationCurve(taus, np.ones_like(taus), 1.0)
    out = convolve_detector(curve, fwhm=0.53)
    assert np.abs(out.values - 1.0).max() < 1e-12


def test_convolve_respects_extremes():
    taus = np.linspace(-3, 3, 2401)
    values = 1.0 - 0.995 * np.exp(-(taus / 0.05) ** 2)
    curve = CorrelationCurve(taus, values, 0.01)
    out = convolve_detector(curve, fwhm=0.53)
    assert out.values.min() >= values.min() - 1e-9
    assert out.values.max() <= values.max() + 1e-9
    # a dip much narrower than the response is strongly washed out
    assert out.at_zero() > 10 * (1 - 0.995)


def test_convolve_grid_too_coarse():
    taus = np.linspace(-2, 2, 21)
    curve = CorrelationCurve(taus, np.ones_like(taus), 1.0)
    with pytest.raises(ResolutionError):
        convolve_detector(curve, fwhm=0.53)

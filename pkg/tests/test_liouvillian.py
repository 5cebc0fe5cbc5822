import itertools

import numpy as np
import pytest

from upbsim.dynamics import evolve
from upbsim.hilbert import SpaceLayout, mode_operators
from upbsim.liouvillian import (
    DegenerateSteadyStateError,
    DensityMatrix,
    TruncationError,
    build_liouvillian,
    steady_state,
)
from upbsim.model import SystemParams, build_hamiltonian, collapse_operators, default_params


def _lindblad_for(params, layout):
    return build_liouvillian(
        build_hamiltonian(params, layout), collapse_operators(params, layout)
    )


def test_zero_hamiltonian_no_collapses_is_zero():
    layout = SpaceLayout(1)
    h = build_hamiltonian(SystemParams(kappa_h=1.0, kappa_v=1.0), layout)
    lind = build_liouvillian(h, [])
    assert abs(lind.matrix).max() == 0.0


def test_decaying_cavity_spectrum():
    # two independent decaying modes + inert emitter: the full spectrum is the
    # set of sums of single-mode eigenvalues {0, -kappa/2, -kappa/2, -kappa}
    layout = SpaceLayout(1)
    kappa_h, kappa_v = 1.7, 0.9
    params = SystemParams(kappa_h=kappa_h, kappa_v=kappa_v)
    lind = _lindblad_for(params, layout)
    eigs = np.sort_complex(np.linalg.eigvals(lind.matrix.toarray()))

    single = lambda k: [0.0, -k / 2, -k / 2, -k]
    expected = sorted(
        (h + v for h, v, _q in itertools.product(single(kappa_h), single(kappa_v), range(4))),
    )
    assert np.allclose(np.sort(eigs.real), expected, atol=1e-10)
    assert np.abs(eigs.imag).max() < 1e-10


def test_trace_preservation_left_null_vector():
    rng = np.random.default_rng(3)
    layout = SpaceLayout(2)
    for _ in range(5):
        params = SystemParams(
            omega_c_h=rng.uniform(-30, 30),
            omega_c_v=rng.uniform(-30, 30),
            omega_qd=rng.uniform(-30, 30),
            g=rng.uniform(0, 80),
            phi=rng.uniform(0, 2 * np.pi),
            eta_h=rng.uniform(0, 30),
            eta_v=rng.uniform(0, 30),
            kappa_h=rng.uniform(10, 300),
            kappa_v=rng.uniform(10, 300),
            gamma_par=rng.uniform(0, 10),
            gamma_star=rng.uniform(0, 10),
        )
        assert _lindblad_for(params, layout).trace_defect() < 1e-10


def test_no_drive_steady_state_is_vacuum_ground():
    layout = SpaceLayout(2)
    params = default_params().replace(eta_h=0.0, eta_v=0.0)
    rho = steady_state(_lindblad_for(params, layout))
    assert np.isclose(rho.matrix[0, 0].real, 1.0, atol=1e-10)
    assert abs(rho.matrix).max() <= 1.0 + 1e-12


def test_driven_cavity_matches_coherent_state():
    # g = 0 decouples the emitter; each mode settles into the analytic
    # coherent state alpha = -i eta / (kappa/2 + i (omega_l - omega_c))
    layout = SpaceLayout(6)
    params = default_params(cavity_splitting_ghz=10.0).replace(g=0.0)
    lind = _lindblad_for(params, layout)
    rho = steady_state(lind)
    ops = mode_operators(layout)
    for eta, kappa, omega_c, a in (
        (params.eta_h, params.kappa_h, params.omega_c_h, ops["a_h"]),
        (params.eta_v, params.kappa_v, params.omega_c_v, ops["a_v"]),
    ):
        alpha = -1j * eta / (kappa / 2 + 1j * (params.omega_l - omega_c))
        assert abs(rho.expect(a) - alpha) < 1e-8
        assert abs(rho.expect(a.dag() @ a).real - abs(alpha) ** 2) < 1e-8


def test_steady_state_agrees_with_long_time_propagation():
    layout = SpaceLayout(3)
    params = default_params()
    lind = _lindblad_for(params, layout)
    rho_ss = steady_state(lind)
    vac = np.zeros((layout.dim, layout.dim), dtype=complex)
    vac[0, 0] = 1.0
    horizon = 20.0 / params.min_nonzero_rate()
    rho_t = evolve(lind, DensityMatrix(layout, vac), horizon)
    assert np.abs(rho_t.matrix - rho_ss.matrix).max() < 1e-7


def test_steady_state_is_fixed_point():
    layout = SpaceLayout(2)
    params = default_params()
    lind = _lindblad_for(params, layout)
    rho_ss = steady_state(lind)
    ops = mode_operators(layout)
    n_op = ops["a_h"].dag() @ ops["a_h"]
    for tau in (0.01, 0.1, 1.0):
        rho_t = evolve(lind, rho_ss, tau)
        assert abs(rho_t.expect(n_op) - rho_ss.expect(n_op)) < 1e-8
        assert np.abs(rho_t.matrix - rho_ss.matrix).max() < 1e-8


def test_degenerate_kernel_is_reported():
    # no drive, no emitter decay: the emitter population never relaxes, so the
    # stationary manifold is two-dimensional
    layout = SpaceLayout(1)
    params = SystemParams(kappa_h=1.0, kappa_v=1.0, gamma_par=0.0, gamma_star=0.5)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(_lindblad_for(params, layout))


def test_solver_deterministic_across_orderings():
    layout = SpaceLayout(2)
    lind = _lindblad_for(default_params(), layout)
    rho_a = steady_state(lind, permc_spec="COLAMD")
    rho_b = steady_state(lind, permc_spec="NATURAL")
    assert np.abs(rho_a.matrix - rho_b.matrix).max() < 1e-10
    rho_c = steady_state(lind, permc_spec="COLAMD")
    assert np.array_equal(rho_a.matrix, rho_c.matrix)


def test_spectrum_is_stable():
    # all eigenvalues in the closed left half plane (small layouts only)
    for n_max in (1, 2):
        layout = SpaceLayout(n_max)
        lind = _lindblad_for(default_params(), layout)
        eigs = np.linalg.eigvals(lind.matrix.toarray())
        assert eigs.real.max() < 1e-10 * max(1.0, abs(lind.matrix).max())


def test_density_matrix_validation():
    layout = SpaceLayout(1)
    d = layout.dim
    bad = np.eye(d, dtype=complex) / d
    bad[0, 0] = -1e-4          # negative weight beyond tolerance
    bad[1, 1] = 2.0 / d + 1e-4  # keep the trace at exactly 1
    with pytest.raises(TruncationError):
        DensityMatrix(layout, bad).validate()

"""Built-in oracle suite: fast independent checks of the numerical core.

Each check returns (name, passed, detail).  These are the same oracles the
test suite uses, packaged so a deployed build can be validated from the CLI
without a test runner.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .dynamics import CorrelationCurve, convolve_detector, default_tau_grid, g2_tau
from .hilbert import SpaceLayout, mode_operators
from .liouvillian import build_liouvillian, steady_state
from .model import SystemParams, build_hamiltonian, collapse_operators, default_params
from .observables import (
    SqueezeSpec,
    displaced_squeezed_fock_probs,
    squeezing_db,
    two_photon_amplitude_approx,
)
from .polarization import OutputProjection, hwp, qwp


def check_coherent_cavity() -> tuple[str, bool, str]:
    """g = 0 steady state must be the analytic driven-cavity coherent state."""
    base = default_params(cavity_splitting_ghz=10.0).replace(g=0.0)
    scale = np.sqrt(0.004 / 0.06)  # output-scale drive: truncation tail below 1e-10
    params = base.replace(eta_h=base.eta_h * scale, eta_v=base.eta_v * scale)
    layout = SpaceLayout(4)
    lind = build_liouvillian(build_hamiltonian(params, layout), collapse_operators(params, layout))
    rho = steady_state(lind)
    ops = mode_operators(layout)
    worst = 0.0
    for eta, kappa, omega_c, a in (
        (params.eta_h, params.kappa_h, params.omega_c_h, ops["a_h"]),
        (params.eta_v, params.kappa_v, params.omega_c_v, ops["a_v"]),
    ):
        alpha = -1j * eta / (kappa / 2.0 + 1j * (params.omega_l - omega_c))
        worst = max(worst, abs(rho.expect(a) - alpha))
        worst = max(worst, abs(rho.expect(a.dag() @ a).real - abs(alpha) ** 2))
    return ("coherent-cavity steady state", worst < 1e-8, f"max deviation {worst:.2e}")


def check_regression_small() -> tuple[str, bool, str]:
    """Regression g2(tau) against a dense full-propagator computation."""
    params = SystemParams(
        omega_c_h=0.4, omega_c_v=-0.4, omega_qd=0.1, g=0.6, phi=np.deg2rad(80.0),
        eta_h=0.25, eta_v=0.2, kappa_h=1.3, kappa_v=1.0, gamma_par=0.25, gamma_star=0.15,
    )
    layout = SpaceLayout(1)
    ops = mode_operators(layout)
    lind = build_liouvillian(build_hamiltonian(params, layout), collapse_operators(params, layout))
    rho = steady_state(lind)
    proj = OutputProjection(np.sqrt(0.3), complex(np.sqrt(0.7) * np.exp(0.4j)))
    taus = np.linspace(0.0, 8.0, 64)
    curve = g2_tau(lind, rho, proj, taus, ops)
    c_mat = (proj.u * ops["a_h"] + proj.v * ops["a_v"]).matrix
    n = np.real(np.trace(rho.matrix @ c_mat.conj().T @ c_mat))
    dense = lind.matrix.toarray()
    seed = (c_mat @ rho.matrix @ c_mat.conj().T).reshape(-1, order="F")
    tr = (c_mat.conj().T @ c_mat).T.reshape(-1, order="F")
    worst = 0.0
    mid = curve.values.size // 2
    for i, tau in enumerate(taus):
        brute = np.real(tr @ (expm(dense * tau) @ seed)) / n**2
        worst = max(worst, abs(brute - curve.values[mid + i]))
    return ("quantum-regression vs dense propagator", worst < 1e-8, f"max |diff| {worst:.2e}")


def check_two_photon_formula() -> tuple[str, bool, str]:
    """Displaced-squeezed two-photon weight: exact operator vs closed form."""
    spec = SqueezeSpec(alpha_bar=0.1, r=0.005)
    exact = displaced_squeezed_fock_probs(spec, 8).probabilities[2]
    approx = two_photon_amplitude_approx(spec)
    rel = abs(exact - approx) / exact
    ok = rel < 0.05
    spec0 = SqueezeSpec(alpha_bar=0.1, r=0.01)
    p2_cancel = displaced_squeezed_fock_probs(spec0, 8).probabilities[2]
    ok = ok and p2_cancel < 10.0 * 0.1**8
    return (
        "two-photon cancellation formula",
        ok,
        f"rel err {rel:.3f}, cancelled P(2) {p2_cancel:.2e}",
    )


def check_squeezing_db() -> tuple[str, bool, str]:
    val = squeezing_db(0.004)
    return ("squeezing decibel figure", abs(val - (-0.0347)) < 5e-5, f"{val:.5f} dB")


def check_invariants() -> tuple[str, bool, str]:
    """Hermiticity, trace preservation, Jones unitarity on stock parameters."""
    params = default_params()
    layout = SpaceLayout(2)
    h = build_hamiltonian(params, layout)
    hermitian = float(np.abs(h.matrix - h.matrix.conj().T).max())
    lind = build_liouvillian(h, collapse_operators(params, layout))
    trace_defect = lind.trace_defect()
    junit = 0.0
    for theta in np.linspace(0, np.pi, 7):
        m = (qwp(theta) @ hwp(theta / 2)).matrix
        junit = max(junit, float(np.abs(m.conj().T @ m - np.eye(2)).max()))
    ok = hermitian < 1e-14 * max(1.0, np.abs(h.matrix).max()) and trace_defect < 1e-10 and junit < 1e-13
    return (
        "structural invariants",
        ok,
        f"hermiticity {hermitian:.1e}, trace defect {trace_defect:.1e}, unitarity {junit:.1e}",
    )


def check_convolution() -> tuple[str, bool, str]:
    taus = np.linspace(-3.0, 3.0, 1201)
    flat = CorrelationCurve(taus, np.ones_like(taus), 1.0)
    out = convolve_detector(flat, 0.53)
    dev = float(np.abs(out.values - 1.0).max())
    return ("detector-kernel normalization", dev < 1e-12, f"max deviation {dev:.2e}")


ALL_CHECKS = (
    check_invariants,
    check_coherent_cavity,
    check_regression_small,
    check_two_photon_formula,
    check_squeezing_db,
    check_convolution,
)


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    for check in ALL_CHECKS:
        name, ok, detail = check()
        all_ok &= ok
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok

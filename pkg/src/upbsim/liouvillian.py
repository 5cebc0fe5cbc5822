"""Lindblad superoperator assembly and steady-state solution.

Density matrices are vectorized column-major (Fortran order), for which
vec(A rho B) = (B^T kron A) vec(rho).  The generator is

    L = -i [ (I kron H) - (H^T kron I) ]
        + sum_k [ conj(C_k) kron C_k
                  - 1/2 (I kron C_k†C_k) - 1/2 ((C_k†C_k)^T kron I) ]

Trace preservation shows up as vec(I)^T L = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hilbert import Operator, SpaceLayout

TRACE_TOL = 1e-10
HERM_TOL = 1e-10
POSITIVITY_TOL = -1e-8
RESIDUAL_TOL = 1e-10


class LayoutMismatchError(ValueError):
    """Operators passed to the builder live on different layouts."""


class DegenerateSteadyStateError(RuntimeError):
    """The generator has a non-unique kernel (or the solve is singular)."""


class TruncationError(RuntimeError):
    """The state has negative weight beyond tolerance; raise n_max."""


@dataclass(frozen=True)
class Superoperator:
    """Sparse d^2 x d^2 generator acting on column-major vectorized states."""

    layout: SpaceLayout
    matrix: sp.csc_matrix

    @property
    def dim(self) -> int:
        return self.layout.dim

    def trace_defect(self) -> float:
        """max |vec(I)^T L|; ~0 for any Lindblad generator."""
        d = self.dim
        tr = np.zeros(d * d)
        tr[np.arange(d) * (d + 1)] = 1.0
        return float(np.abs(tr @ self.matrix).max())


@dataclass(frozen=True)
class DensityMatrix:
    layout: SpaceLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise LayoutMismatchError(
                f"density matrix shape {m.shape} != layout dimension {self.layout.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def validate(self, positivity_tol: float = POSITIVITY_TOL) -> None:
        m = self.matrix
        herm = float(np.abs(m - m.conj().T).max())
        if herm > HERM_TOL:
            raise ValueError(f"state not Hermitian: max deviation {herm:.2e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"state trace {tr} != 1")
        min_eig = float(np.linalg.eigvalsh(m).min())
        if min_eig < positivity_tol:
            raise TruncationError(
                f"state has eigenvalue {min_eig:.2e} below tolerance; "
                "increase the photon truncation n_max"
            )

    def expect(self, op: Operator) -> complex:
        return complex(np.sum(self.matrix.T * op.matrix))


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")


def build_liouvillian(h: Operator, collapses: list[Operator]) -> Superoperator:
    layout = h.layout
    if layout is None:
        raise LayoutMismatchError("Hamiltonian must carry a composite layout")
    for c in collapses:
        if c.layout != layout:
            raise LayoutMismatchError("collapse operator layout differs from Hamiltonian")
    d = layout.dim
    eye = sp.identity(d, format="csr", dtype=complex)
    hs = sp.csr_matrix(h.matrix)
    lind = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))
    for c in collapses:
        cs = sp.csr_matrix(c.matrix)
        cdc = (cs.conj().T @ cs).tocsr()
        lind = lind + sp.kron(cs.conj(), cs) - 0.5 * (sp.kron(eye, cdc) + sp.kron(cdc.T, eye))
    return Superoperator(layout, lind.tocsc())


def _trace_row(d: int) -> np.ndarray:
    row = np.zeros(d * d)
    row[np.arange(d) * (d + 1)] = 1.0
    return row


def _finish(layout: SpaceLayout, x: np.ndarray, lind: Superoperator) -> DensityMatrix:
    d = layout.dim
    rho = unvectorize(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(lind.matrix @ vectorize(rho)))
    scale = float(np.sqrt((np.abs(lind.matrix.data) ** 2).sum()))  # Frobenius norm
    if scale > 0 and residual / scale > RESIDUAL_TOL:
        raise DegenerateSteadyStateError(
            f"steady-state residual {residual / scale:.2e} exceeds {RESIDUAL_TOL:.0e}; "
            "the generator kernel may be degenerate"
        )
    state = DensityMatrix(layout, rho)
    state.validate()
    return state


def steady_state(lind: Superoperator, permc_spec: str = "COLAMD") -> DensityMatrix:
    """Null vector of L with unit trace, via sparse LU with a trace-constraint row.

    Row 0 of L (the population equation of the first basis state, linearly
    dependent on the others through trace conservation) is replaced by the
    trace row; the resulting system A x = e_0 is solved directly.  If the
    factorization reports singularity, fall back to a shift-invert eigensolve
    of the eigenvalue nearest zero; a degenerate kernel is reported as an
    error rather than an arbitrary mixture.
    """
    d = lind.dim
    trace_row = sp.csr_matrix(_trace_row(d).astype(complex))
    a = sp.vstack([trace_row, lind.matrix.tocsr()[1:]], format="csc")
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    try:
        lu = spla.splu(a, permc_spec=permc_spec)
        x = lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise RuntimeError("non-finite solution")
    except RuntimeError:
        return _steady_eigen(lind)
    return _finish(lind.layout, x, lind)


def _steady_eigen(lind: Superoperator) -> DensityMatrix:
    """Fallback: smallest-magnitude eigenpair via shift-invert about sigma > 0.

    All eigenvalues of a Lindblad generator satisfy Re(lambda) <= 0, so a small
    positive real shift is never an eigenvalue and the nearest eigenvalue to it
    is the stationary one.  k=2 exposes kernel degeneracy.
    """
    scale = float(np.abs(lind.matrix.data).max())
    sigma = 1e-6 * scale
    vals, vecs = spla.eigs(lind.matrix, k=2, sigma=sigma, which="LM")
    order = np.argsort(np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    tol = 1e-10 * scale
    if abs(vals[0]) > tol:
        raise DegenerateSteadyStateError(
            f"no eigenvalue at zero within {tol:.2e} (closest: {vals[0]:.2e})"
        )
    if abs(vals[1]) < tol:
        raise DegenerateSteadyStateError(
            f"kernel is degenerate: two eigenvalues within {tol:.2e} of zero"
        )
    return _finish(lind.layout, vecs[:, 0], lind)

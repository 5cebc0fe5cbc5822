"""Truncated Fock-space operator algebra for the two-mode-cavity + emitter system.

The composite Hilbert space is the tensor product of three slots, in fixed
order (H cavity, V cavity, two-level emitter), with the emitter index fastest.
Each cavity mode is a Fock ladder truncated at ``n_max`` photons, so the total
dimension is ``(n_max + 1)**2 * 2``.

Operators are stored dense (the default spaces are small, d = 32 at
n_max = 3); sparsity is introduced only at the superoperator level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SLOTS = ("H", "V", "QD")

HERMITICITY_TOL = 1e-12


class HilbertError(ValueError):
    """Invalid layout, slot, or operator dimension."""


@dataclass(frozen=True)
class SpaceLayout:
    """Dimension bookkeeping for the composite (H, V, QD) space.

    Basis ordering is lexicographic in (n_H, n_V, qd) with the emitter index
    varying fastest, i.e. state |n_H, n_V, q> has index
    ``(n_H * (n_max+1) + n_V) * 2 + q``.
    """

    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, int) or self.n_max < 1:
            raise HilbertError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim_mode(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.dim_mode**2 * 2

    def slot_dim(self, slot: str) -> int:
        if slot not in SLOTS:
            raise HilbertError(f"unknown slot {slot!r}, expected one of {SLOTS}")
        return 2 if slot == "QD" else self.dim_mode

    def index(self, n_h: int, n_v: int, qd: int) -> int:
        """Basis index of |n_H, n_V, qd> (qd: 0 ground, 1 excited)."""
        if not (0 <= n_h <= self.n_max and 0 <= n_v <= self.n_max and qd in (0, 1)):
            raise HilbertError(f"state ({n_h}, {n_v}, {qd}) outside layout")
        return (n_h * self.dim_mode + n_v) * 2 + qd


@dataclass(frozen=True)
class Operator:
    """A complex matrix, optionally tied to a composite-space layout.

    Single-slot building blocks (a Fock ladder operator, the emitter lowering
    operator) carry ``layout=None``; composite operators carry the layout they
    were embedded into.  The matrix is frozen after construction.
    """

    matrix: np.ndarray
    layout: SpaceLayout | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise HilbertError(f"operator matrix must be square, got shape {m.shape}")
        if self.layout is not None and m.shape[0] != self.layout.dim:
            raise HilbertError(
                f"matrix dimension {m.shape[0]} != layout dimension {self.layout.dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.layout)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return float(np.abs(self.matrix - self.matrix.conj().T).max()) < tol

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Operator):
            if other.dim != self.dim:
                raise HilbertError("operator dimension mismatch")
            return other.matrix
        raise TypeError(f"expected Operator, got {type(other).__name__}")

    def __add__(self, other) -> "Operator":
        return Operator(self.matrix + self._coerce(other), self.layout or getattr(other, "layout", None))

    def __sub__(self, other) -> "Operator":
        return Operator(self.matrix - self._coerce(other), self.layout or getattr(other, "layout", None))

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.layout)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.matrix * complex(scalar), self.layout)

    __rmul__ = __mul__

    def __matmul__(self, other) -> "Operator":
        return Operator(self.matrix @ self._coerce(other), self.layout or getattr(other, "layout", None))


def fock_annihilation(n_max: int) -> Operator:
    """Single-mode annihilation operator on the Fock ladder 0..n_max.

    a[n-1, n] = sqrt(n).  On the truncated ladder [a, a†] equals the identity
    except for the (n_max, n_max) element, which is -n_max.
    """
    if not isinstance(n_max, int) or n_max < 1:
        raise HilbertError(f"n_max must be an integer >= 1, got {n_max!r}")
    a = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        a[n - 1, n] = np.sqrt(n)
    return Operator(a)


def two_level_lowering() -> Operator:
    """Emitter lowering operator sigma = |g><e| in the (ground, excited) basis."""
    return Operator(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


def identity(layout: SpaceLayout) -> Operator:
    return Operator(np.eye(layout.dim, dtype=complex), layout)


def embed(op: Operator, slot: str, layout: SpaceLayout) -> Operator:
    """Embed a single-slot operator into the composite space.

    Kronecker product with identities on the other slots, slot order
    (H, V, QD) with QD fastest.
    """
    want = layout.slot_dim(slot)
    if op.dim != want:
        raise HilbertError(f"slot {slot!r} has dimension {want}, operator has {op.dim}")
    eye_m = np.eye(layout.dim_mode, dtype=complex)
    eye_q = np.eye(2, dtype=complex)
    factors = {
        "H": (op.matrix, eye_m, eye_q),
        "V": (eye_m, op.matrix, eye_q),
        "QD": (eye_m, eye_m, op.matrix),
    }[slot]
    out = np.kron(np.kron(factors[0], factors[1]), factors[2])
    return Operator(out, layout)


@lru_cache(maxsize=None)
def mode_operators(layout: SpaceLayout) -> dict:
    """Composite annihilation/lowering operators, cached per layout.

    Returns {"a_h", "a_v", "sigma"}; all are immutable and safe to share.
    """
    a = fock_annihilation(layout.n_max)
    return {
        "a_h": embed(a, "H", layout),
        "a_v": embed(a, "V", layout),
        "sigma": embed(two_level_lowering(), "QD", layout),
    }


def expectation(rho: np.ndarray, op: Operator) -> complex:
    """Tr(rho @ op) without forming the full product."""
    return complex(np.sum(rho.T * op.matrix))

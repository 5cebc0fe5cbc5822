"""Jones calculus for the input preparation and output projection optics.

Conventions, fixed once and used throughout:
  * Jones vectors live in the (H, V) basis.
  * Waveplate at angle 0 has its fast axis along H, with
    HWP(0) = diag(1, -1) and QWP(0) = diag(1, i).
  * Rotation by theta uses R(theta) = [[cos, -sin], [sin, cos]], so
    J(theta) = R(theta) J(0) R(-theta).
Only relative phases are observable; with these conventions QWP(pi/4) sends
H to the circular state (1, -i)/sqrt(2) (handedness flips under the conjugate
convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-13


@dataclass(frozen=True)
class JonesMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"Jones matrix must be 2x2, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def is_unitary(self, tol: float = UNITARITY_TOL) -> bool:
        return float(np.abs(self.matrix.conj().T @ self.matrix - np.eye(2)).max()) < tol

    def __matmul__(self, other: "JonesMatrix") -> "JonesMatrix":
        return JonesMatrix(self.matrix @ other.matrix)


@dataclass(frozen=True)
class OutputProjection:
    """Normalized coefficients of the detected mode c = u a_H + v a_V."""

    u: complex
    v: complex

    def __post_init__(self):
        norm = abs(self.u) ** 2 + abs(self.v) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|u|^2 + |v|^2 = {norm} != 1")

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.u, self.v], dtype=complex)


@dataclass(frozen=True)
class DriveSettings:
    """Drive amplitudes (rad/ns) plus the relative phase on the V component."""

    eta_h: float
    eta_v: float
    phase_v: float


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _retarder(theta: float, fast_slow: np.ndarray) -> JonesMatrix:
    r = _rotation(theta)
    return JonesMatrix(r @ fast_slow @ r.conj().T)


def hwp(theta: float) -> JonesMatrix:
    """Half-wave plate, fast axis at angle theta from H."""
    return _retarder(theta, np.diag([1.0, -1.0]).astype(complex))


def qwp(theta: float) -> JonesMatrix:
    """Quarter-wave plate, fast axis at angle theta from H."""
    return _retarder(theta, np.diag([1.0, 1.0j]))


def polarizer(axis: str) -> JonesMatrix:
    """Ideal linear polarizer passing the given axis ('H' or 'V')."""
    if axis == "H":
        return JonesMatrix(np.diag([1.0, 0.0]).astype(complex))
    if axis == "V":
        return JonesMatrix(np.diag([0.0, 1.0]).astype(complex))
    raise ValueError(f"polarizer axis must be 'H' or 'V', got {axis!r}")


def input_drive(theta_in: float, eta_total: float) -> DriveSettings:
    """Split a linear input polarization at theta_in (from H) into mode drives.

    eta_H = eta_total cos(theta), eta_V = eta_total sin(theta); negative
    components are folded into non-negative amplitudes with a pi phase on the
    V drive, conserving eta_H^2 + eta_V^2 = eta_total^2.
    """
    if eta_total < 0:
        raise ValueError("eta_total must be >= 0")
    eta_h = eta_total * np.cos(theta_in)
    eta_v = eta_total * np.sin(theta_in)
    phase = 0.0
    if eta_h < 0:
        # global sign is unobservable; flip both and keep the relative phase
        eta_h, eta_v = -eta_h, -eta_v
    if eta_v < 0:
        eta_v = -eta_v
        phase = np.pi
    return DriveSettings(float(eta_h), float(eta_v), float(phase))


def output_mode(
    hwp_angle: float,
    qwp_angle: float,
    polarizer_axis: str = "H",
    order: str = "hwp_qwp",
) -> OutputProjection:
    """Projection seen by the detector behind waveplates and a polarizer.

    Beam order along the propagation direction is cavity -> HWP -> QWP ->
    polarizer by default (``order="qwp_hwp"`` swaps the plates).  The detected
    mode is c = u a_H + v a_V with (u, v)* the polarizer-axis row of the
    Jones-matrix product; the retarder product is unitary so (u, v) is
    normalized up to roundoff.
    """
    if order == "hwp_qwp":
        chain = qwp(qwp_angle) @ hwp(hwp_angle)
    elif order == "qwp_hwp":
        chain = hwp(hwp_angle) @ qwp(qwp_angle)
    else:
        raise ValueError(f"order must be 'hwp_qwp' or 'qwp_hwp', got {order!r}")
    full = polarizer(polarizer_axis) @ chain
    row_index = 0 if polarizer_axis == "H" else 1
    row = full.matrix[row_index]
    row = row / np.linalg.norm(row)
    return OutputProjection(complex(np.conj(row[0])), complex(np.conj(row[1])))


def linear_output(theta_out: float) -> OutputProjection:
    """Direct linear projection c = cos(theta) a_H + sin(theta) a_V."""
    return OutputProjection(complex(np.cos(theta_out)), complex(np.sin(theta_out)))

"""Exact plane-wave solutions of the poroelastic system.

For a prescribed real angular frequency and propagation direction the
velocity and stress amplitudes of a time-harmonic plane wave satisfy a
4x4 eigenproblem whose eigenvalues are the squared complex phase
velocities of the wave families.  With viscosity the wavenumber becomes
complex and the wave decays along its propagation direction.  The modes
constructed here serve as initial data, Dirichlet boundary data, and
error oracles for the finite volume solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .materials import (
    MaterialSpec,
    derive_coefficients,
    build_system_matrices,
)

__all__ = [
    "AnalyticError",
    "PlaneWaveMode",
    "FAMILIES",
    "solve_plane_wave",
    "evaluate_plane_wave",
]

FAMILIES = ("fast_p", "s", "slow_p")

# Modes slower than this are not traveling waves (the 4x4 problem always
# contains one exactly stationary solution) and are excluded from family
# ranking.
MIN_PHASE_SPEED = 1.0  # m/s


class AnalyticError(RuntimeError):
    """Raised when a plane-wave mode cannot be constructed."""


@dataclass(frozen=True)
class PlaneWaveMode:
    """One traveling plane-wave mode in global coordinates.

    The physical field is ``Q(x, z, t) = Re[Q0 exp(i(k(l_x x + l_z z) -
    omega t))]`` with the canonical component ordering.  ``V0`` holds the
    complex velocity amplitudes (v_x, v_z, q_x, q_z) and ``T0`` the
    stress amplitudes (tau_xx, tau_zz, tau_xz, -p).  ``Q0`` has unit
    energy norm, and the wave decays along +(l_x, l_z) when viscosity is
    present (Im k >= 0).
    """

    omega: float
    l_x: float
    l_z: float
    k: complex
    V0: np.ndarray
    T0: np.ndarray
    family: str
    Q0: np.ndarray

    @property
    def phase_speed(self) -> float:
        """Propagation speed omega / Re(k) (m/s)."""
        return self.omega / self.k.real

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.k.real

    @property
    def decay_length(self) -> float:
        """Distance over which the amplitude decreases by a factor e."""
        return math.inf if self.k.imag == 0.0 else 1.0 / self.k.imag

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


def _plane_matrices(coeffs, spec: MaterialSpec, lx: float, lz: float, omega: float):
    """Assemble the 4x4 constitutive, geometric and inertia matrices."""
    a1M = coeffs.alpha1 * coeffs.M
    a3M = coeffs.alpha3 * coeffs.M
    stiff = np.array([
        [lx * coeffs.cu11, lz * coeffs.cu13, a1M * lx, a1M * lz],
        [lx * coeffs.cu13, lz * coeffs.cu33, a3M * lx, a3M * lz],
        [lz * coeffs.cu55, lx * coeffs.cu55, 0.0, 0.0],
        [a1M * lx, a3M * lz, coeffs.M * lx, coeffs.M * lz],
    ])
    geom = np.array([
        [lx, 0.0, lz, 0.0],
        [0.0, lz, lx, 0.0],
        [0.0, 0.0, 0.0, lx],
        [0.0, 0.0, 0.0, lz],
    ])
    rf = spec.rho_f
    # Complex inertia: the Darcy drag enters as i*eta/(kappa*omega).
    y1 = coeffs.m1 + (1j * spec.eta / (spec.kappa1 * omega) if spec.eta else 0.0)
    y3 = coeffs.m3 + (1j * spec.eta / (spec.kappa3 * omega) if spec.eta else 0.0)
    dtype = complex if spec.eta > 0.0 else float
    inertia = np.array([
        [coeffs.rho, 0.0, rf, 0.0],
        [0.0, coeffs.rho, 0.0, rf],
        [rf, 0.0, y1, 0.0],
        [0.0, rf, 0.0, y3],
    ], dtype=dtype)
    return stiff, geom, inertia


def solve_plane_wave(spec: MaterialSpec, omega: float, l_x: float, l_z: float,
                     family: str) -> PlaneWaveMode:
    """Construct the plane-wave mode of one family.

    Parameters
    ----------
    spec : material (its ``theta_mat`` orients the principal axes).
    omega : angular frequency (rad/s), > 0.
    l_x, l_z : direction cosines of the wavevector in global axes.
    family : "fast_p", "s" or "slow_p"; families are ranked by
        descending phase speed.

    Raises
    ------
    AnalyticError
        If the family phase speeds are not separated by at least 0.1%,
        which signals a degenerate material/direction combination.
    """
    if family not in FAMILIES:
        raise AnalyticError(f"unknown wave family {family!r}")
    if not omega > 0.0:
        raise AnalyticError("omega must be positive")
    norm = math.hypot(l_x, l_z)
    if abs(norm - 1.0) > 1e-12:
        raise AnalyticError("direction cosines must have unit norm")

    coeffs = derive_coefficients(spec)
    th = spec.theta_mat
    c, s = math.cos(th), math.sin(th)
    # Direction cosines in the material principal frame.
    lm1 = c * l_x + s * l_z
    lm3 = -s * l_x + c * l_z

    stiff, geom, inertia = _plane_matrices(coeffs, spec, lm1, lm3, omega)
    try:
        eigvals, eigvecs = np.linalg.eig(np.linalg.solve(inertia, geom @ stiff))
    except np.linalg.LinAlgError as exc:
        raise AnalyticError("plane-wave eigenproblem failed") from exc

    # omega/k for each mode; the root with positive real part propagates
    # along +l and, for a passive medium, decays that way (Im k >= 0).
    phase = np.sqrt(eigvals.astype(complex))
    phase = np.where(phase.real < 0.0, -phase, phase)
    traveling = [i for i in range(4) if phase[i].real > MIN_PHASE_SPEED]
    if len(traveling) != 3:
        raise AnalyticError(
            f"expected 3 traveling modes, found {len(traveling)}"
        )
    order = sorted(traveling, key=lambda i: phase[i].real, reverse=True)
    speeds = [phase[i].real for i in order]
    for hi, lo in zip(speeds, speeds[1:]):
        if (hi - lo) <= 1e-3 * hi:
            raise AnalyticError(
                "wave families are not separated by more than 0.1%; "
                f"phase speeds {speeds}"
            )
    idx = order[FAMILIES.index(family)]

    k = omega / phase[idx]
    if k.imag < -1e-10 * abs(k):
        raise AnalyticError("selected root grows along propagation")
    V0m = eigvecs[:, idx].astype(complex)
    T0m = -(k / omega) * (stiff @ V0m)

    # Rotate amplitudes back to global axes: velocities as vectors, the
    # in-plane stresses as a rank-2 tensor, pressure as a scalar.
    V0 = np.array([
        c * V0m[0] - s * V0m[1],
        s * V0m[0] + c * V0m[1],
        c * V0m[2] - s * V0m[3],
        s * V0m[2] + c * V0m[3],
    ])
    cc, ss, cs = c * c, s * s, c * s
    T0 = np.array([
        cc * T0m[0] + ss * T0m[1] - 2.0 * cs * T0m[2],
        ss * T0m[0] + cc * T0m[1] + 2.0 * cs * T0m[2],
        cs * T0m[0] - cs * T0m[1] + (cc - ss) * T0m[2],
        T0m[3],
    ])

    # Global phase convention: largest-magnitude velocity component real
    # positive; then normalize the 8-vector to unit energy norm.
    j = int(np.argmax(np.abs(V0)))
    ph = V0[j] / abs(V0[j])
    V0 = V0 / ph
    T0 = T0 / ph
    Q0 = np.array([T0[0], T0[1], T0[2], V0[0], V0[1], -T0[3], V0[2], V0[3]])
    energy = build_system_matrices(coeffs, spec).energy
    nrm = math.sqrt((Q0.conj() @ energy @ Q0).real)
    V0 = V0 / nrm
    T0 = T0 / nrm
    Q0 = Q0 / nrm

    return PlaneWaveMode(
        omega=omega, l_x=l_x, l_z=l_z, k=complex(k),
        V0=V0, T0=T0, family=family, Q0=Q0,
    )


def evaluate_plane_wave(mode: PlaneWaveMode, x, z, t: float) -> np.ndarray:
    """Evaluate the real plane-wave field at points and time.

    ``x`` and ``z`` may be scalars or broadcastable arrays; the result
    has shape ``(8,) + broadcast_shape`` in the canonical component
    ordering.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    phase = np.exp(1j * (mode.k * (mode.l_x * x + mode.l_z * z) - mode.omega * t))
    return np.real(np.multiply.outer(mode.Q0, phase))

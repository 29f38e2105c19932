"""Poroelastic material description and system-matrix assembly.

A material is specified by the raw parameters of a fluid-saturated
orthotropic solid (drained matrix stiffnesses, grain/fluid moduli and
densities, porosity, permeability, tortuosity, fluid viscosity).  From
these we derive the effective-stress coefficients, the fluid-solid
coupling modulus, undrained stiffnesses and inertia terms, and assemble
the 8x8 matrices of the first-order velocity-stress system

    dQ/dt + Ax dQ/dx + Az dQ/dz = D Q,

for the state vector Q = (tau_xx, tau_zz, tau_xz, v_x, v_z, p, q_x, q_z),
together with the energy Hessian used to define a physically scaled norm.

Matrices are assembled in the material principal frame and rotated to the
global x-z axes when the principal 1-axis is inclined at ``theta_mat``.
All derived quantities are computed once per material and are immutable
afterwards, so they can be shared freely between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "COMPONENTS",
    "MaterialError",
    "MaterialSpec",
    "DerivedCoefficients",
    "SystemMatrices",
    "Material",
    "derive_coefficients",
    "build_system_matrices",
    "rotate_to_global",
    "state_rotation",
    "wave_speeds",
    "preset",
    "PRESET_NAMES",
]

# Canonical state-vector component ordering used by every matrix in the
# package.  Index constants are provided for readability at call sites.
COMPONENTS = ("tau_xx", "tau_zz", "tau_xz", "v_x", "v_z", "p", "q_x", "q_z")
TAU_XX, TAU_ZZ, TAU_XZ, V_X, V_Z, P, Q_X, Q_Z = range(8)

# Relative tolerance for classifying an eigenvalue of the flux Jacobian
# as zero (stationary wave).
ZERO_SPEED_RTOL = 1e-8


class MaterialError(ValueError):
    """Raised for unphysical or inconsistent material parameters."""


@dataclass(frozen=True)
class MaterialSpec:
    """Raw poroelastic material parameters (SI units).

    Attributes
    ----------
    K_s, rho_s : grain bulk modulus (Pa) and grain density (kg/m^3).
    c11, c12, c13, c33, c55 : drained matrix stiffnesses (Pa) in the
        principal frame of an orthotropic, transversely isotropic solid.
    phi : porosity, 0 < phi < 1.
    kappa1, kappa3 : permeabilities along the principal 1/3 axes (m^2).
    T1, T3 : tortuosities (>= 1).
    K_f, rho_f : fluid bulk modulus (Pa) and density (kg/m^3).
    eta : dynamic fluid viscosity (Pa s); zero disables dissipation.
    theta_mat : angle of the material 1-axis from the global x-axis,
        counterclockwise positive (radians).
    """

    K_s: float
    rho_s: float
    c11: float
    c12: float
    c13: float
    c33: float
    c55: float
    phi: float
    kappa1: float
    kappa3: float
    T1: float
    T3: float
    K_f: float
    rho_f: float
    eta: float = 0.0
    theta_mat: float = 0.0

    def __post_init__(self):
        pos = {
            "K_s": self.K_s, "rho_s": self.rho_s, "c11": self.c11,
            "c33": self.c33, "c55": self.c55, "K_f": self.K_f,
            "rho_f": self.rho_f, "kappa1": self.kappa1, "kappa3": self.kappa3,
        }
        for name, value in pos.items():
            if not value > 0.0:
                raise MaterialError(f"{name} must be positive, got {value}")
        if not 0.0 < self.phi < 1.0:
            raise MaterialError(f"porosity must lie in (0, 1), got {self.phi}")
        if self.T1 < 1.0 or self.T3 < 1.0:
            raise MaterialError("tortuosities must be >= 1")
        if self.eta < 0.0:
            raise MaterialError("viscosity must be >= 0")
        if self.c11 * self.c33 - self.c13 ** 2 <= 0.0:
            raise MaterialError(
                "drained stiffness minor c11*c33 - c13^2 must be positive"
            )


@dataclass(frozen=True)
class DerivedCoefficients:
    """Secondary coefficients derived from a :class:`MaterialSpec`.

    ``tau_d1``/``tau_d3`` are the dissipation time constants along the
    principal axes; they are ``math.inf`` for an inviscid material.
    """

    alpha1: float
    alpha3: float
    M: float
    cu11: float
    cu12: float
    cu13: float
    cu33: float
    cu55: float
    rho: float
    m1: float
    m3: float
    Delta1: float
    Delta3: float
    tau_d1: float
    tau_d3: float

    @property
    def has_dissipation(self) -> bool:
        return math.isfinite(self.tau_d1)


@dataclass(frozen=True)
class SystemMatrices:
    """Coefficient matrices of the first-order system in global axes.

    Attributes
    ----------
    flux_x, flux_z : (8, 8) flux Jacobians for x- and z-derivatives.
    relaxation : (8, 8) relaxation matrix acting on the Darcy velocities.
    energy : (8, 8) symmetric positive-definite energy Hessian; the
        quadratic form Q^T energy Q equals twice the mechanical energy
        density.
    theta_mat : orientation angle the matrices were rotated to (radians).
    """

    flux_x: np.ndarray
    flux_z: np.ndarray
    relaxation: np.ndarray
    energy: np.ndarray
    theta_mat: float


def derive_coefficients(spec: MaterialSpec) -> DerivedCoefficients:
    """Derive effective coefficients from raw material parameters.

    Raises
    ------
    MaterialError
        If the coupling-modulus denominator is non-positive or either
        inertia determinant ``rho*m_i - rho_f^2`` is non-positive, which
        signals an unphysical parameter set.
    """
    a1 = 1.0 - (spec.c11 + spec.c12 + spec.c13) / (3.0 * spec.K_s)
    a3 = 1.0 - (2.0 * spec.c13 + spec.c33) / (3.0 * spec.K_s)
    m_den = spec.K_s * (1.0 + spec.phi * (spec.K_s / spec.K_f - 1.0)) - (
        2.0 * spec.c11 + spec.c33 + 2.0 * spec.c12 + 4.0 * spec.c13
    ) / 9.0
    if m_den <= 0.0:
        raise MaterialError(
            f"coupling modulus denominator is non-positive ({m_den:.3e}); "
            "matrix is too stiff relative to the grains"
        )
    M = spec.K_s ** 2 / m_den

    rho = (1.0 - spec.phi) * spec.rho_s + spec.phi * spec.rho_f
    m1 = spec.rho_f * spec.T1 / spec.phi
    m3 = spec.rho_f * spec.T3 / spec.phi
    Delta1 = rho * m1 - spec.rho_f ** 2
    Delta3 = rho * m3 - spec.rho_f ** 2
    if Delta1 <= 0.0 or Delta3 <= 0.0:
        raise MaterialError(
            "inertia determinant rho*m_i - rho_f^2 must be positive "
            f"(got {Delta1:.3e}, {Delta3:.3e})"
        )

    if spec.eta > 0.0:
        tau_d1 = Delta1 * spec.kappa1 / (rho * spec.eta)
        tau_d3 = Delta3 * spec.kappa3 / (rho * spec.eta)
    else:
        tau_d1 = tau_d3 = math.inf

    return DerivedCoefficients(
        alpha1=a1,
        alpha3=a3,
        M=M,
        cu11=spec.c11 + M * a1 * a1,
        cu12=spec.c12 + M * a1 * a1,
        cu13=spec.c13 + M * a1 * a3,
        cu33=spec.c33 + M * a3 * a3,
        cu55=spec.c55,
        rho=rho,
        m1=m1,
        m3=m3,
        Delta1=Delta1,
        Delta3=Delta3,
        tau_d1=tau_d1,
        tau_d3=tau_d3,
    )


def _principal_frame_matrices(c: DerivedCoefficients, spec: MaterialSpec):
    """Assemble flux, relaxation and energy matrices in the principal frame."""
    a1M = c.alpha1 * c.M
    a3M = c.alpha3 * c.M
    rf = spec.rho_f

    Ax = np.zeros((8, 8))
    Ax[TAU_XX, V_X] = c.cu11
    Ax[TAU_XX, Q_X] = a1M
    Ax[TAU_ZZ, V_X] = c.cu13
    Ax[TAU_ZZ, Q_X] = a3M
    Ax[TAU_XZ, V_Z] = c.cu55
    Ax[V_X, TAU_XX] = c.m1 / c.Delta1
    Ax[V_X, P] = rf / c.Delta1
    Ax[V_Z, TAU_XZ] = c.m3 / c.Delta3
    Ax[P, V_X] = -a1M
    Ax[P, Q_X] = -c.M
    Ax[Q_X, TAU_XX] = -rf / c.Delta1
    Ax[Q_X, P] = -c.rho / c.Delta1
    Ax[Q_Z, TAU_XZ] = -rf / c.Delta3
    Ax *= -1.0

    Az = np.zeros((8, 8))
    Az[TAU_XX, V_Z] = c.cu13
    Az[TAU_XX, Q_Z] = a1M
    Az[TAU_ZZ, V_Z] = c.cu33
    Az[TAU_ZZ, Q_Z] = a3M
    Az[TAU_XZ, V_X] = c.cu55
    Az[V_X, TAU_XZ] = c.m1 / c.Delta1
    Az[V_Z, TAU_ZZ] = c.m3 / c.Delta3
    Az[V_Z, P] = rf / c.Delta3
    Az[P, V_Z] = -a3M
    Az[P, Q_Z] = -c.M
    Az[Q_X, TAU_XZ] = -rf / c.Delta1
    Az[Q_Z, TAU_ZZ] = -rf / c.Delta3
    Az[Q_Z, P] = -c.rho / c.Delta3
    Az *= -1.0

    D = np.zeros((8, 8))
    if spec.eta > 0.0:
        g1 = spec.eta / (c.Delta1 * spec.kappa1)
        g3 = spec.eta / (c.Delta3 * spec.kappa3)
        D[V_X, Q_X] = rf * g1
        D[V_Z, Q_Z] = rf * g3
        D[Q_X, Q_X] = -c.rho * g1
        D[Q_Z, Q_Z] = -c.rho * g3

    # Energy Hessian.  The stress/pressure block is the drained plane-strain
    # compliance; the velocity block is the kinetic inertia matrix.
    det = spec.c11 * spec.c33 - spec.c13 ** 2
    s11 = spec.c33 / det
    s12 = -spec.c13 / det
    s22 = spec.c11 / det
    s1p = (c.alpha1 * spec.c33 - c.alpha3 * spec.c13) / det
    s2p = (c.alpha3 * spec.c11 - c.alpha1 * spec.c13) / det
    spp = 1.0 / c.M + (
        c.alpha1 ** 2 * spec.c33
        + c.alpha3 ** 2 * spec.c11
        - 2.0 * c.alpha1 * c.alpha3 * spec.c13
    ) / det

    E = np.zeros((8, 8))
    E[TAU_XX, TAU_XX] = s11
    E[TAU_XX, TAU_ZZ] = E[TAU_ZZ, TAU_XX] = s12
    E[TAU_ZZ, TAU_ZZ] = s22
    E[TAU_XX, P] = E[P, TAU_XX] = s1p
    E[TAU_ZZ, P] = E[P, TAU_ZZ] = s2p
    E[P, P] = spp
    E[TAU_XZ, TAU_XZ] = 1.0 / spec.c55
    E[V_X, V_X] = E[V_Z, V_Z] = c.rho
    E[V_X, Q_X] = E[Q_X, V_X] = rf
    E[V_Z, Q_Z] = E[Q_Z, V_Z] = rf
    E[Q_X, Q_X] = c.m1
    E[Q_Z, Q_Z] = c.m3

    return Ax, Az, D, E


def state_rotation(theta: float) -> np.ndarray:
    """8x8 map taking global state components to a frame rotated by theta.

    Stresses transform as a rank-2 tensor, solid and Darcy velocities as
    vectors, and the pressure as a scalar.  ``state_rotation(-theta)`` is
    the exact inverse.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    R = np.zeros((8, 8))
    # stress block (tau_xx, tau_zz, tau_xz)
    R[0, 0] = c * c
    R[0, 1] = s * s
    R[0, 2] = 2.0 * c * s
    R[1, 0] = s * s
    R[1, 1] = c * c
    R[1, 2] = -2.0 * c * s
    R[2, 0] = -c * s
    R[2, 1] = c * s
    R[2, 2] = c * c - s * s
    # velocity blocks
    for i, j in ((V_X, V_Z), (Q_X, Q_Z)):
        R[i, i] = c
        R[i, j] = s
        R[j, i] = -s
        R[j, j] = c
    R[P, P] = 1.0
    return R


def rotate_to_global(matrices: SystemMatrices, theta_mat: float) -> SystemMatrices:
    """Rotate principal-frame system matrices to global axes.

    The input must have been assembled at ``theta_mat = 0``.  A positive
    angle rotates the material 1-axis counterclockwise from the global
    x-axis.  The flux Jacobians combine through the chain rule for the
    rotated spatial derivatives; the energy Hessian transforms as a
    quadratic form.
    """
    if matrices.theta_mat != 0.0:
        raise MaterialError("rotate_to_global expects matrices at theta_mat = 0")
    if theta_mat == 0.0:
        return matrices
    c = math.cos(theta_mat)
    s = math.sin(theta_mat)
    R = state_rotation(theta_mat)
    Rinv = state_rotation(-theta_mat)
    A, B = matrices.flux_x, matrices.flux_z
    return SystemMatrices(
        flux_x=Rinv @ (A * c - B * s) @ R,
        flux_z=Rinv @ (A * s + B * c) @ R,
        relaxation=Rinv @ matrices.relaxation @ R,
        energy=R.T @ matrices.energy @ R,
        theta_mat=theta_mat,
    )


def _check_structure(mats: SystemMatrices) -> None:
    """Validate the structural identities the assembly must satisfy."""
    E = mats.energy
    if not np.allclose(E, E.T, rtol=0.0, atol=1e-12 * np.abs(E).max()):
        raise MaterialError("energy Hessian is not symmetric")
    try:
        np.linalg.cholesky(E)
    except np.linalg.LinAlgError as exc:
        raise MaterialError("energy Hessian is not positive-definite") from exc
    for name, F in (("x", mats.flux_x), ("z", mats.flux_z)):
        S = E @ F
        asym = np.abs(S - S.T).max()
        if asym > 1e-12 * max(np.abs(S).max(), 1.0):
            raise MaterialError(
                f"energy-symmetrized {name}-flux matrix is asymmetric "
                f"(defect {asym:.3e})"
            )
    ED = E @ mats.relaxation
    if np.abs(ED - ED.T).max() > 1e-12 * max(np.abs(ED).max(), 1.0):
        raise MaterialError("energy-symmetrized relaxation matrix is asymmetric")
    if np.linalg.eigvalsh(0.5 * (ED + ED.T)).max() > 1e-12 * max(np.abs(ED).max(), 1.0):
        raise MaterialError("relaxation matrix is not dissipative")


def build_system_matrices(
    coeffs: DerivedCoefficients, spec: MaterialSpec
) -> SystemMatrices:
    """Assemble the system matrices for one material at its orientation.

    The matrices are built in the principal frame and, when
    ``spec.theta_mat`` is nonzero, rotated to global axes.  Structural
    invariants (symmetry of the energy-weighted fluxes, positive-definite
    energy, dissipative relaxation) are verified on the result.
    """
    Ax, Az, D, E = _principal_frame_matrices(coeffs, spec)
    mats = SystemMatrices(
        flux_x=Ax, flux_z=Az, relaxation=D, energy=E, theta_mat=0.0
    )
    if spec.theta_mat != 0.0:
        mats = rotate_to_global(mats, spec.theta_mat)
    _check_structure(mats)
    return mats


def wave_speeds(matrices: SystemMatrices, direction) -> tuple[float, float, float]:
    """Positive wave speeds for propagation along a unit direction.

    Parameters
    ----------
    direction : (2,) unit vector (n_x, n_z) in global axes.

    Returns
    -------
    (c_pf, c_s, c_ps) : the fast P, shear, and slow P speeds (m/s),
    sorted descending.  The full spectrum is verified to consist of the
    three speed pairs plus a double zero.
    """
    n = np.asarray(direction, dtype=float)
    if abs(n @ n - 1.0) > 1e-12:
        raise MaterialError("direction must be a unit vector")
    J = n[0] * matrices.flux_x + n[1] * matrices.flux_z
    try:
        lam = np.linalg.eigvals(J)
    except np.linalg.LinAlgError as exc:
        raise MaterialError("eigen decomposition of flux Jacobian failed") from exc
    scale = np.abs(lam).max()
    if np.abs(lam.imag).max() > 1e-8 * scale:
        raise MaterialError("flux Jacobian has complex eigenvalues")
    lam = np.sort(lam.real)
    zero = np.abs(lam) < ZERO_SPEED_RTOL * scale
    n_pos = int((~zero & (lam > 0)).sum())
    n_neg = int((~zero & (lam < 0)).sum())
    if zero.sum() != 2 or n_pos != 3 or n_neg != 3:
        raise MaterialError("spectrum does not split into 3 pairs plus a double zero")
    pos = np.sort(lam[~zero & (lam > 0)])[::-1]
    neg = np.sort(-lam[~zero & (lam < 0)])[::-1]
    if not np.allclose(pos, neg, rtol=1e-8):
        raise MaterialError("spectrum is not symmetric about zero")
    return float(pos[0]), float(pos[1]), float(pos[2])


class Material:
    """A fully derived material: spec, coefficients and system matrices.

    Instances are immutable after construction and safe to share.
    """

    def __init__(self, spec: MaterialSpec):
        self.spec = spec
        self.coeffs = derive_coefficients(spec)
        self.matrices = build_system_matrices(self.coeffs, spec)

    @property
    def energy(self) -> np.ndarray:
        return self.matrices.energy

    def speeds(self, direction) -> tuple[float, float, float]:
        return wave_speeds(self.matrices, direction)

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Material(theta_mat={self.spec.theta_mat:.4f})"


# Bundled material presets (SI units).
_PRESETS = {
    "sandstone_ortho": MaterialSpec(
        K_s=80e9, rho_s=2500.0,
        c11=71.8e9, c12=3.2e9, c13=1.2e9, c33=53.4e9, c55=26.1e9,
        phi=0.2, kappa1=600e-15, kappa3=100e-15, T1=2.0, T3=3.6,
        K_f=2.5e9, rho_f=1040.0, eta=1e-3,
    ),
    "glass_epoxy": MaterialSpec(
        K_s=40e9, rho_s=1815.0,
        c11=39.4e9, c12=1.2e9, c13=1.2e9, c33=13.1e9, c55=3.0e9,
        phi=0.2, kappa1=600e-15, kappa3=100e-15, T1=2.0, T3=3.6,
        K_f=2.5e9, rho_f=1040.0, eta=1e-3,
    ),
    "sandstone_iso": MaterialSpec(
        K_s=40e9, rho_s=2500.0,
        c11=36e9, c12=12e9, c13=12e9, c33=36e9, c55=12e9,
        phi=0.2, kappa1=600e-15, kappa3=600e-15, T1=2.0, T3=2.0,
        K_f=2.5e9, rho_f=1040.0, eta=0.0,
    ),
    "shale_iso": MaterialSpec(
        K_s=7.6e9, rho_s=2210.0,
        c11=11.9e9, c12=3.96e9, c13=3.96e9, c33=11.9e9, c55=3.96e9,
        phi=0.16, kappa1=100e-15, kappa3=100e-15, T1=2.0, T3=2.0,
        K_f=2.5e9, rho_f=1040.0, eta=0.0,
    ),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str, theta_mat: float = 0.0, **overrides) -> MaterialSpec:
    """Return a bundled material preset, optionally reoriented or modified."""
    try:
        spec = _PRESETS[name]
    except KeyError:
        raise MaterialError(
            f"unknown material preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    if theta_mat != 0.0 or overrides:
        spec = replace(spec, theta_mat=theta_mat, **overrides)
    return spec

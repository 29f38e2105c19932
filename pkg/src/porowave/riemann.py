"""Directional wave bases and heterogeneous-interface Riemann solvers.

For each material and sweep direction the flux Jacobian is decomposed
into three left-going waves, three right-going waves and a two-dimensional
stationary null space.  Traveling eigenvectors are normalized to unit
energy norm of the owning material so wave strengths are comparable
across materials.  At an interface between two (possibly different)
materials the jump is expanded in the mixed basis

    [ left-going left-material | stationary | right-going right-material ]

whose stationary columns are shared: the null space of the directional
Jacobian is the same for every poroelastic material and orientation
(spanned by the traction-free stress state and the transverse Darcy
velocity), so canonical unit vectors are used for it.

The negative-speed eigenvectors are constructed from the positive-speed
ones through the exact reflection symmetry of the Jacobian, which keeps
the discrete scheme mirror-equivariant to rounding accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .materials import (
    Q_X,
    Q_Z,
    TAU_XX,
    TAU_ZZ,
    ZERO_SPEED_RTOL,
    SystemMatrices,
)

__all__ = [
    "RiemannError",
    "WaveBasis",
    "InterfaceOperator",
    "RiemannSolution",
    "build_wave_basis",
    "build_interface_operator",
    "solve_normal",
    "solve_transverse",
]

# Sign patterns of the state under x- and z-mirror reflection.  They
# conjugate the corresponding flux Jacobian to its negative, so S @ r is
# an exact eigenvector for the negated eigenvalue.
_MIRROR = {
    "x": np.array([1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0]),
    "z": np.array([1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0]),
}

# Canonical stationary null-space vectors per sweep direction: the
# normal-traction-free stress state and the transverse Darcy velocity.
_NULL_COMPONENTS = {"x": (TAU_ZZ, Q_Z), "z": (TAU_XX, Q_X)}


class RiemannError(RuntimeError):
    """Raised when an eigenbasis or interface operator cannot be built."""


@dataclass(frozen=True)
class WaveBasis:
    """Eigen-decomposition of one material's flux Jacobian in one direction.

    Attributes
    ----------
    direction : "x" or "z".
    speeds : (8,) eigenvalues sorted ascending; entries 3 and 4 are the
        stationary (zero) speeds.
    eigvecs : (8, 8) right eigenvectors as columns, traveling columns
        normalized to unit energy norm of the owning material.
    eigvecs_inv : (8, 8) inverse of ``eigvecs``.
    neg_idx, zero_idx, pos_idx : column index groups (3 / 2 / 3).
    energy : (8, 8) energy Hessian of the owning material.
    """

    direction: str
    speeds: np.ndarray
    eigvecs: np.ndarray
    eigvecs_inv: np.ndarray
    neg_idx: tuple
    zero_idx: tuple
    pos_idx: tuple
    energy: np.ndarray


@dataclass(frozen=True)
class InterfaceOperator:
    """Precomputed wave-strength operator for one ordered material pair.

    ``mixed_basis`` holds the traveling and stationary columns described
    in the module docstring; ``mixed_basis_inv`` is its inverse.  The six
    traveling waves are columns 0-2 (left-going, speeds ascending) and
    5-7 (right-going) of the mixed basis, copied into ``wave_vecs`` with
    their signed ``wave_speeds`` and owning ``wave_sides``.
    """

    direction: str
    mixed_basis: np.ndarray
    mixed_basis_inv: np.ndarray
    wave_vecs: np.ndarray       # (8, 6)
    wave_speeds: np.ndarray     # (6,)
    wave_sides: tuple           # "left"/"right" per wave
    strength_rows: np.ndarray   # (6, 8) rows of mixed_basis_inv for traveling waves


@dataclass(frozen=True)
class RiemannSolution:
    """Waves and fluctuations produced by one interface Riemann solve."""

    amdq: np.ndarray            # left-going fluctuation (8,)
    apdq: np.ndarray            # right-going fluctuation (8,)
    waves: np.ndarray           # (8, 6)
    speeds: np.ndarray          # (6,)


def _energy_norm(vec: np.ndarray, energy: np.ndarray) -> float:
    return float(np.sqrt(vec @ energy @ vec))


def _whitened_inverse(basis: np.ndarray, energy: np.ndarray):
    """Invert a basis matrix via the energy-whitened frame.

    The state components span many orders of magnitude in SI units, so a
    raw inverse of an eigenvector matrix is needlessly inaccurate.  With
    columns of unit energy norm the whitened matrix W @ basis (where
    W^T W = energy) is well conditioned; its inverse defect is returned
    as a scale-free quality measure.
    """
    W = np.linalg.cholesky(energy).T
    whitened = W @ basis
    try:
        inv_w = np.linalg.inv(whitened)
    except np.linalg.LinAlgError as exc:
        raise RiemannError("basis matrix is singular") from exc
    defect = np.abs(whitened @ inv_w - np.eye(basis.shape[0])).max()
    return inv_w @ W, defect


def build_wave_basis(matrices: SystemMatrices, direction: str) -> WaveBasis:
    """Build the directional eigenbasis for one material.

    Raises
    ------
    RiemannError
        If the spectrum does not split into 3 negative / 2 zero /
        3 positive eigenvalues, signalling a degenerate material.
    """
    if direction not in ("x", "z"):
        raise RiemannError(f"direction must be 'x' or 'z', got {direction!r}")
    J = matrices.flux_x if direction == "x" else matrices.flux_z
    E = matrices.energy

    # The energy-whitened Jacobian W J W^-1 (with W^T W = E) is
    # symmetric, so the eigenproblem is solved in that frame: the
    # spectrum is guaranteed real and the returned eigenvectors have
    # unit energy norm by construction.
    W = np.linalg.cholesky(E).T
    Winv = np.linalg.inv(W)
    sym = W @ J @ Winv
    sym = 0.5 * (sym + sym.T)
    lam, U = np.linalg.eigh(sym)
    V = Winv @ U
    scale = np.abs(lam).max()
    zero = np.abs(lam) < ZERO_SPEED_RTOL * scale
    pos = ~zero & (lam > 0)
    if zero.sum() != 2 or pos.sum() != 3 or (~zero & (lam < 0)).sum() != 3:
        raise RiemannError("spectrum does not split 3/2/3; input is degenerate")

    def normalized(vecs):
        out = vecs.copy()
        for j in range(out.shape[1]):
            r = out[:, j] / _energy_norm(out[:, j], E)
            k = int(np.argmax(np.abs(r)))
            out[:, j] = -r if r[k] < 0 else r
        return out

    order = np.argsort(lam[pos])
    pos_speeds = lam[pos][order]
    pos_vecs = normalized(V[:, pos][:, order])
    neg_speeds = -pos_speeds[::-1]

    # When the Jacobian is odd under the mirror reflection (principal
    # axes aligned with the grid), build the left-going eigenvectors
    # from the right-going ones by the exact sign pattern; this keeps
    # the discrete scheme mirror-equivariant to rounding accuracy.  For
    # inclined principal axes the symmetry does not hold and the
    # eigensolver output is used directly.
    mirror = _MIRROR[direction]
    odd_defect = np.abs(mirror[:, None] * J * mirror[None, :] + J).max()
    if odd_defect <= 1e-12 * np.abs(J).max():
        neg_vecs = (mirror[:, None] * pos_vecs)[:, ::-1]
    else:
        neg = ~zero & (lam < 0)
        order_n = np.argsort(lam[neg])
        neg_vecs = normalized(V[:, neg][:, order_n])

    null_a, null_b = _NULL_COMPONENTS[direction]
    null_vecs = np.zeros((8, 2))
    null_vecs[null_a, 0] = 1.0 / math.sqrt(E[null_a, null_a])
    null_vecs[null_b, 1] = 1.0 / math.sqrt(E[null_b, null_b])
    res = np.abs(J @ null_vecs).max()
    if res > 1e-8 * np.abs(J).max() * np.abs(null_vecs).max():
        raise RiemannError("canonical null vectors fail to annihilate the Jacobian")

    eigvecs = np.hstack([neg_vecs, null_vecs, pos_vecs])
    speeds = np.concatenate([neg_speeds, [0.0, 0.0], pos_speeds])
    eigvecs_inv, _ = _whitened_inverse(eigvecs, E)

    # Residual guard in the energy-whitened frame, where all columns
    # have unit norm and the residual scale is a wave speed.
    resid = np.linalg.norm(W @ (J @ eigvecs - eigvecs * speeds), axis=0)
    bound = 1e-8 * scale * np.linalg.norm(W @ eigvecs, axis=0)
    if (resid > bound).any():
        raise RiemannError(
            f"eigenvector residual too large ({resid.max():.3e} vs {bound.min():.3e})"
        )

    return WaveBasis(
        direction=direction,
        speeds=speeds,
        eigvecs=eigvecs,
        eigvecs_inv=eigvecs_inv,
        neg_idx=(0, 1, 2),
        zero_idx=(3, 4),
        pos_idx=(5, 6, 7),
        energy=E,
    )


def build_interface_operator(left: WaveBasis, right: WaveBasis) -> InterfaceOperator:
    """Assemble the wave-strength operator for an ordered material pair.

    The stationary columns are taken from the (shared) canonical null
    space; left-going columns come from the left material's basis and
    right-going columns from the right material's.
    """
    if left.direction != right.direction:
        raise RiemannError("interface bases must share a sweep direction")
    mixed = np.hstack([
        left.eigvecs[:, :3],
        left.eigvecs[:, 3:5],
        right.eigvecs[:, 5:8],
    ])
    mixed_inv, defect = _whitened_inverse(mixed, left.energy)
    if defect > 1e-10:
        raise RiemannError(
            f"mixed basis is ill-conditioned (inverse defect {defect:.3e})"
        )
    travel = [0, 1, 2, 5, 6, 7]
    return InterfaceOperator(
        direction=left.direction,
        mixed_basis=mixed,
        mixed_basis_inv=mixed_inv,
        wave_vecs=mixed[:, travel].copy(),
        wave_speeds=np.concatenate([left.speeds[:3], right.speeds[5:8]]),
        wave_sides=("left",) * 3 + ("right",) * 3,
        strength_rows=mixed_inv[travel, :].copy(),
    )


def solve_normal(q_left: np.ndarray, q_right: np.ndarray,
                 op: InterfaceOperator) -> RiemannSolution:
    """Solve the interface Riemann problem for a pair of cell states.

    Only the six traveling wave strengths are computed; the stationary
    discontinuity is never needed by the update.
    """
    dq = np.asarray(q_right, dtype=float) - np.asarray(q_left, dtype=float)
    beta = op.strength_rows @ dq
    waves = op.wave_vecs * beta
    amdq = waves[:, :3] @ op.wave_speeds[:3]
    apdq = waves[:, 3:] @ op.wave_speeds[3:]
    return RiemannSolution(amdq=amdq, apdq=apdq, waves=waves,
                           speeds=op.wave_speeds.copy())


def solve_transverse(fluctuation: np.ndarray,
                     cell_basis: WaveBasis) -> tuple[np.ndarray, np.ndarray]:
    """Split a fluctuation into transverse down-going and up-going parts.

    The fluctuation is decomposed in the eigenbasis of the transverse
    Jacobian of the cell it enters; the parts are weighted by the signed
    transverse speeds.  Stationary components carry zero speed and drop
    out, so the two parts sum to the transverse Jacobian applied to the
    fluctuation.
    """
    gamma = cell_basis.eigvecs_inv @ np.asarray(fluctuation, dtype=float)
    weighted = cell_basis.speeds * gamma
    bmasdq = cell_basis.eigvecs[:, :3] @ weighted[:3]
    bpasdq = cell_basis.eigvecs[:, 5:8] @ weighted[5:8]
    return bmasdq, bpasdq

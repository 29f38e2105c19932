"""Cartesian grid state and per-material solver tables.

The grid stores cell-averaged states on a uniform Cartesian mesh with a
two-cell ghost frame.  Each cell carries a material index; material
boundaries therefore coincide with cell edges.  ``MaterialTable``
pre-computes everything the solver looks up per step: directional wave
bases, interface operators for every ordered material pair that is
actually adjacent in the grid, transverse splitting matrices, and the
exact relaxation maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .materials import Material
from .riemann import (
    InterfaceOperator,
    WaveBasis,
    build_interface_operator,
    build_wave_basis,
)

__all__ = ["Grid2D", "MaterialTable", "GridError"]

GHOST = 2

# State rows transformed by the relaxation map: (v_x, v_z, q_x, q_z).
_VQ_ROWS = np.array([3, 4, 6, 7])


class GridError(ValueError):
    """Raised for inconsistent grid geometry or material layout."""


class Grid2D:
    """Cell-centered state field with a two-cell ghost frame.

    Attributes
    ----------
    nx, nz : interior cell counts.
    dx, dz : cell sizes (m).
    x0, z0 : lower-left corner of the interior domain (m).
    state : (8, nz + 4, nx + 4) cell averages including ghost cells.
    material_id : (nz + 4, nx + 4) per-cell material indices.
    """

    ghost = GHOST

    def __init__(self, nx: int, nz: int, dx: float, dz: float,
                 x0: float = 0.0, z0: float = 0.0):
        if nx < 1 or nz < 1 or dx <= 0 or dz <= 0:
            raise GridError("grid must have positive cell counts and sizes")
        self.nx = int(nx)
        self.nz = int(nz)
        self.dx = float(dx)
        self.dz = float(dz)
        self.x0 = float(x0)
        self.z0 = float(z0)
        self.state = np.zeros((8, self.nz + 2 * GHOST, self.nx + 2 * GHOST))
        self.material_id = np.zeros(self.state.shape[1:], dtype=np.int32)

    @classmethod
    def from_domain(cls, nx, nz, width, height, x0=0.0, z0=0.0):
        return cls(nx, nz, width / nx, height / nz, x0, z0)

    @property
    def interior(self) -> np.ndarray:
        """View of the interior state (8, nz, nx)."""
        return self.state[:, GHOST:-GHOST, GHOST:-GHOST]

    @property
    def interior_material(self) -> np.ndarray:
        return self.material_id[GHOST:-GHOST, GHOST:-GHOST]

    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def z_centers(self) -> np.ndarray:
        return self.z0 + (np.arange(self.nz) + 0.5) * self.dz

    def x_centers_padded(self) -> np.ndarray:
        return self.x0 + (np.arange(-GHOST, self.nx + GHOST) + 0.5) * self.dx

    def z_centers_padded(self) -> np.ndarray:
        return self.z0 + (np.arange(-GHOST, self.nz + GHOST) + 0.5) * self.dz

    def cell_containing(self, x: float, z: float) -> tuple[int, int]:
        """Interior cell indices (iz, ix) of the cell containing a point."""
        ix = int(math.floor((x - self.x0) / self.dx))
        iz = int(math.floor((z - self.z0) / self.dz))
        if not (0 <= ix < self.nx and 0 <= iz < self.nz):
            raise GridError(f"point ({x}, {z}) lies outside the domain")
        return iz, ix

    def assign_materials(self, regions) -> None:
        """Assign material indices from axis-aligned rectangles.

        ``regions`` is a sequence of ``(material_index, x_min, x_max,
        z_min, z_max)``.  Assignment is by cell center; the regions must
        tile the interior without claiming any cell twice.  Ghost cells
        inherit the material of the nearest interior cell.
        """
        xc = self.x_centers()
        zc = self.z_centers()
        claimed = np.full((self.nz, self.nx), -1, dtype=np.int32)
        for mat_idx, x_min, x_max, z_min, z_max in regions:
            in_x = (xc >= x_min) & (xc < x_max)
            in_z = (zc >= z_min) & (zc < z_max)
            cells = np.outer(in_z, in_x)
            if (claimed[cells] != -1).any():
                raise GridError("material regions overlap")
            claimed[cells] = mat_idx
        if (claimed == -1).any():
            raise GridError("material regions do not tile the domain")
        self.interior_material[...] = claimed
        self.extend_materials_to_ghost()

    def extend_materials_to_ghost(self) -> None:
        mid = self.material_id
        mid[:, :GHOST] = mid[:, GHOST:GHOST + 1]
        mid[:, -GHOST:] = mid[:, -GHOST - 1:-GHOST]
        mid[:GHOST, :] = mid[GHOST:GHOST + 1, :]
        mid[-GHOST:, :] = mid[-GHOST - 1:-GHOST, :]


@dataclass
class _PairTables:
    """Per-direction interface tables indexed by pair id."""

    pair_id: np.ndarray            # (n_mat, n_mat) -> pid or -1
    strength_rows: list            # pid -> (6, 8)
    wave_vecs: list                # pid -> (8, 6)
    speeds: list                   # pid -> (6,)
    fluct_neg: list                # pid -> (8, 3) wave_vecs[:, :3] * speeds[:3]
    fluct_pos: list                # pid -> (8, 3)
    kappa: np.ndarray              # (n_pid, n_pid, 6) limiter projection factors
    operators: list                # pid -> InterfaceOperator


class MaterialTable:
    """Immutable lookup tables shared by all solver workers."""

    def __init__(self, materials: list[Material]):
        if not materials:
            raise GridError("at least one material is required")
        self.materials = list(materials)
        n = len(self.materials)
        self.bases: dict[str, list[WaveBasis]] = {"x": [], "z": []}
        for m in self.materials:
            self.bases["x"].append(build_wave_basis(m.matrices, "x"))
            self.bases["z"].append(build_wave_basis(m.matrices, "z"))
        self.energy = [m.energy for m in self.materials]
        self.max_speed = {
            d: np.array([b.speeds[-1] for b in self.bases[d]]) for d in ("x", "z")
        }
        # Transverse split matrices: fluctuations from one sweep are
        # decomposed in the other direction's basis of the entered cell.
        self.trans_minus: dict[str, list[np.ndarray]] = {"x": [], "z": []}
        self.trans_plus: dict[str, list[np.ndarray]] = {"x": [], "z": []}
        for d in ("x", "z"):
            for b in self.bases[d]:
                sneg = b.eigvecs[:, :3] * b.speeds[:3]
                spos = b.eigvecs[:, 5:8] * b.speeds[5:8]
                self.trans_minus[d].append(sneg @ b.eigvecs_inv[:3, :])
                self.trans_plus[d].append(spos @ b.eigvecs_inv[5:8, :])
        self._pairs: dict[str, _PairTables] = {}
        self._relax_cache: dict[tuple[int, float], np.ndarray | None] = {}
        self._n = n

    def material_count(self) -> int:
        return self._n

    def prepare(self, grid: Grid2D) -> None:
        """Build interface operators for every adjacent ordered pair."""
        mid = grid.material_id
        pairs_x = np.stack([mid[:, :-1].ravel(), mid[:, 1:].ravel()], axis=1)
        pairs_z = np.stack([mid[:-1, :].ravel(), mid[1:, :].ravel()], axis=1)
        for d, pairs in (("x", pairs_x), ("z", pairs_z)):
            unique = np.unique(pairs, axis=0)
            self._pairs[d] = self._build_pair_tables(d, [tuple(p) for p in unique])

    def _build_pair_tables(self, direction: str, pairs) -> _PairTables:
        n = self._n
        pair_id = np.full((n, n), -1, dtype=np.int32)
        ops, strength, wvecs, speeds, fneg, fpos = [], [], [], [], [], []
        lefts, rights = [], []
        for pid, (l, r) in enumerate(pairs):
            op = build_interface_operator(self.bases[direction][l],
                                          self.bases[direction][r])
            pair_id[l, r] = pid
            ops.append(op)
            strength.append(op.strength_rows)
            wvecs.append(op.wave_vecs)
            speeds.append(op.wave_speeds)
            fneg.append(op.wave_vecs[:, :3] * op.wave_speeds[:3])
            fpos.append(op.wave_vecs[:, 3:] * op.wave_speeds[3:])
            lefts.append(l)
            rights.append(r)
        npid = len(pairs)
        kappa = np.ones((max(npid, 1), max(npid, 1), 6))
        # Limiter projection factors between a local wave and the same
        # family at the upwind interface, measured in the energy metric
        # of the upwind cell (= owning material of the upwind wave).
        for loc in range(npid):
            for up in range(npid):
                for j in range(6):
                    e = self.energy[lefts[loc] if j >= 3 else rights[loc]]
                    r_loc = wvecs[loc][:, j]
                    r_up = wvecs[up][:, j]
                    den = r_loc @ e @ r_loc
                    kappa[up, loc, j] = (r_up @ e @ r_loc) / den
        return _PairTables(
            pair_id=pair_id,
            strength_rows=strength,
            wave_vecs=wvecs,
            speeds=speeds,
            fluct_neg=fneg,
            fluct_pos=fpos,
            kappa=kappa,
            operators=ops,
        )

    def pair_tables(self, direction: str) -> _PairTables:
        try:
            return self._pairs[direction]
        except KeyError:
            raise GridError("MaterialTable.prepare(grid) must run first") from None

    def operator(self, direction: str, left: int, right: int) -> InterfaceOperator:
        tab = self.pair_tables(direction)
        pid = tab.pair_id[left, right]
        if pid < 0:
            raise GridError(f"no operator prepared for pair ({left}, {right})")
        return tab.operators[pid]

    def max_cfl_ratio(self, grid: Grid2D) -> float:
        """max over cells of (c_x / dx, c_z / dz) (1/s)."""
        present = np.unique(grid.interior_material)
        rx = self.max_speed["x"][present].max() / grid.dx
        rz = self.max_speed["z"][present].max() / grid.dz
        return float(max(rx, rz))

    def relax_map(self, mat_idx: int, dt: float) -> np.ndarray | None:
        """Exact relaxation flow on (v_x, v_z, q_x, q_z) over dt.

        Returns None for inviscid materials (identity map).  The map is
        assembled in the principal frame, where the Darcy velocity decays
        by exp(-dt/tau_d) per axis and the lost fluid momentum reappears
        in the solid velocity, then conjugated to global axes.
        """
        key = (mat_idx, float(dt))
        if key in self._relax_cache:
            return self._relax_cache[key]
        m = self.materials[mat_idx]
        c = m.coeffs
        if not c.has_dissipation:
            self._relax_cache[key] = None
            return None
        e1 = math.exp(-dt / c.tau_d1)
        e3 = math.exp(-dt / c.tau_d3)
        rr = m.spec.rho_f / c.rho
        flow = np.array([
            [1.0, 0.0, rr * (1.0 - e1), 0.0],
            [0.0, 1.0, 0.0, rr * (1.0 - e3)],
            [0.0, 0.0, e1, 0.0],
            [0.0, 0.0, 0.0, e3],
        ])
        th = m.spec.theta_mat
        if th != 0.0:
            cth, sth = math.cos(th), math.sin(th)
            rot = np.array([
                [cth, sth, 0.0, 0.0],
                [-sth, cth, 0.0, 0.0],
                [0.0, 0.0, cth, sth],
                [0.0, 0.0, -sth, cth],
            ])
            flow = rot.T @ flow @ rot
        self._relax_cache[key] = flow
        return flow

    def apply_relaxation(self, state: np.ndarray, material_id: np.ndarray,
                         dt: float) -> None:
        """Apply the exact relaxation flow in place over the padded grid."""
        present = np.unique(material_id)
        for m in present:
            flow = self.relax_map(int(m), dt)
            if flow is None:
                continue
            if len(present) == 1:
                vq = state[_VQ_ROWS]
                state[_VQ_ROWS] = np.tensordot(flow, vq, axes=(1, 0))
            else:
                mask = material_id == m
                vq = flow @ np.stack([state[r][mask] for r in _VQ_ROWS])
                for i, r in enumerate(_VQ_ROWS):
                    state[r][mask] = vq[i]

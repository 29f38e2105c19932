"""Snapshot, gauge, report and manifest writers with round-trip parsers.

All numeric text is written with 17 significant digits so files parse
back to the exact binary values.  Snapshots carry an 8-line ASCII header
followed by one line of 8 state components per cell in z-major (row
within a constant-z line) order; an optional raw little-endian float64
sidecar mirrors the same ordering.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "write_snapshot",
    "read_snapshot",
    "write_gauge_csv",
    "read_gauge_csv",
    "write_kv",
    "write_text",
    "write_manifest",
]

GAUGE_HEADER = "t,tau_xx,tau_zz,tau_xz,v_x,v_z,p,q_x,q_z"
_HEADER_KEYS = ("nx", "nz", "x0", "z0", "dx", "dz", "t", "ncomp")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_snapshot(path: str, grid, t: float, binary: bool = False) -> None:
    """Write the interior state as an ASCII snapshot (optional binary sidecar).

    The header consists of 8 ``key = value`` lines (nx, nz, x0, z0, dx,
    dz, t, ncomp); cell records follow in z-major order.  With
    ``binary=True`` a ``.bin`` sidecar holds the same cells as raw
    little-endian float64 of shape (nz, nx, 8).
    """
    q = grid.interior
    values = (grid.nx, grid.nz, grid.x0, grid.z0, grid.dx, grid.dz, t, 8)
    cells = np.ascontiguousarray(np.moveaxis(q, 0, -1))   # (nz, nx, 8)
    with open(path, "w") as fh:
        for key, val in zip(_HEADER_KEYS, values):
            if key in ("nx", "nz", "ncomp"):
                fh.write(f"{key} = {int(val)}\n")
            else:
                fh.write(f"{key} = {_fmt(val)}\n")
        for row in cells.reshape(-1, 8):
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    if binary:
        cells.astype("<f8").tofile(os.path.splitext(path)[0] + ".bin")


def read_snapshot(path: str):
    """Parse a snapshot; returns (header dict, state array (8, nz, nx))."""
    header = {}
    with open(path) as fh:
        for key in _HEADER_KEYS:
            name, _, val = fh.readline().partition("=")
            if name.strip() != key:
                raise ValueError(f"malformed snapshot header: expected {key}")
            header[key] = float(val)
        data = np.loadtxt(fh, ndmin=2)
    nx, nz = int(header["nx"]), int(header["nz"])
    if data.shape != (nx * nz, 8):
        raise ValueError("snapshot body does not match header dimensions")
    return header, np.moveaxis(data.reshape(nz, nx, 8), -1, 0)


def write_gauge_csv(path: str, record) -> None:
    """Write one gauge's time history as CSV (one row per time step)."""
    times, states = record.as_arrays()
    with open(path, "w") as fh:
        fh.write(GAUGE_HEADER + "\n")
        for t, q in zip(times, states):
            fh.write(",".join([_fmt(t)] + [_fmt(v) for v in q]) + "\n")


def read_gauge_csv(path: str):
    """Parse a gauge CSV; returns (times (n,), states (n, 8))."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != GAUGE_HEADER:
            raise ValueError("unexpected gauge CSV header")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data[:, 0], data[:, 1:]


def write_kv(path: str, lines) -> None:
    with open(path, "w") as fh:
        for line in lines:
            fh.write(f"{line}\n")


def write_text(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def write_manifest(path: str, manifest: dict) -> None:
    """Write the run manifest (dt history, CFL, steps, wall time).

    Wall time varies between runs, so the manifest is diagnostic output;
    snapshots, gauges and reports are the bitwise-stable artifacts.
    """
    with open(path, "w") as fh:
        fh.write(f"steps = {manifest['steps']}\n")
        fh.write(f"cfl_target = {_fmt(manifest['cfl_target'])}\n")
        if "nu_max" in manifest:
            fh.write(f"nu_max = {_fmt(manifest['nu_max'])}\n")
        t = 0.0
        for i, dt in enumerate(manifest.get("dts", [])):
            t += dt
            fh.write(f"step {i + 1} dt = {_fmt(dt)} t = {_fmt(t)}\n")
        fh.write(f"wall_time = {manifest.get('wall_time', 0.0):.3f}\n")

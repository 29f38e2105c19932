"""Wave bases, interface operators and Riemann solves."""

import numpy as np
import pytest

from porowave import riemann as rie
from porowave.materials import Material, preset
from porowave.verify import energy_norm

from conftest import random_states


@pytest.fixture(scope="module")
def bases(all_materials):
    out = {}
    for name, m in all_materials.items():
        out[name] = {
            "x": rie.build_wave_basis(m.matrices, "x"),
            "z": rie.build_wave_basis(m.matrices, "z"),
        }
    return out


def test_positive_speeds_match_reference(bases):
    for s, ref in zip(bases["sandstone_ortho"]["x"].speeds[5:],
                      (1030.0, 3480.0, 6000.0)):
        assert s == pytest.approx(ref, rel=0.01)
    for s, ref in zip(bases["shale_iso"]["z"].speeds[5:],
                      (1130.0, 1430.0, 2480.0)):
        assert s == pytest.approx(ref, rel=0.01)


def test_speeds_sorted_and_antisymmetric(bases):
    for per_dir in bases.values():
        for b in per_dir.values():
            assert np.all(np.diff(b.speeds) >= 0)
            assert np.all(b.speeds == -b.speeds[::-1])
            assert b.speeds[3] == b.speeds[4] == 0.0


def test_eigvec_residuals_and_energy_normalization(bases, all_materials):
    for name, per_dir in bases.items():
        m = all_materials[name]
        for d, b in per_dir.items():
            J = m.matrices.flux_x if d == "x" else m.matrices.flux_z
            scale = np.abs(b.speeds).max()
            for j in range(8):
                r = b.eigvecs[:, j]
                resid = energy_norm(J @ r - b.speeds[j] * r, m.energy)
                assert resid <= 1e-8 * scale * energy_norm(r, m.energy)
            for j in (0, 1, 2, 5, 6, 7):
                assert energy_norm(b.eigvecs[:, j], m.energy) == \
                    pytest.approx(1.0, rel=1e-12)


def test_null_space_is_canonical(bases):
    comp = {"x": (1, 7), "z": (0, 6)}   # (tau_zz, q_z) / (tau_xx, q_x)
    for per_dir in bases.values():
        for d, b in per_dir.items():
            for col, row in zip(b.zero_idx, comp[d]):
                v = b.eigvecs[:, col]
                assert v[row] > 0
                others = np.delete(v, row)
                assert np.abs(others).max() == 0.0


def test_pure_normal_stress_jump_carries_no_waves(bases):
    # The x-sweep Jacobian has a zero tau_zz column, so a jump in tau_zz
    # alone sits entirely on the stationary discontinuity.
    b = bases["sandstone_ortho"]["x"]
    op = rie.build_interface_operator(b, b)
    dq = np.zeros(8)
    dq[1] = 1.0
    beta = op.strength_rows @ dq
    assert np.abs(beta).max() < 1e-12


def test_homogeneous_operator_reproduces_basis(bases):
    b = bases["sandstone_ortho"]["x"]
    op = rie.build_interface_operator(b, b)
    travel = [0, 1, 2, 5, 6, 7]
    for pos, col in enumerate(travel):
        beta = op.strength_rows @ b.eigvecs[:, col]
        expect = np.zeros(6)
        expect[pos] = 1.0
        assert np.allclose(beta, expect, atol=1e-11)


def test_direction_mismatch_rejected(bases):
    with pytest.raises(rie.RiemannError, match="direction"):
        rie.build_interface_operator(bases["sandstone_ortho"]["x"],
                                     bases["sandstone_ortho"]["z"])


def test_heterogeneous_reconstruction(bases, all_materials, rng):
    left = bases["sandstone_iso"]["x"]
    right = bases["shale_iso"]["x"]
    op = rie.build_interface_operator(left, right)
    E = all_materials["sandstone_iso"].energy
    for dq in random_states(E, rng, 100):
        sol = rie.solve_normal(np.zeros(8), dq, op)
        resid = dq - sol.waves.sum(axis=1)
        resid[[1, 7]] = 0.0     # remove the stationary null-space part
        assert energy_norm(resid, E) <= 1e-10 * energy_norm(dq, E)


def test_oblique_fast_p_transmits_into_all_families(bases):
    # A fast P wave grazing a horizontal interface between the two
    # isotropic media excites reflected and transmitted waves in every
    # family; only normal incidence keeps the shear family dark.
    op = rie.build_interface_operator(bases["sandstone_iso"]["z"],
                                      bases["shale_iso"]["z"])
    incident = bases["sandstone_iso"]["x"].eigvecs[:, 7]
    beta = op.strength_rows @ incident
    assert np.all(np.abs(beta[3:]) > 1e-8)


def test_solve_normal_zero_jump(bases):
    b = bases["glass_epoxy"]["z"]
    op = rie.build_interface_operator(b, b)
    q = np.arange(8.0)
    sol = rie.solve_normal(q, q, op)
    assert np.all(sol.amdq == 0.0) and np.all(sol.apdq == 0.0)
    assert np.all(sol.waves == 0.0)


def test_solve_normal_single_eigenvector_jump(bases):
    b = bases["sandstone_ortho"]["x"]
    op = rie.build_interface_operator(b, b)
    r = b.eigvecs[:, 7]          # fast P, right-going
    s = b.speeds[7]
    sol = rie.solve_normal(np.zeros(8), r, op)
    assert np.allclose(sol.apdq, s * r, rtol=1e-9, atol=1e-11 * np.abs(s * r).max())
    assert np.abs(sol.amdq).max() <= 1e-9 * np.abs(sol.apdq).max()


def test_interface_consistency_with_single_material(bases, all_materials, rng):
    m = all_materials["sandstone_ortho"]
    b = bases["sandstone_ortho"]["x"]
    op = rie.build_interface_operator(b, b)
    for dq in random_states(m.energy, rng, 20):
        sol = rie.solve_normal(np.zeros(8), dq, op)
        gamma = b.eigvecs_inv @ dq
        amdq = b.eigvecs[:, :3] @ (b.speeds[:3] * gamma[:3])
        apdq = b.eigvecs[:, 5:] @ (b.speeds[5:] * gamma[5:])
        scale = energy_norm(dq, m.energy) * np.abs(b.speeds).max()
        assert energy_norm(sol.amdq - amdq, m.energy) <= 1e-10 * scale
        assert energy_norm(sol.apdq - apdq, m.energy) <= 1e-10 * scale


def test_transverse_zero(bases):
    bm, bp = rie.solve_transverse(np.zeros(8), bases["shale_iso"]["z"])
    assert np.all(bm == 0.0) and np.all(bp == 0.0)


def test_transverse_eigenvector_case(bases):
    b = bases["sandstone_ortho"]["z"]
    r = b.eigvecs[:, 6]
    s = b.speeds[6]
    bm, bp = rie.solve_transverse(r, b)
    assert np.allclose(bp, s * r, rtol=1e-9, atol=1e-11 * np.abs(s * r).max())
    assert np.abs(bm).max() <= 1e-9 * np.abs(bp).max()


def test_transverse_matches_jacobian_apply(bases, all_materials, rng):
    m = all_materials["sandstone_ortho"]
    b = bases["sandstone_ortho"]["z"]
    for f in random_states(m.energy, rng, 20):
        bm, bp = rie.solve_transverse(f, b)
        target = m.matrices.flux_z @ f
        assert energy_norm(bm + bp - target, m.energy) <= \
            1e-10 * max(energy_norm(target, m.energy), 1e-30)


def test_degenerate_input_rejected(sandstone):
    import dataclasses
    broken = dataclasses.replace(
        sandstone.matrices, flux_x=np.zeros((8, 8)))
    with pytest.raises(rie.RiemannError):
        rie.build_wave_basis(broken, "x")

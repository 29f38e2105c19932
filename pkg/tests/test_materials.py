"""Material coefficient derivation, matrix assembly and rotation."""

import dataclasses
import math

import numpy as np
import pytest

from porowave import materials as mat

# High-frequency-limit wave speeds and dissipation times for the bundled
# presets: (c_pf, c_s, c_ps) along the principal 1- and 3-axes, tau_d in
# seconds (None for inviscid materials).  Reference values are rounded
# to 3 significant figures, hence the 1% comparisons below.
REFERENCE = {
    "sandstone_ortho": {
        "axis1": (6000.0, 3480.0, 1030.0),
        "axis3": (5260.0, 3520.0, 746.0),
        "tau_d": (5.95e-6, 1.82e-6),
    },
    "glass_epoxy": {
        "axis1": (5240.0, 1370.0, 975.0),
        "axis3": (3580.0, 1390.0, 604.0),
        "tau_d": (5.85e-6, 1.81e-6),
    },
    "sandstone_iso": {
        "axis1": (4250.0, 2390.0, 1020.0),
        "axis3": (4250.0, 2390.0, 1020.0),
        "tau_d": None,
    },
    "shale_iso": {
        "axis1": (2480.0, 1430.0, 1130.0),
        "axis3": (2480.0, 1430.0, 1130.0),
        "tau_d": None,
    },
}

# Constant patterns of the energy-weighted flux Jacobians at theta_mat=0.
EA_PATTERN = np.zeros((8, 8))
EA_PATTERN[0, 3] = EA_PATTERN[3, 0] = -1.0
EA_PATTERN[2, 4] = EA_PATTERN[4, 2] = -1.0
EA_PATTERN[5, 6] = EA_PATTERN[6, 5] = 1.0
EB_PATTERN = np.zeros((8, 8))
EB_PATTERN[1, 4] = EB_PATTERN[4, 1] = -1.0
EB_PATTERN[2, 3] = EB_PATTERN[3, 2] = -1.0
EB_PATTERN[5, 7] = EB_PATTERN[7, 5] = 1.0


def test_derived_coefficients_sandstone(sandstone):
    c = sandstone.coeffs
    assert c.rho == pytest.approx(2208.0, abs=0.0)
    assert c.m1 == pytest.approx(10400.0, abs=0.0)
    assert c.m3 == pytest.approx(18720.0, abs=0.0)
    assert c.tau_d1 == pytest.approx(5.95e-6, rel=5e-3)
    assert c.tau_d3 == pytest.approx(1.82e-6, rel=5e-3)


def test_undrained_stiffening(all_materials):
    for m in all_materials.values():
        c = m.coeffs
        assert c.M > 0 and c.cu11 >= m.spec.c11 and c.cu33 >= m.spec.c33


def test_pure_fluid_inertia_limit():
    spec = mat.MaterialSpec(
        K_s=2.5e9, rho_s=1000.0, c11=1e6, c12=3e5, c13=3e5, c33=1e6,
        c55=3e5, phi=1.0 - 1e-9, kappa1=1e-12, kappa3=1e-12,
        T1=1.0, T3=1.0, K_f=2.5e9, rho_f=1000.0,
    )
    assert mat.derive_coefficients(spec).m1 == pytest.approx(1000.0, rel=1e-6)


def test_inviscid_tau_is_infinite():
    c = mat.derive_coefficients(mat.preset("sandstone_iso"))
    assert math.isinf(c.tau_d1) and math.isinf(c.tau_d3)
    assert not c.has_dissipation


def test_rejects_overstiff_matrix():
    with pytest.raises(mat.MaterialError, match="coupling modulus"):
        mat.derive_coefficients(mat.MaterialSpec(
            K_s=1e9, rho_s=2500.0, c11=5e9, c12=0.1e9, c13=0.1e9,
            c33=5e9, c55=1e9, phi=0.2, kappa1=1e-13, kappa3=1e-13,
            T1=2.0, T3=2.0, K_f=2.5e9, rho_f=1000.0,
        ))


def test_rejects_indefinite_stiffness_minor():
    with pytest.raises(mat.MaterialError, match="minor"):
        mat.MaterialSpec(
            K_s=80e9, rho_s=2500.0, c11=1e9, c12=0.5e9, c13=5e9,
            c33=1e9, c55=1e9, phi=0.2, kappa1=1e-13, kappa3=1e-13,
            T1=2.0, T3=2.0, K_f=2.5e9, rho_f=1000.0,
        )


def test_spec_invariant_validation():
    good = dataclasses.asdict(mat.preset("sandstone_ortho"))
    for key, bad in (("phi", 0.0), ("phi", 1.0), ("T1", 0.5), ("eta", -1.0),
                     ("kappa1", 0.0), ("rho_s", -1.0)):
        kwargs = dict(good)
        kwargs[key] = bad
        with pytest.raises(mat.MaterialError):
            mat.MaterialSpec(**kwargs)


def test_flux_entry_matches_momentum_coefficient(sandstone):
    c = sandstone.coeffs
    assert sandstone.matrices.flux_x[3, 0] == pytest.approx(
        -c.m1 / c.Delta1, rel=1e-15)


def test_inviscid_relaxation_matrix_is_zero(sandstone_inviscid):
    assert np.all(sandstone_inviscid.matrices.relaxation == 0.0)


def test_energy_weighted_fluxes_are_unit_patterns(all_materials):
    for m in all_materials.values():
        EA = m.energy @ m.matrices.flux_x
        EB = m.energy @ m.matrices.flux_z
        assert np.abs(EA - EA_PATTERN).max() < 1e-12
        assert np.abs(EB - EB_PATTERN).max() < 1e-12


def test_energy_weighted_relaxation(sandstone):
    spec = sandstone.spec
    ED = sandstone.energy @ sandstone.matrices.relaxation
    expect = np.zeros((8, 8))
    expect[6, 6] = -spec.eta / spec.kappa1
    expect[7, 7] = -spec.eta / spec.kappa3
    assert np.allclose(ED, expect, rtol=1e-12, atol=1e-12 * np.abs(expect).max())
    assert np.linalg.eigvalsh(0.5 * (ED + ED.T)).max() <= 1e-12 * np.abs(ED).max()


def test_relaxation_acts_on_darcy_columns_only(sandstone):
    D = sandstone.matrices.relaxation
    assert np.all(D[:, [0, 1, 2, 3, 4, 5]] == 0.0)
    assert np.abs(D[:, [6, 7]]).max() > 0.0


@pytest.mark.parametrize("name", mat.PRESET_NAMES)
def test_wave_speeds_match_reference(name, all_materials):
    ref = REFERENCE[name]
    m = all_materials[name]
    for axis, direction in (("axis1", (1.0, 0.0)), ("axis3", (0.0, 1.0))):
        got = m.speeds(direction)
        for g, r in zip(got, ref[axis]):
            assert g == pytest.approx(r, rel=0.01)


def test_spectrum_structure_on_sweep(all_materials):
    for m in all_materials.values():
        for a in range(0, 360, 5):
            n = (math.cos(math.radians(a)), math.sin(math.radians(a)))
            c_pf, c_s, c_ps = m.speeds(n)   # raises unless {+-c, 0, 0} holds
            assert c_pf > c_s > c_ps > 0


def test_isotropic_speeds_direction_independent(all_materials):
    for name in ("sandstone_iso", "shale_iso"):
        m = all_materials[name]
        base = np.array(m.speeds((1.0, 0.0)))
        for a in range(5, 90, 5):
            n = (math.cos(math.radians(a)), math.sin(math.radians(a)))
            assert np.allclose(m.speeds(n), base, rtol=1e-10)


def test_rotation_identity(sandstone):
    out = mat.rotate_to_global(sandstone.matrices, 0.0)
    assert out is sandstone.matrices


def test_rotation_half_turn_reproduces_material(sandstone):
    # A half turn maps the orthotropic material onto itself, so the
    # global matrices are unchanged (the transformation is pi-periodic).
    rot = mat.Material(mat.preset("sandstone_ortho", theta_mat=math.pi))
    for name in ("flux_x", "flux_z", "relaxation", "energy"):
        a = getattr(sandstone.matrices, name)
        b = getattr(rot.matrices, name)
        assert np.allclose(a, b, rtol=0.0, atol=1e-13 * np.abs(a).max())


def test_rotation_round_trip(sandstone):
    th = 0.7
    fwd = mat.rotate_to_global(sandstone.matrices, th)
    back = mat.rotate_to_global(dataclasses.replace(fwd, theta_mat=0.0), -th)
    for name in ("flux_x", "flux_z", "relaxation", "energy"):
        a = getattr(sandstone.matrices, name)
        b = getattr(back, name)
        assert np.allclose(a, b, rtol=0.0, atol=1e-12 * np.abs(a).max())


@pytest.mark.parametrize("theta_deg", [15.0, 30.0, 75.0, 120.0])
def test_rotation_shifts_eigen_speeds(theta_deg, sandstone):
    th = math.radians(theta_deg)
    rot = mat.Material(mat.preset("sandstone_ortho", theta_mat=th))
    for a in range(0, 360, 15):
        phi = math.radians(a)
        global_speeds = rot.speeds((math.cos(phi), math.sin(phi)))
        frame_speeds = sandstone.speeds((math.cos(phi - th), math.sin(phi - th)))
        assert np.allclose(global_speeds, frame_speeds, rtol=1e-10)


def test_rotated_matrices_keep_structure():
    m = mat.Material(mat.preset("glass_epoxy", theta_mat=0.6))
    E = m.energy
    np.linalg.cholesky(E)
    for J in (m.matrices.flux_x, m.matrices.flux_z):
        S = E @ J
        assert np.abs(S - S.T).max() <= 1e-12 * np.abs(S).max()


def test_wave_speeds_requires_unit_direction(sandstone):
    with pytest.raises(mat.MaterialError, match="unit"):
        mat.wave_speeds(sandstone.matrices, (1.0, 1.0))


def test_unknown_preset_rejected():
    with pytest.raises(mat.MaterialError, match="unknown material preset"):
        mat.preset("granite")

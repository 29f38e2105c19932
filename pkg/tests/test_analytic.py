"""Exact plane-wave modes: spectra, residuals, decay, field evaluation."""

import math

import numpy as np
import pytest

from porowave import analytic as ana
from porowave import materials as mat
from porowave.analytic import _plane_matrices
from porowave.materials import preset
from porowave.verify import energy_norm


def _material_frame_residuals(spec, mode):
    """Eigen and constitutive residuals of a mode, relative scale."""
    coeffs = mat.derive_coefficients(spec)
    th = spec.theta_mat
    c, s = math.cos(th), math.sin(th)
    lm1 = c * mode.l_x + s * mode.l_z
    lm3 = -s * mode.l_x + c * mode.l_z
    stiff, geom, inertia = _plane_matrices(coeffs, spec, lm1, lm3, mode.omega)
    V0m = np.array([c * mode.V0[0] + s * mode.V0[1],
                    -s * mode.V0[0] + c * mode.V0[1],
                    c * mode.V0[2] + s * mode.V0[3],
                    -s * mode.V0[2] + c * mode.V0[3]])
    cc, ss, cs = c * c, s * s, c * s
    T0m = np.array([
        cc * mode.T0[0] + ss * mode.T0[1] + 2 * cs * mode.T0[2],
        ss * mode.T0[0] + cc * mode.T0[1] - 2 * cs * mode.T0[2],
        -cs * mode.T0[0] + cs * mode.T0[1] + (cc - ss) * mode.T0[2],
        mode.T0[3],
    ])
    # Componentwise backward error of the pencil (L F - v Gamma) V0 = 0;
    # a plain norm ratio would be meaningless for these badly scaled
    # amplitude vectors.
    v = (mode.omega / mode.k) ** 2
    pencil = geom @ stiff - v * inertia
    r = pencil @ V0m
    row_scale = (np.abs(geom @ stiff) + abs(v) * np.abs(inertia)) @ np.abs(V0m)
    eig_res = float((np.abs(r) / np.maximum(row_scale, 1e-300)).max())
    lhs = -mode.omega * T0m
    rhs = mode.k * (stiff @ V0m)
    con_scale = np.abs(mode.omega) * np.abs(T0m) + np.abs(mode.k) * (
        np.abs(stiff) @ np.abs(V0m))
    con_res = float((np.abs(lhs - rhs) / np.maximum(con_scale, 1e-300)).max())
    return eig_res, con_res


def test_inviscid_fast_p_phase_speed():
    mode = ana.solve_plane_wave(preset("sandstone_ortho", eta=0.0),
                                1e4, 1.0, 0.0, "fast_p")
    assert mode.phase_speed == pytest.approx(6000.0, rel=0.01)
    assert mode.k.imag == 0.0


def test_inviscid_mode_is_real_up_to_phase():
    mode = ana.solve_plane_wave(preset("glass_epoxy", eta=0.0),
                                1e4, math.cos(0.5), math.sin(0.5), "s")
    scale = np.abs(mode.Q0).max()
    assert np.abs(mode.Q0.imag).max() <= 1e-10 * scale
    assert np.abs(mode.V0.imag).max() <= 1e-10 * np.abs(mode.V0).max()


@pytest.mark.parametrize("family", ana.FAMILIES)
@pytest.mark.parametrize("name", mat.PRESET_NAMES)
def test_inviscid_speeds_match_flux_spectrum(family, name):
    # Two independent computations of the same spectrum: the 4x4
    # plane-wave eigenproblem and the 8x8 flux Jacobian.
    spec = preset(name, eta=0.0)
    m = mat.Material(spec)
    for a in range(0, 360, 15):
        lx, lz = math.cos(math.radians(a)), math.sin(math.radians(a))
        ref = dict(zip(ana.FAMILIES, mat.wave_speeds(m.matrices, (lx, lz))))
        mode = ana.solve_plane_wave(spec, 1e4, lx, lz, family)
        assert mode.phase_speed == pytest.approx(ref[family], rel=1e-8)


@pytest.mark.parametrize("freq", [10.0, 1e4])
@pytest.mark.parametrize("family", ana.FAMILIES)
def test_mode_residuals(freq, family):
    omega = 2 * math.pi * freq
    for name in mat.PRESET_NAMES:
        for theta in (0.0, 0.4):
            spec = preset(name, theta_mat=theta)
            for a in range(0, 360, 45):
                lx, lz = math.cos(math.radians(a)), math.sin(math.radians(a))
                mode = ana.solve_plane_wave(spec, omega, lx, lz, family)
                eig_res, con_res = _material_frame_residuals(spec, mode)
                assert eig_res <= 1e-10
                assert con_res <= 1e-10
                assert mode.k.imag >= -1e-10 * abs(mode.k)


def test_mode_decaying_root_verified_independently():
    # Verify the selected complex squared phase velocity is a spectral
    # point by an eigensolver-independent criterion: the 4x4 pencil must
    # be (numerically) singular there.
    spec = preset("sandstone_ortho")
    omega = 2 * math.pi * 1e4
    mode = ana.solve_plane_wave(spec, omega, 1.0, 0.0, "slow_p")
    coeffs = mat.derive_coefficients(spec)
    stiff, geom, inertia = _plane_matrices(coeffs, spec, 1.0, 0.0, omega)
    v = (omega / mode.k) ** 2
    pencil = geom @ stiff - v * inertia
    sv = np.linalg.svd(pencil, compute_uv=False)
    assert sv[-1] <= 1e-10 * sv[0]


def test_slow_p_decay_length_fraction_of_wavelength():
    mode = ana.solve_plane_wave(preset("sandstone_ortho"),
                                2 * math.pi * 1e4, 1.0, 0.0, "slow_p")
    assert mode.decay_length <= mode.wavelength / 5.0


def test_high_frequency_limit_approaches_inviscid():
    for family in ana.FAMILIES:
        visc = ana.solve_plane_wave(preset("sandstone_ortho"),
                                    1e6, 1.0, 0.0, family)
        invisc = ana.solve_plane_wave(preset("sandstone_ortho", eta=0.0),
                                      1e6, 1.0, 0.0, family)
        assert visc.phase_speed == pytest.approx(invisc.phase_speed, rel=5e-3)


def test_unit_energy_normalization(all_materials):
    for name, m in all_materials.items():
        mode = ana.solve_plane_wave(preset(name), 5e3, 0.6, 0.8, "fast_p")
        assert energy_norm(mode.Q0, m.energy) == pytest.approx(1.0, rel=1e-12)


def test_evaluate_at_origin_gives_amplitude():
    mode = ana.solve_plane_wave(preset("shale_iso"), 1e3, 0.0, 1.0, "s")
    q = ana.evaluate_plane_wave(mode, 0.0, 0.0, 0.0)
    assert np.allclose(q, mode.Q0.real, rtol=0.0, atol=1e-15 * np.abs(mode.Q0).max())


def test_inviscid_periodicity():
    mode = ana.solve_plane_wave(preset("sandstone_ortho", eta=0.0),
                                1e4, 1.0, 0.0, "fast_p")
    T = mode.period
    c = mode.phase_speed
    x = np.linspace(0.0, 8.0, 7)
    z = np.linspace(0.0, 8.0, 5)[:, None]
    q1 = ana.evaluate_plane_wave(mode, x, z, 0.1)
    q2 = ana.evaluate_plane_wave(mode, x + c * T * mode.l_x, z, 0.1 + T)
    assert np.abs(q1 - q2).max() <= 1e-12 * np.abs(q1).max()


def test_inclined_wave_inclined_material_field():
    # Oblique wave in an inclined medium: the vectorized field must agree
    # with an independent pointwise evaluation of the same mode, and its
    # cellwise energy must be finite.
    th_mat = math.radians(15.0)
    th_wave = math.radians(-30.0)
    spec = preset("sandstone_ortho", eta=0.0, theta_mat=th_mat)
    m = mat.Material(spec)
    mode = ana.solve_plane_wave(spec, 1e4, math.cos(th_wave), math.sin(th_wave),
                                "fast_p")
    xs = np.linspace(0.0, 8.0, 9)
    zs = np.linspace(0.0, 8.0, 9)
    field = ana.evaluate_plane_wave(mode, xs[None, :], zs[:, None], 2e-4)
    for i, zv in enumerate(zs):
        for j, xv in enumerate(xs):
            phase = np.exp(1j * (mode.k * (mode.l_x * xv + mode.l_z * zv)
                                 - mode.omega * 2e-4))
            point = (mode.Q0 * phase).real
            assert np.abs(point - field[:, i, j]).max() <= \
                1e-12 * np.abs(mode.Q0).max()
    energies = np.einsum("iab,ij,jab->ab", field, m.energy, field)
    assert np.isfinite(energies).all() and energies.max() <= 1.0 + 1e-12


def test_family_and_input_validation():
    spec = preset("sandstone_ortho")
    with pytest.raises(ana.AnalyticError, match="family"):
        ana.solve_plane_wave(spec, 1e4, 1.0, 0.0, "surface")
    with pytest.raises(ana.AnalyticError, match="omega"):
        ana.solve_plane_wave(spec, -1.0, 1.0, 0.0, "s")
    with pytest.raises(ana.AnalyticError, match="unit"):
        ana.solve_plane_wave(spec, 1e4, 1.0, 1.0, "s")

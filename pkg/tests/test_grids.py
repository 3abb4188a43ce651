"""Spectral calculus on periodic grids: derivatives, transfer, evaluation."""

import numpy as np
import pytest

from kahlerbench.errors import DimensionMismatch
from kahlerbench.grids import ChartGeometry, TorusGrid


def cosine_mode(grid, k, axis):
    t = grid._axis_view(grid.axis_coords, axis)
    return np.broadcast_to(np.cos(2.0 * np.pi * k * t), grid.shape).copy()


# -- construction --------------------------------------------------------------


def test_grid_validates_resolution_and_dimension():
    with pytest.raises(ValueError):
        TorusGrid(1, 9)  # odd
    with pytest.raises(ValueError):
        TorusGrid(1, 4)  # too small
    with pytest.raises(DimensionMismatch):
        TorusGrid(4, 16)
    g = TorusGrid(2, 10)
    assert g.shape == (10, 10, 10, 10)
    assert g.num_points == 10**4


def test_coords_returns_lattice_point():
    grid = TorusGrid(2, 8)
    assert np.allclose(grid.coords((1, 2, 3, 4)), [0.125, 0.25, 0.375, 0.5])
    with pytest.raises(DimensionMismatch):
        grid.coords((1, 2))


# -- derivatives ---------------------------------------------------------------


def test_dz_of_single_cosine_matches_analytic():
    grid = TorusGrid(1, 32)
    f = cosine_mode(grid, 1, axis=0)  # cos(2 pi x), independent of y
    got = grid.dz(f, 0)
    x = grid._axis_view(grid.axis_coords, 0)
    want = -np.pi * np.broadcast_to(np.sin(2.0 * np.pi * x), grid.shape)
    assert np.max(np.abs(got - want)) < 1e-13
    assert np.max(np.abs(got.imag)) < 1e-13


def test_complex_hessian_of_cosine_matches_analytic():
    grid = TorusGrid(1, 32)
    a = 0.25
    f = a * cosine_mode(grid, 1, axis=0)
    H = grid.complex_hessian(f)
    x = grid._axis_view(grid.axis_coords, 0)
    want = -np.pi**2 * a * np.broadcast_to(np.cos(2.0 * np.pi * x), grid.shape)
    assert np.max(np.abs(H[..., 0, 0] - want)) < 5e-13


def test_complex_hessian_is_hermitian_with_real_diagonal():
    rng = np.random.default_rng(2)
    grid = TorusGrid(2, 8)
    F = np.zeros(grid.shape, dtype=complex)
    F[1, 0, 2, 1] = rng.standard_normal() + 1j * rng.standard_normal()
    f = (grid.ifft(F) + np.conj(grid.ifft(F))).real
    H = grid.complex_hessian(f)
    assert np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2)))) < 1e-14
    assert np.max(np.abs(H[..., 0, 0].imag)) == 0.0


def test_laplacian_multiplier_matches_hessian_trace():
    grid = TorusGrid(2, 8)
    rng = np.random.default_rng(4)
    f = rng.standard_normal(grid.shape)
    H = grid.complex_hessian(f)
    lap_via_trace = np.trace(H, axis1=-2, axis2=-1).real
    lap_via_mult = grid.ifft(grid.fft(f) * grid.flat_laplacian_multiplier).real
    assert np.max(np.abs(lap_via_trace - lap_via_mult)) < 1e-11


def test_nyquist_mode_has_zero_derivative():
    grid = TorusGrid(1, 16)
    f = cosine_mode(grid, grid.N // 2, axis=0)
    assert np.max(np.abs(grid.dz(f, 0))) < 1e-13


def test_third_and_fourth_derivative_tensors_are_consistent():
    grid = TorusGrid(2, 8)
    rng = np.random.default_rng(8)
    f = rng.standard_normal(grid.shape)
    T = grid.hessian_third(f)
    Q = grid.hessian_fourth(f)
    H = grid.complex_hessian(f)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                scale = 1.0 + np.max(np.abs(T[..., i, j, k]))
                assert np.max(np.abs(T[..., i, j, k] - grid.dz(H[..., i, j], k))) < 1e-13 * scale
                for l in range(2):
                    direct = grid.dzbar(T[..., i, j, k], l)
                    scale = 1.0 + np.max(np.abs(Q[..., i, j, k, l]))
                    assert np.max(np.abs(Q[..., i, j, k, l] - direct)) < 1e-13 * scale


def test_mean_is_exact_for_periodic_data():
    grid = TorusGrid(1, 16)
    f = 3.5 + cosine_mode(grid, 2, axis=1)
    assert grid.mean(f) == pytest.approx(3.5, abs=1e-14)


# -- prolongation / restriction -------------------------------------------------


def test_prolong_is_exact_on_band_limited_fields():
    coarse = TorusGrid(1, 16)
    fine = TorusGrid(1, 32)
    f = 2.0 + 0.3 * cosine_mode(coarse, 3, axis=0) + 0.1 * cosine_mode(coarse, 5, axis=1)
    fp = coarse.prolong(f, fine)
    # fine-grid samples at shared lattice points equal the coarse samples
    assert np.max(np.abs(fp[::2, ::2] - f)) < 1e-13
    # analytic values at the new points
    x = fine._axis_view(fine.axis_coords, 0)
    y = fine._axis_view(fine.axis_coords, 1)
    want = 2.0 + 0.3 * np.cos(6.0 * np.pi * x) + 0.1 * np.cos(10.0 * np.pi * y)
    assert np.max(np.abs(fp - np.broadcast_to(want, fine.shape))) < 1e-13


def test_restrict_inverts_prolong_below_nyquist():
    rng = np.random.default_rng(21)
    coarse = TorusGrid(2, 8)
    fine = TorusGrid(2, 16)
    F = coarse.fft(rng.standard_normal(coarse.shape))
    for axis in range(4):  # drop the Nyquist band
        sl = [slice(None)] * 4
        sl[axis] = coarse.N // 2
        F[tuple(sl)] = 0.0
    f = coarse.ifft(F).real + 4.0
    back = fine.restrict(coarse.prolong(f, fine), coarse)
    assert np.max(np.abs(back - f)) < 1e-13


def test_prolong_reproduces_coarse_samples_even_at_nyquist():
    coarse = TorusGrid(1, 16)
    fine = TorusGrid(1, 32)
    f = cosine_mode(coarse, coarse.N // 2, axis=0)
    fp = coarse.prolong(f, fine)
    assert np.max(np.abs(fp[::2, ::2] - f)) == 0.0


def test_restrict_projects_high_modes_away():
    coarse = TorusGrid(1, 16)
    fine = TorusGrid(1, 64)
    smooth = 0.7 * cosine_mode(fine, 2, axis=0)
    rough = 0.4 * cosine_mode(fine, 25, axis=1)
    r = fine.restrict(smooth + rough, coarse)
    assert np.max(np.abs(r - 0.7 * cosine_mode(coarse, 2, axis=0))) < 1e-13


def test_transfer_preserves_mean_exactly():
    rng = np.random.default_rng(31)
    coarse = TorusGrid(1, 16)
    fine = TorusGrid(1, 48)
    f = rng.standard_normal(coarse.shape) - 7.25
    assert coarse.prolong(f, fine).mean() == pytest.approx(f.mean(), abs=1e-13)


def test_transfer_rejects_incompatible_grids():
    g16 = TorusGrid(1, 16)
    g24 = TorusGrid(1, 24)
    g2 = TorusGrid(2, 32)
    f = np.zeros(g16.shape)
    with pytest.raises(DimensionMismatch):
        g16.prolong(f, g24)  # 24 not a multiple of 16
    with pytest.raises(DimensionMismatch):
        g16.prolong(f, g2)
    with pytest.raises(DimensionMismatch):
        g16.restrict(f, TorusGrid(1, 12))


def test_equal_resolution_transfer_copies():
    grid = TorusGrid(1, 16)
    f = cosine_mode(grid, 1, axis=0)
    fp = grid.prolong(f, grid)
    assert np.array_equal(fp, f)
    fp[0, 0] = 99.0
    assert f[0, 0] != 99.0


# -- interpolation ---------------------------------------------------------------


def test_eval_at_reproduces_grid_samples_and_analytic_values():
    grid = TorusGrid(1, 16)
    f = 0.5 * cosine_mode(grid, 3, axis=0)
    pts = np.array([[0.125, 0.0], [0.3141, 0.77]])
    vals = grid.eval_at(f, pts)
    want = 0.5 * np.cos(6.0 * np.pi * pts[:, 0])
    assert np.max(np.abs(vals - want)) < 1e-12


def test_eval_at_validates_point_shape():
    grid = TorusGrid(1, 8)
    with pytest.raises(DimensionMismatch):
        grid.eval_at(np.zeros(grid.shape), np.zeros((3, 5)))


# -- chart geometry ---------------------------------------------------------------


def test_chart_geometry_trusted_region():
    geo = ChartGeometry(n=2, radii=(1.0, 2.0), margin=0.25)
    assert geo.trusted([0.5, 1.0])
    assert not geo.trusted([0.9, 0.0])
    with pytest.raises(DimensionMismatch):
        geo.trusted([0.1])


def test_chart_geometry_validates_parameters():
    with pytest.raises(ValueError):
        ChartGeometry(n=1, radii=(1.0,), margin=0.0)
    with pytest.raises(ValueError):
        ChartGeometry(n=1, radii=(0.1,), margin=0.25)
    with pytest.raises(DimensionMismatch):
        ChartGeometry(n=2, radii=(1.0, 1.0, 1.0), margin=0.1)


def test_sample_points_stay_trusted_and_deterministic():
    geo = ChartGeometry(n=2, radii=(1.0, 1.0), margin=0.1)
    pts = geo.sample_points(per_axis=2, radius_fraction=0.5)
    assert pts.shape == ((2 * 2) ** 2, 2)
    assert all(geo.trusted(p) for p in pts)
    again = geo.sample_points(per_axis=2, radius_fraction=0.5)
    assert np.array_equal(pts, again)

import math

import numpy as np
import pytest

from holodof.exceptions import InvalidArgumentError
from holodof.spectral import Aperture, LatticeMode, WavenumberLattice, build_lattice
from holodof.synthesis import (
    ModeCoefficients,
    SpatialGrid,
    draw_coefficients,
    draw_ensemble_coefficients,
    iid_rayleigh,
    iid_rayleigh_ensemble,
    realization_stream,
    synthesize,
    synthesize_1d,
    synthesize_2d,
    synthesize_3d,
)

LAM = 0.1


@pytest.fixture(scope="module")
def lattice_1d():
    return build_lattice(Aperture.in_wavelengths(16, wavelength=LAM))


@pytest.fixture(scope="module")
def lattice_2d():
    return build_lattice(Aperture.in_wavelengths(3, 2, wavelength=LAM))


@pytest.fixture(scope="module")
def lattice_3d():
    return build_lattice(Aperture.in_wavelengths(3, 2, 1, wavelength=LAM))


def single_mode(lattice, index, plus=1.0, minus=0.0):
    K = len(lattice)
    p = np.zeros(K, dtype=complex)
    q = np.zeros(K, dtype=complex)
    p[index], q[index] = plus, minus
    return ModeCoefficients(lattice, p, q)


def mode_index(lattice, ell, m):
    return next(i for i, md in enumerate(lattice.modes) if (md.ell, md.m) == (ell, m))


# -- grid ---------------------------------------------------------------------


def test_grid_fig2_counts():
    g = SpatialGrid.uniform(Aperture.in_wavelengths(16, wavelength=LAM), LAM / 4)
    assert g.N == 64 and g.counts == (64, 1, 1)
    assert g.points[-1, 0] == pytest.approx(63 * LAM / 4)
    assert g.is_canonical()


@pytest.mark.parametrize("dims", [(16,), (3, 2), (3, 2, 1), (2.3, 1.7, 0.9)])
def test_grid_invariants(dims):
    ap = Aperture.in_wavelengths(*dims, wavelength=LAM)
    d = LAM / 4
    g = SpatialGrid.uniform(ap, d)
    assert g.N == np.prod(g.counts) == len(g.points)
    box = np.array([ap.Lx, ap.Ly, ap.Lz])
    assert np.all(g.points >= 0) and np.all(g.points <= box + 1e-15)
    for axis in range(3):
        vals = np.unique(g.points[:, axis])
        if len(vals) > 1:
            np.testing.assert_allclose(np.diff(vals), d, rtol=1e-12)


def test_grid_rejects_bad_spacing():
    with pytest.raises(InvalidArgumentError):
        SpatialGrid.uniform(Aperture(1.0), 0.0)


# -- coefficients -------------------------------------------------------------


def test_zero_variance_gives_zero_amplitude():
    ap = Aperture.in_wavelengths(2, 2)
    modes = (LatticeMode(0, 0, 1.0, 0.0, 0.25), LatticeMode(1, 0, 0.5, 0.3, 0.0))
    lat = WavenumberLattice(ap, modes, ap.dimensionality)
    c = draw_coefficients(lat, realization_stream(5, 0))
    assert c.plus[0] == 0 and c.minus[1] == 0
    assert c.plus[1] != 0 and c.minus[0] != 0


def test_draw_reproducible(lattice_2d):
    a = draw_coefficients(lattice_2d, realization_stream(9, 3))
    b = draw_coefficients(lattice_2d, realization_stream(9, 3))
    np.testing.assert_array_equal(a.plus, b.plus)
    np.testing.assert_array_equal(a.minus, b.minus)


def test_half_space_switch_keeps_plus(lattice_2d):
    a = draw_coefficients(lattice_2d, realization_stream(9, 3), half_spaces=2)
    b = draw_coefficients(lattice_2d, realization_stream(9, 3), half_spaces=1)
    np.testing.assert_array_equal(a.plus, b.plus)
    assert np.all(b.minus == 0)


@pytest.fixture(scope="module")
def big_draw():
    ap = Aperture.in_wavelengths(2, 1.5)
    lat = build_lattice(ap)
    return lat, draw_ensemble_coefficients(lat, 2024, 100_000)


def test_draw_variances_match_lattice(big_draw):
    lat, c = big_draw
    for arr, var in ((c.plus, lat.var_plus), (c.minus, lat.var_minus)):
        assert np.all(arr[var == 0] == 0)
        arr, var = arr[var > 0], var[var > 0]
        emp = np.mean(np.abs(arr) ** 2, axis=1)
        np.testing.assert_allclose(emp, var, rtol=0.03)
        # circular symmetry: real and imaginary parts each carry half
        np.testing.assert_allclose(np.var(arr.real, axis=1), var / 2, rtol=0.03)
        assert np.all(np.abs(np.mean(arr**2, axis=1)) < 0.03 * var)


def test_draw_modes_uncorrelated(big_draw):
    lat, c = big_draw
    x = np.vstack([c.plus[lat.var_plus > 0], c.minus[lat.var_minus > 0]])
    x = x / np.sqrt(np.mean(np.abs(x) ** 2, axis=1, keepdims=True))
    corr = np.abs(x @ x.conj().T) / x.shape[1]
    np.fill_diagonal(corr, 0)
    assert corr.max() < 0.01


def test_ensemble_columns_equal_single_draws(lattice_2d):
    ens = draw_ensemble_coefficients(lattice_2d, 77, 5)
    for j in range(5):
        c = draw_coefficients(lattice_2d, realization_stream(77, j))
        np.testing.assert_array_equal(ens.plus[:, j], c.plus)


def test_ensemble_independent_of_workers(lattice_2d):
    a = draw_ensemble_coefficients(lattice_2d, 3, 257, workers=1)
    b = draw_ensemble_coefficients(lattice_2d, 3, 257, workers=8)
    np.testing.assert_array_equal(a.plus, b.plus)
    np.testing.assert_array_equal(a.minus, b.minus)


# -- 1-D ----------------------------------------------------------------------


def test_1d_single_mode_unit_modulus(lattice_1d):
    grid = SpatialGrid.uniform(lattice_1d.aperture, LAM / 4)
    h = synthesize_1d(single_mode(lattice_1d, 7, plus=0.6, minus=0.4), grid)
    np.testing.assert_allclose(np.abs(h), 1.0, rtol=1e-12)


def test_1d_zero_field(lattice_1d):
    grid = SpatialGrid.uniform(lattice_1d.aperture, LAM / 4)
    h = synthesize_1d(single_mode(lattice_1d, 0, 0.0, 0.0), grid)
    assert np.all(h == 0)


def test_1d_rejects_planar(lattice_2d):
    grid = SpatialGrid.uniform(lattice_2d.aperture, LAM / 4)
    with pytest.raises(InvalidArgumentError):
        synthesize_1d(single_mode(lattice_2d, 0), grid)


def test_1d_zero_mean_clt(lattice_1d):
    grid = SpatialGrid.uniform(lattice_1d.aperture, LAM / 4)
    M = 10_000
    h = synthesize(draw_ensemble_coefficients(lattice_1d, 31, M), grid)
    assert abs(h.mean()) < 3 / math.sqrt(M * grid.N)


# -- 2-D ----------------------------------------------------------------------


def test_2d_constant_mode(lattice_2d):
    grid = SpatialGrid.uniform(lattice_2d.aperture, LAM / 4)
    h = synthesize_2d(single_mode(lattice_2d, mode_index(lattice_2d, 0, 0)), grid)
    np.testing.assert_allclose(h, 1.0, atol=1e-15)


def test_2d_periodic(lattice_2d):
    ap = lattice_2d.aperture
    c = draw_coefficients(lattice_2d, realization_stream(1, 0))
    grid = SpatialGrid.uniform(ap, LAM / 4)
    shifted = SpatialGrid(grid.points + [ap.Lx, 0, 0], grid.spacing, grid.counts, grid.lengths)
    shifted_y = SpatialGrid(grid.points + [0, ap.Ly, 0], grid.spacing, grid.counts, grid.lengths)
    h = synthesize_2d(c, grid)
    np.testing.assert_allclose(synthesize_2d(c, shifted), h, rtol=0, atol=1e-12)
    np.testing.assert_allclose(synthesize_2d(c, shifted_y), h, rtol=0, atol=1e-12)


@pytest.mark.parametrize("dims", [(3, 2), (8, 8), (0.75, 0.5)])
def test_2d_fft_matches_direct(dims):
    lat = build_lattice(Aperture.in_wavelengths(*dims, wavelength=LAM))
    grid = SpatialGrid.uniform(lat.aperture, LAM / 4)
    assert grid.is_canonical()
    c = draw_ensemble_coefficients(lat, 8, 6)
    direct = synthesize_2d(c, grid, "direct")
    fast = synthesize_2d(c, grid, "fft")
    assert np.max(np.abs(fast - direct)) <= 1e-10 * np.max(np.abs(direct))


def test_2d_fft_needs_canonical_grid():
    lat = build_lattice(Aperture.in_wavelengths(3.1, 2, wavelength=LAM))
    grid = SpatialGrid.uniform(lat.aperture, LAM / 4)
    assert not grid.is_canonical()
    with pytest.raises(InvalidArgumentError):
        synthesize_2d(draw_coefficients(lat, realization_stream(0, 0)), grid, "fft")


def test_2d_variance_bookkeeping(lattice_2d):
    grid = SpatialGrid.uniform(lattice_2d.aperture, LAM / 4)
    h = synthesize(draw_ensemble_coefficients(lattice_2d, 12, 1000), grid)
    power = np.mean(np.abs(h) ** 2)
    assert power == pytest.approx(lattice_2d.total_variance(), rel=0.03)


def test_2d_wide_sense_stationary():
    lat = build_lattice(Aperture.in_wavelengths(2, 2, wavelength=LAM))
    grid = SpatialGrid.uniform(lat.aperture, LAM / 4)
    h = synthesize(draw_ensemble_coefficients(lat, 5, 10_000), grid)
    C = h.conj() @ h.T / h.shape[1]  # C[i, j] = E h_i^* h_j
    c0 = np.real(np.mean(np.diag(C)))
    idx = np.rint(grid.points[:, :2] / grid.spacing).astype(int)
    lag = idx[None, :, :] - idx[:, None, :]
    groups = {}
    for key, val in zip(map(tuple, lag.reshape(-1, 2)), C.ravel()):
        groups.setdefault(key, []).append(val)
    worst = max(np.max(np.abs(np.array(v) - np.mean(v))) for v in groups.values())
    assert worst < 0.05 * c0


# -- 3-D ----------------------------------------------------------------------


def test_3d_single_plane_equals_2d(lattice_2d, lattice_3d):
    c3 = draw_coefficients(lattice_3d, realization_stream(4, 0))
    c2 = draw_coefficients(lattice_2d, realization_stream(4, 0))
    np.testing.assert_array_equal(c3.plus, c2.plus)
    grid = SpatialGrid.uniform(lattice_2d.aperture, LAM / 4)
    np.testing.assert_array_equal(synthesize_3d(c3, grid), synthesize_2d(c2, grid))


def test_3d_bottom_plane_equals_2d(lattice_3d):
    c = draw_ensemble_coefficients(lattice_3d, 4, 3)
    grid = SpatialGrid.uniform(lattice_3d.aperture, LAM / 4)
    nz = grid.counts[2]
    plane = SpatialGrid(grid.points[::nz], grid.spacing, grid.counts[:2] + (1,), grid.lengths)
    np.testing.assert_array_equal(synthesize_3d(c, grid)[::nz], synthesize_2d(c, plane))


def test_3d_phase_advance(lattice_3d):
    c = single_mode(lattice_3d, mode_index(lattice_3d, 0, 0), plus=1.0)
    grid = SpatialGrid.uniform(lattice_3d.aperture, LAM / 4)
    nz = grid.counts[2]
    h = synthesize_3d(c, grid).reshape(-1, nz)
    kappa = lattice_3d.aperture.kappa
    ratio = h[:, 1:] / h[:, :-1]
    np.testing.assert_allclose(ratio, np.exp(1j * kappa * LAM / 4), atol=1e-12)
    # half a wavelength apart: sign flip
    np.testing.assert_allclose(h[:, 2], -h[:, 0], atol=1e-12)


def test_3d_fft_matches_direct(lattice_3d):
    c = draw_ensemble_coefficients(lattice_3d, 4, 3)
    grid = SpatialGrid.uniform(lattice_3d.aperture, LAM / 4)
    a = synthesize_3d(c, grid, "direct")
    b = synthesize_3d(c, grid, "fft")
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))


@pytest.mark.parametrize("size", [4, 8, 16])
def test_series_approximates_sinc_better_with_size(size):
    """Exact covariance of the series vs. sin(kd)/(kd), for growing apertures.

    Only qualitative improvement is asserted; no rate is claimed.
    """
    errs = []
    for r in (size, 2 * size):
        lat = build_lattice(Aperture.in_wavelengths(r, wavelength=1.0))
        d = np.linspace(0, 2, 81)
        c = (lat.var_plus + lat.var_minus) @ np.exp(2j * np.pi * np.outer(lat.ell, d) / r)
        errs.append(np.max(np.abs(c - np.sinc(2 * d))))
    assert errs[1] < errs[0]


# -- i.i.d. baseline ----------------------------------------------------------


def test_iid_rayleigh_statistics():
    z = iid_rayleigh(1_000_000, np.random.default_rng(0))
    assert np.var(z) == pytest.approx(1.0, rel=0.005)
    w = iid_rayleigh(100_000, np.random.default_rng(1))
    v = iid_rayleigh(100_000, np.random.default_rng(2))
    assert abs(np.vdot(w, v)) / len(w) < 0.01
    assert abs(np.vdot(w[:-1], w[1:])) / len(w) < 0.01


def test_iid_rayleigh_scalar_and_errors():
    z = iid_rayleigh(1, np.random.default_rng(0))
    assert z.shape == (1,) and np.isfinite(z[0])
    with pytest.raises(InvalidArgumentError):
        iid_rayleigh(0, np.random.default_rng(0))


def test_iid_ensemble_namespace_separation(lattice_1d):
    H = iid_rayleigh_ensemble(8, 4, 123)
    coeffs = draw_ensemble_coefficients(lattice_1d, 123, 4)
    assert not np.any(np.isin(H.real, coeffs.plus.real))
    np.testing.assert_array_equal(H, iid_rayleigh_ensemble(8, 4, 123, workers=3))

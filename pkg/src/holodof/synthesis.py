"""Random field synthesis from plane-wave mode coefficients.

Coefficients are circularly-symmetric complex Gaussians, one ``(H+, H-)``
pair per lattice mode.  A field sample at ``(x, y, z)`` is

    h = sum_k (H+_k exp(j g_k z) + H-_k exp(-j g_k z))
              * exp(j 2 pi (ell_k x / Lx + m_k y / Ly))

Random streams
--------------
A realization is driven by its own ``numpy.random.Generator`` built from
``SeedSequence(master_seed, spawn_key=(namespace, index))``.  Inside a
realization, four standard normals are consumed per mode in lattice order:
``Re H+, Im H+, Re H-, Im H-``.  The ``-`` draws are consumed even when only
one half-space is active, so switching ``half_spaces`` leaves ``H+`` intact.
Namespace 0 is the structured field, namespace 1 the i.i.d. baseline.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError
from .spectral import Dimensionality, WavenumberLattice

__all__ = [
    "FIELD_NAMESPACE",
    "BASELINE_NAMESPACE",
    "SpatialGrid",
    "ModeCoefficients",
    "realization_stream",
    "draw_coefficients",
    "draw_ensemble_coefficients",
    "basis_matrix",
    "synthesize",
    "synthesize_1d",
    "synthesize_2d",
    "synthesize_3d",
    "iid_rayleigh",
    "iid_rayleigh_ensemble",
]

FIELD_NAMESPACE = 0
BASELINE_NAMESPACE = 1

_CANONICAL_RTOL = 1e-12


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform sample grid anchored at the aperture corner.

    Points are stored as an ``(N, 3)`` array ordered with ``x`` slowest and
    ``z`` fastest, i.e. ``numpy.meshgrid(x, y, z, indexing="ij")`` flattened.
    """

    points: np.ndarray
    spacing: float
    counts: tuple
    lengths: tuple = field(default=(0.0, 0.0, 0.0))

    @classmethod
    def uniform(cls, aperture, spacing):
        """Grid ``{0, d, ..., (n_i - 1) d}`` per axis, ``n_i = round(L_i / d)``.

        Unoccupied axes (zero length) hold the single coordinate 0.
        """
        if not spacing > 0:
            raise InvalidArgumentError(f"grid spacing must be positive, got {spacing}")
        lengths = (aperture.Lx, aperture.Ly, aperture.Lz)
        counts = tuple(max(1, int(round(L / spacing))) if L > 0 else 1 for L in lengths)
        axes = [np.arange(n) * spacing for n in counts]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        return cls(pts, float(spacing), counts, lengths)

    @property
    def N(self):
        return int(self.points.shape[0])

    @property
    def z_values(self):
        nz = self.counts[2]
        return self.points[:nz, 2].copy()

    def is_canonical(self):
        """True when each occupied axis covers exactly one period."""
        for n, L in zip(self.counts[:2], self.lengths[:2]):
            if L > 0 and not math.isclose(n * self.spacing, L, rel_tol=_CANONICAL_RTOL):
                return False
        return True


@dataclass
class ModeCoefficients:
    """Mode amplitudes for one realization (1-D arrays) or a batch (2-D).

    ``plus`` and ``minus`` have shape ``(n_modes,)`` or ``(n_modes, M)``.
    """

    lattice: WavenumberLattice
    plus: np.ndarray
    minus: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def combined(self):
        """Amplitudes at ``z = 0``: ``H+ + H-``."""
        return self.plus + self.minus

    def at_z(self, z):
        if z == 0:
            return self.combined
        g = self.lattice.gamma_lm
        phase = np.exp(1j * g * z)
        if self.plus.ndim == 2:
            phase = phase[:, None]
        return self.plus * phase + self.minus * np.conj(phase)


def realization_stream(master_seed, index, namespace=FIELD_NAMESPACE):
    """Generator for realization ``index`` under ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(namespace), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def _draw(lattice, stream, half_spaces):
    z = stream.standard_normal((len(lattice), 4))
    sp = np.sqrt(lattice.var_plus / 2.0)
    sm = np.sqrt(lattice.var_minus / 2.0)
    plus = sp * (z[:, 0] + 1j * z[:, 1])
    if half_spaces == 1:
        minus = np.zeros(len(lattice), dtype=complex)
    else:
        minus = sm * (z[:, 2] + 1j * z[:, 3])
    return plus, minus


def _check_half_spaces(half_spaces):
    if half_spaces not in (1, 2):
        raise InvalidArgumentError(f"half_spaces must be 1 or 2, got {half_spaces}")


def draw_coefficients(lattice, stream, half_spaces=2):
    """One realization of mode amplitudes drawn from ``stream``.

    Real and imaginary parts are independent ``N(0, var/2)``; a zero variance
    gives an exactly zero amplitude.
    """
    _check_half_spaces(half_spaces)
    plus, minus = _draw(lattice, stream, half_spaces)
    return ModeCoefficients(lattice, plus, minus, {"half_spaces": half_spaces})


def draw_ensemble_coefficients(
    lattice, master_seed, M, half_spaces=2, namespace=FIELD_NAMESPACE, workers=1
):
    """Amplitudes for realizations ``0..M-1`` as ``(n_modes, M)`` arrays.

    Column ``j`` depends only on ``(master_seed, namespace, j)``, so the
    result is the same for any ``workers``.
    """
    _check_half_spaces(half_spaces)
    K = len(lattice)
    plus = np.empty((K, M), dtype=complex)
    minus = np.empty((K, M), dtype=complex)

    def fill(cols):
        for j in cols:
            p, q = _draw(lattice, realization_stream(master_seed, j, namespace), half_spaces)
            plus[:, j] = p
            minus[:, j] = q

    _run_chunks(fill, M, workers)
    prov = {"master_seed": int(master_seed), "namespace": int(namespace), "M": int(M),
            "half_spaces": half_spaces}
    return ModeCoefficients(lattice, plus, minus, prov)


def _run_chunks(fn, M, workers):
    workers = max(1, int(workers))
    if workers == 1 or M < 2:
        fn(range(M))
        return
    bounds = np.linspace(0, M, min(workers, M) + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, chunks))


def basis_matrix(lattice, points):
    """``exp(j 2 pi (ell x / Lx + m y / Ly))`` for every point and mode."""
    ap = lattice.aperture
    pts = np.asarray(points, dtype=float)
    phase = np.outer(pts[:, 0] / ap.Lx, lattice.ell)
    if lattice.dimensionality is not Dimensionality.LINEAR:
        phase = phase + np.outer(pts[:, 1] / ap.Ly, lattice.m)
    return np.exp(2j * math.pi * phase)


def _planar(lattice, coeffs, points, counts, canonical, method):
    if method == "auto":
        method = "fft" if canonical else "direct"
    if method == "direct":
        return basis_matrix(lattice, points) @ coeffs
    if method != "fft":
        raise InvalidArgumentError(f"unknown synthesis method {method!r}")
    if not canonical:
        raise InvalidArgumentError("FFT synthesis needs a grid covering exactly one period")
    nx, ny = counts
    batch = coeffs.shape[1:] if coeffs.ndim == 2 else ()
    spec = np.zeros((nx, ny) + batch, dtype=complex)
    # Indices that alias on the grid add up, which is what the direct sum does.
    np.add.at(spec, (lattice.ell % nx, lattice.m % ny), coeffs)
    field_ = np.fft.ifft2(spec, axes=(0, 1)) * (nx * ny)
    return field_.reshape((nx * ny,) + batch)


def _require(cond, message):
    if not cond:
        raise InvalidArgumentError(message)


def synthesize_1d(coeffs, grid):
    """Field along a segment: ``h(x) = sum_ell (H+ + H-) exp(j 2 pi ell x / Lx)``."""
    lat = coeffs.lattice
    _require(lat.dimensionality is Dimensionality.LINEAR, "synthesize_1d needs a linear lattice")
    _require(grid.counts[1] == 1 and grid.counts[2] == 1, "synthesize_1d needs a grid along x")
    return basis_matrix(lat, grid.points) @ coeffs.combined


def synthesize_2d(coeffs, grid, method="direct"):
    """Field on the ``z = 0`` plane.

    ``method`` is ``"direct"`` (explicit sum), ``"fft"`` (inverse FFT, grid
    must cover one period exactly) or ``"auto"``.
    """
    lat = coeffs.lattice
    _require(lat.dimensionality is not Dimensionality.LINEAR, "synthesize_2d needs a planar lattice")
    _require(grid.counts[2] == 1 and np.all(grid.points[:, 2] == 0), "synthesize_2d needs a z = 0 grid")
    return _planar(lat, coeffs.combined, grid.points, grid.counts[:2], grid.is_canonical(), method)


def synthesize_3d(coeffs, grid, method="direct"):
    """Field on a volumetric grid, one ``z``-plane at a time.

    On each plane the pair ``(H+, H-)`` is folded into
    ``H+ exp(j g z) + H- exp(-j g z)`` and the planar series evaluated.
    """
    lat = coeffs.lattice
    _require(lat.dimensionality is not Dimensionality.LINEAR, "synthesize_3d needs a planar lattice")
    nx, ny, nz = grid.counts
    zs = grid.z_values
    batch = coeffs.plus.shape[1:]
    out = np.empty((nx * ny, nz) + batch, dtype=complex)
    plane_pts = grid.points[::nz]
    canonical = grid.is_canonical()
    for k, z in enumerate(zs):
        out[:, k] = _planar(lat, coeffs.at_z(z), plane_pts, (nx, ny), canonical, method)
    return out.reshape((nx * ny * nz,) + batch)


def synthesize(coeffs, grid, method="direct"):
    """Dispatch on the lattice and grid dimensionality."""
    if coeffs.lattice.dimensionality is Dimensionality.LINEAR:
        return synthesize_1d(coeffs, grid)
    if grid.counts[2] == 1 and np.all(grid.points[:, 2] == 0):
        return synthesize_2d(coeffs, grid, method)
    return synthesize_3d(coeffs, grid, method)


def iid_rayleigh(n, stream):
    """``n`` independent unit-variance circular complex Gaussians."""
    if n < 1:
        raise InvalidArgumentError(f"n must be at least 1, got {n}")
    z = stream.standard_normal((n, 2))
    return (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)


def iid_rayleigh_ensemble(n, M, master_seed, namespace=BASELINE_NAMESPACE, workers=1):
    """``(n, M)`` i.i.d. Rayleigh matrix; column ``j`` from its own stream."""
    H = np.empty((n, M), dtype=complex)

    def fill(cols):
        for j in cols:
            H[:, j] = iid_rayleigh(n, realization_stream(master_seed, j, namespace))

    _run_chunks(fill, M, workers)
    return H

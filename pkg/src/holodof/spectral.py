"""Wavenumber-domain mathematics for monochromatic random fields.

The field observed over a rectangular aperture is represented by a finite set
of plane-wave modes indexed by integer pairs ``(ell, m)``.  A mode is kept when
its wavenumber ``(2*pi*ell/Lx, 2*pi*m/Ly)`` falls in the propagating disk of
radius ``kappa = 2*pi/wavelength``.  Each mode carries two independent complex
Gaussian amplitudes (one per half-space, ``+`` and ``-``) whose variances are
the spectral power collected over the wavenumber cell
``[2*pi*ell/Lx, 2*pi*(ell+1)/Lx] x [2*pi*m/Ly, 2*pi*(m+1)/Ly]``.

Units: lengths in metres, wavenumbers in rad/m.  Power is normalised so that
the continuous field has unit variance, i.e. each half-space branch carries
1/2 when integrated over the whole disk.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .exceptions import (
    EvanescentRegionError,
    InvalidArgumentError,
    NumericalFailureError,
)

__all__ = [
    "Dimensionality",
    "Aperture",
    "SpectralFactor",
    "ISOTROPIC",
    "LatticeMode",
    "WavenumberLattice",
    "wavenumber",
    "gamma",
    "isotropic_psd",
    "build_lattice",
    "mode_variance",
    "cardinality_estimate",
    "lattice_bounds",
    "in_ellipse",
    "QUAD_ABS_TOL",
]

#: Absolute quadrature tolerance, in units of the total field power.
QUAD_ABS_TOL = 1e-9

# L/lambda ratios closer than this (relative) to an integer are snapped to it,
# so that e.g. Lx = 16 * 0.1 m with lambda = 0.1 m behaves as exactly 16.
_RATIO_SNAP = 1e-9


class Dimensionality(enum.Enum):
    LINEAR = 1
    PLANAR = 2
    VOLUMETRIC = 3


def _snap(ratio):
    nearest = round(ratio)
    if nearest != 0 and abs(ratio - nearest) <= _RATIO_SNAP * abs(ratio):
        return float(nearest)
    return ratio


@dataclass(frozen=True)
class Aperture:
    """Rectangular observation region.

    Parameters
    ----------
    Lx, Ly, Lz : float
        Side lengths in metres.  ``Ly = 0`` gives a line segment and
        ``Lz = 0`` a planar rectangle.
    wavelength : float
        Wavelength in metres.
    """

    Lx: float
    Ly: float = 0.0
    Lz: float = 0.0
    wavelength: float = 1.0

    def __post_init__(self):
        for name in ("Lx", "Ly", "Lz", "wavelength"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value}")
        if self.wavelength <= 0:
            raise InvalidArgumentError(f"wavelength must be positive, got {self.wavelength}")
        if self.Lx <= 0:
            raise InvalidArgumentError(f"Lx must be positive, got {self.Lx}")
        if self.Ly < 0 or self.Lz < 0:
            raise InvalidArgumentError("Ly and Lz must be nonnegative")
        if self.Ly == 0 and self.Lz > 0:
            raise InvalidArgumentError("a volumetric aperture needs Ly > 0")
        if self.Ly > 0 and self.Lz > 0 and not self.Lz < min(self.Lx, self.Ly):
            raise InvalidArgumentError(
                f"volumetric aperture requires Lz < min(Lx, Ly); got Lz={self.Lz}, "
                f"min(Lx, Ly)={min(self.Lx, self.Ly)}"
            )

    @classmethod
    def in_wavelengths(cls, Lx, Ly=0.0, Lz=0.0, wavelength=1.0):
        """Build an aperture from side lengths given in units of wavelength."""
        return cls(Lx * wavelength, Ly * wavelength, Lz * wavelength, wavelength)

    @property
    def kappa(self):
        return wavenumber(self.wavelength)

    @property
    def dimensionality(self):
        if self.Ly == 0:
            return Dimensionality.LINEAR
        if self.Lz == 0:
            return Dimensionality.PLANAR
        return Dimensionality.VOLUMETRIC

    @property
    def rx(self):
        """Lx / wavelength (near-integers snapped)."""
        return _snap(self.Lx / self.wavelength)

    @property
    def ry(self):
        """Ly / wavelength (near-integers snapped); 0 for a line segment."""
        return _snap(self.Ly / self.wavelength) if self.Ly > 0 else 0.0


@dataclass(frozen=True)
class SpectralFactor:
    """Direction-dependent power weighting of the isotropic spectrum.

    ``evaluator(kx, ky, branch)`` returns the ratio ``S_h^{+/-} / S_h`` at
    the given wavenumbers (rad/m), with ``branch`` equal to ``+1`` or ``-1``.
    It must accept numpy arrays and be finite on the open disk.  When
    ``constant`` is set the evaluator is known to be that constant, which
    lets the integrator use a closed-form inner integral.
    """

    evaluator: Callable
    label: str
    constant: Optional[float] = None

    def __call__(self, kx, ky, branch):
        return self.evaluator(kx, ky, branch)


def _unit(kx, ky, branch):
    return np.ones(np.broadcast(kx, ky).shape)


ISOTROPIC = SpectralFactor(_unit, "isotropic", constant=1.0)


def wavenumber(wavelength):
    """Return ``2*pi / wavelength``."""
    if not wavelength > 0:
        raise InvalidArgumentError(f"wavelength must be positive, got {wavelength}")
    return 2.0 * math.pi / wavelength


def gamma(kx, ky, kappa):
    """Longitudinal wavenumber ``sqrt(kappa**2 - kx**2 - ky**2)``.

    Raises
    ------
    EvanescentRegionError
        If any point lies outside the closed disk of radius ``kappa``.
    """
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    radicand = kappa * kappa - kx * kx - ky * ky
    # Points within round-off of the circle count as on it.
    if np.any(radicand < -8 * np.finfo(float).eps * kappa * kappa):
        raise EvanescentRegionError("wavenumber outside the propagating disk")
    out = np.sqrt(np.clip(radicand, 0.0, None))
    return float(out) if out.ndim == 0 else out


def isotropic_psd(kx, ky, kappa):
    """Planar power spectral density of one half-space branch.

    Returns ``(pi/kappa) / gamma`` inside the open disk, ``0`` outside the
    closed disk and ``+inf`` on the circle itself, where the density has an
    integrable singularity.
    """
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    radicand = kappa * kappa - kx * kx - ky * ky
    out = np.zeros(np.broadcast(kx, ky).shape)
    inside = radicand > 0
    out[inside] = (math.pi / kappa) / np.sqrt(radicand[inside])
    out[radicand == 0] = np.inf
    return float(out) if out.ndim == 0 else out


def in_ellipse(ell, m, rx, ry):
    """Lattice-ellipse membership test ``(ell/rx)**2 + (m/ry)**2 <= 1``.

    ``ry = 0`` selects the line-segment rule ``-rx <= ell < rx``.
    Evaluated in the cross-multiplied form ``ell^2 ry^2 + m^2 rx^2 <= rx^2 ry^2``
    so that integer ratios give exact results.
    """
    ell = np.asarray(ell)
    m = np.asarray(m)
    if ry == 0:
        return (m == 0) & (ell >= -math.floor(rx)) & (ell <= math.ceil(rx) - 1)
    return ell * ell * (ry * ry) + m * m * (rx * rx) <= (rx * rx) * (ry * ry)


def lattice_bounds(aperture):
    """Inclusive index bounding box ``((ell_lo, ell_hi), (m_lo, m_hi))``."""
    ex = math.ceil(aperture.rx)
    if aperture.dimensionality is Dimensionality.LINEAR:
        return (-math.floor(aperture.rx), ex - 1), (0, 0)
    ey = math.ceil(aperture.ry)
    return (-ex, ex), (-ey, ey)


def cardinality_estimate(aperture):
    """Area estimate ``pi * Lx * Ly / wavelength**2`` of the lattice ellipse."""
    if aperture.dimensionality is Dimensionality.LINEAR:
        raise InvalidArgumentError(
            "cardinality estimate needs a planar or volumetric aperture; "
            "a segment has 2*Lx/wavelength modes"
        )
    return math.pi * aperture.Lx * aperture.Ly / aperture.wavelength**2


# --------------------------------------------------------------------------
# Per-mode variance integration
# --------------------------------------------------------------------------
#
# Work in the unit disk (u, v) = (kx, ky) / kappa.  One branch contributes
#
#     sigma^2 = 1/(4 pi) * iint_cell w(u, v) / sqrt(1 - u^2 - v^2) du dv
#
# With v = R sin(theta), R = sqrt(1 - u^2), the inner integral becomes
# int w(u, R sin theta) d theta over [asin(v0/R), asin(v1/R)], which has no
# singularity.  For constant w it is just the angle difference.


def _theta(v, R):
    if R == 0.0:
        return math.copysign(math.pi / 2, v) if v != 0 else 0.0
    return math.asin(min(1.0, max(-1.0, v / R)))


def _breakpoints(u0, u1, v0, v1):
    pts = {0.0}
    for v in (v0, v1):
        if abs(v) < 1:
            c = math.sqrt(1 - v * v)
            pts.update((c, -c))
    return sorted(p for p in pts if u0 < p < u1)


def _cell_integral(u0, u1, v0, v1, factor, kappa, branch, tol):
    """``iint w / sqrt(1-u^2-v^2)`` over the cell clipped to the unit disk."""
    u0, u1 = max(u0, -1.0), min(u1, 1.0)
    v0, v1 = max(v0, -1.0), min(v1, 1.0)
    if u0 >= u1 or v0 >= v1:
        return 0.0, 0.0

    if factor.constant is not None:
        scale = factor.constant

        def outer(u):
            R = math.sqrt(max(0.0, 1.0 - u * u))
            return _theta(v1, R) - _theta(v0, R)

    else:
        scale = 1.0
        inner_tol = tol / max(u1 - u0, 1e-300)

        def outer(u):
            R = math.sqrt(max(0.0, 1.0 - u * u))
            t0, t1 = _theta(v0, R), _theta(v1, R)
            if t1 <= t0:
                return 0.0
            val, err = integrate.quad(
                lambda t: float(factor(kappa * u, kappa * R * math.sin(t), branch)),
                t0,
                t1,
                epsabs=inner_tol,
                epsrel=1e-10,
                limit=100,
            )
            return val

    pts = _breakpoints(u0, u1, v0, v1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            outer, u0, u1, points=pts or None, epsabs=tol, epsrel=1e-10, limit=200
        )
    return scale * val, abs(scale) * err


def _cell_edges(ell, m, aperture):
    rx = aperture.rx
    u0, u1 = ell / rx, (ell + 1) / rx
    if aperture.dimensionality is Dimensionality.LINEAR:
        # A segment does not resolve ky: the cell is the full vertical chord.
        return u0, u1, -1.0, 1.0
    ry = aperture.ry
    return u0, u1, m / ry, (m + 1) / ry


def cell_power(ell, m, aperture, factor=ISOTROPIC, branch=+1, tol=QUAD_ABS_TOL):
    """Variance and error estimate for the cell of ``(ell, m)``, any index.

    Unlike :func:`mode_variance` this does not require ``(ell, m)`` to be a
    lattice member; it is the raw clipped-cell integral.
    """
    if branch not in (+1, -1):
        raise InvalidArgumentError(f"branch must be +1 or -1, got {branch}")
    u0, u1, v0, v1 = _cell_edges(ell, m, aperture)
    scale = 1.0 / (4.0 * math.pi)
    val, err = _cell_integral(u0, u1, v0, v1, factor, aperture.kappa, branch, tol / scale)
    val, err = scale * val, scale * err
    if err > tol:
        raise NumericalFailureError(
            f"variance quadrature for mode ({ell}, {m}) did not converge: "
            f"error estimate {err:.3e} > tolerance {tol:.1e}",
            estimate=err,
        )
    if val < 0:
        if val < -tol:
            raise NumericalFailureError(
                f"negative variance {val:.3e} for mode ({ell}, {m})", estimate=err
            )
        val = 0.0
    return val, err


def mode_variance(ell, m, aperture, factor=ISOTROPIC, branch=+1, tol=QUAD_ABS_TOL):
    """Variance of the ``branch`` amplitude of mode ``(ell, m)``.

    The spectral power of one half-space over the mode's wavenumber cell,
    clipped to the propagating disk, divided by ``(2*pi)**2``.  For a line
    segment the cell spans the whole ``ky`` chord.

    Raises
    ------
    InvalidArgumentError
        If ``(ell, m)`` is not a lattice member.
    NumericalFailureError
        If the quadrature error estimate exceeds ``tol``.
    """
    if not bool(in_ellipse(ell, m, aperture.rx, aperture.ry)):
        raise InvalidArgumentError(f"mode ({ell}, {m}) is outside the lattice ellipse")
    return cell_power(ell, m, aperture, factor, branch, tol)[0]


@dataclass(frozen=True)
class LatticeMode:
    ell: int
    m: int
    gamma_lm: float
    var_plus: float
    var_minus: float

    @property
    def degenerate(self):
        """True when the wavenumber lies on the circle (``gamma_lm == 0``)."""
        return self.gamma_lm == 0.0


@dataclass(frozen=True)
class WavenumberLattice:
    """Resolvable plane-wave modes of an aperture, sorted by ``(ell, m)``."""

    aperture: Aperture
    modes: tuple
    dimensionality: Dimensionality
    factor_label: str = field(default="isotropic")

    def __len__(self):
        return len(self.modes)

    @cached_property
    def ell(self):
        return np.array([md.ell for md in self.modes], dtype=int)

    @cached_property
    def m(self):
        return np.array([md.m for md in self.modes], dtype=int)

    @cached_property
    def gamma_lm(self):
        return np.array([md.gamma_lm for md in self.modes], dtype=float)

    @cached_property
    def var_plus(self):
        return np.array([md.var_plus for md in self.modes], dtype=float)

    @cached_property
    def var_minus(self):
        return np.array([md.var_minus for md in self.modes], dtype=float)

    def total_variance(self, half_spaces=2):
        """Sum of mode variances; ``half_spaces=1`` drops the ``-`` branch."""
        total = float(self.var_plus.sum())
        if half_spaces == 2:
            total += float(self.var_minus.sum())
        elif half_spaces != 1:
            raise InvalidArgumentError(f"half_spaces must be 1 or 2, got {half_spaces}")
        return total

    def index_set(self):
        return {(md.ell, md.m) for md in self.modes}


def build_lattice(aperture, factor=ISOTROPIC, tol=QUAD_ABS_TOL):
    """Enumerate the lattice ellipse of ``aperture`` and integrate variances.

    The ``(0, 0)`` mode is always present.  Modes whose wavenumber lies on the
    circle are kept with ``gamma_lm = 0`` (see :attr:`LatticeMode.degenerate`).
    """
    (l_lo, l_hi), (m_lo, m_hi) = lattice_bounds(aperture)
    ll, mm = np.meshgrid(np.arange(l_lo, l_hi + 1), np.arange(m_lo, m_hi + 1), indexing="ij")
    ll, mm = ll.ravel(), mm.ravel()
    keep = in_ellipse(ll, mm, aperture.rx, aperture.ry)
    ll, mm = ll[keep], mm[keep]

    kappa = aperture.kappa
    rx, ry = aperture.rx, aperture.ry
    frac = (ll / rx) ** 2 + ((mm / ry) ** 2 if ry > 0 else 0.0)
    gam = kappa * np.sqrt(np.clip(1.0 - frac, 0.0, None))

    modes = []
    for ell, m, g in zip(ll.tolist(), mm.tolist(), gam.tolist()):
        vp = cell_power(ell, m, aperture, factor, +1, tol)[0]
        if factor.constant is not None:
            vm = vp
        else:
            vm = cell_power(ell, m, aperture, factor, -1, tol)[0]
        modes.append(LatticeMode(ell, m, g, vp, vm))
    return WavenumberLattice(aperture, tuple(modes), aperture.dimensionality, factor.label)

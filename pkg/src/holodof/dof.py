"""Degrees-of-freedom analysis: closed forms and Monte Carlo eigen-spectra."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .exceptions import InvalidArgumentError, NumericalFailureError
from .spectral import ISOTROPIC, Aperture, Dimensionality, SpectralFactor, build_lattice
from .synthesis import (
    FIELD_NAMESPACE,
    SpatialGrid,
    draw_ensemble_coefficients,
    synthesize,
)

__all__ = [
    "EnsembleSizeWarning",
    "Scenario",
    "ChannelEnsemble",
    "EigenSpectrum",
    "EffectiveDof",
    "DofReport",
    "SteeringMatrix",
    "theoretical_dof",
    "build_ensemble",
    "gram_spectrum",
    "effective_dof",
    "steering_matrix",
    "steering_rank",
    "dof_report",
    "MIN_M_FACTOR",
]

MIN_M_FACTOR = 4
COMFORTABLE_M_FACTOR = 10
RESIDUAL_TOL = 1e-8
RANK_TOL = 1e-10


class EnsembleSizeWarning(UserWarning):
    """Ensemble is large enough to be accepted but small for a stable spectrum."""


def theoretical_dof(aperture, dimensionality=None, half_spaces=2):
    """Closed-form average DoF of an isotropic field over ``aperture``.

    ``2 Lx / wavelength`` for a segment, ``pi Lx Ly / wavelength**2`` for a
    rectangle, and twice that for a volume when both half-spaces contribute.
    The volumetric value does not depend on ``Lz``.
    """
    if dimensionality is None:
        dimensionality = aperture.dimensionality
    if dimensionality is not aperture.dimensionality:
        raise InvalidArgumentError(
            f"{dimensionality.name.lower()} DoF requested for a "
            f"{aperture.dimensionality.name.lower()} aperture"
        )
    if half_spaces not in (1, 2):
        raise InvalidArgumentError(f"half_spaces must be 1 or 2, got {half_spaces}")
    lam = aperture.wavelength
    if dimensionality is Dimensionality.LINEAR:
        return 2.0 * aperture.Lx / lam
    area = math.pi * aperture.Lx * aperture.Ly / lam**2
    if dimensionality is Dimensionality.PLANAR:
        return area
    return half_spaces * area


@dataclass(frozen=True)
class Scenario:
    """What to simulate: aperture, grid spacing (m), half-spaces, spectrum."""

    aperture: Aperture
    spacing: float
    half_spaces: int = 2
    factor: SpectralFactor = ISOTROPIC

    def __post_init__(self):
        if not self.spacing > 0:
            raise InvalidArgumentError(f"grid spacing must be positive, got {self.spacing}")
        if self.half_spaces not in (1, 2):
            raise InvalidArgumentError(f"half_spaces must be 1 or 2, got {self.half_spaces}")

    @cached_property
    def lattice(self):
        return build_lattice(self.aperture, self.factor)

    @cached_property
    def grid(self):
        return SpatialGrid.uniform(self.aperture, self.spacing)

    @property
    def N(self):
        return self.grid.N

    def describe(self):
        ap = self.aperture
        return {
            "Lx": ap.Lx,
            "Ly": ap.Ly,
            "Lz": ap.Lz,
            "wavelength": ap.wavelength,
            "spacing": self.spacing,
            "half_spaces": self.half_spaces,
            "factor": self.factor.label,
            "dimensionality": ap.dimensionality.name.lower(),
        }


@dataclass
class ChannelEnsemble:
    """``N x M`` matrix of field realizations (one per column)."""

    H: np.ndarray
    scenario: Scenario = None
    master_seed: int = None
    namespace: int = FIELD_NAMESPACE

    @property
    def N(self):
        return self.H.shape[0]

    @property
    def M(self):
        return self.H.shape[1]


def _check_size(N, M):
    if M < MIN_M_FACTOR * N:
        raise InvalidArgumentError(
            f"ensemble of M={M} realizations is too small for N={N} samples: "
            f"the sample Gram matrix needs M >= {MIN_M_FACTOR}N = {MIN_M_FACTOR * N} "
            "to resolve the eigenvalue knee"
        )
    if M < COMFORTABLE_M_FACTOR * N:
        warnings.warn(
            f"M={M} < {COMFORTABLE_M_FACTOR}N={COMFORTABLE_M_FACTOR * N}: "
            "sample eigenvalues will be noticeably spread (ill-conditioned estimate)",
            EnsembleSizeWarning,
            stacklevel=3,
        )


def build_ensemble(scenario, M, master_seed, workers=1, method="direct"):
    """Synthesize ``M`` independent realizations of ``scenario``.

    Column ``j`` is fully determined by ``(master_seed, j)``.

    Raises
    ------
    InvalidArgumentError
        If ``M < 4 N``.
    """
    N = scenario.N
    _check_size(N, M)
    coeffs = draw_ensemble_coefficients(
        scenario.lattice, master_seed, M, scenario.half_spaces, FIELD_NAMESPACE, workers
    )
    H = synthesize(coeffs, scenario.grid, method)
    return ChannelEnsemble(H, scenario, int(master_seed), FIELD_NAMESPACE)


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues of ``H H^H / M`` in nonincreasing order."""

    eigenvalues: np.ndarray
    trace: float
    normalization: str = "per-realization"
    max_residual: float = field(default=0.0, compare=False)

    def __len__(self):
        return len(self.eigenvalues)


def gram_spectrum(ensemble, check_pairs=10):
    """Eigen-spectrum of the per-realization Gram matrix ``H H^H / M``.

    The top ``check_pairs`` eigenpairs are verified to satisfy
    ``||G v - lam v|| <= 1e-8 * lam_max``.  Round-off negatives are clamped
    to zero; anything below ``-1e-8 * trace`` is treated as a solver failure.
    """
    H = ensemble.H if isinstance(ensemble, ChannelEnsemble) else np.asarray(ensemble)
    if H.ndim != 2 or H.size == 0:
        raise InvalidArgumentError("ensemble matrix must be a nonempty 2-D array")
    N, M = H.shape
    G = (H @ H.conj().T) / M
    G = 0.5 * (G + G.conj().T)
    trace = float(np.real(np.trace(G)))
    if not np.all(np.isfinite(G)):
        raise NumericalFailureError("Gram matrix has non-finite entries", estimate=trace)
    try:
        w, V = scipy.linalg.eigh(G)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(
            f"Hermitian eigen-solver failed on {N}x{N} Gram matrix "
            f"(trace={trace:.6g}, max|G|={np.abs(G).max():.6g}): {exc}",
            estimate=trace,
        ) from exc
    w, V = w[::-1], V[:, ::-1]
    lam_max = max(float(w[0]), 0.0)
    k = min(check_pairs, N)
    resid = 0.0
    if lam_max > 0:
        R = G @ V[:, :k] - V[:, :k] * w[:k]
        resid = float(np.linalg.norm(R, axis=0).max())
        if resid > RESIDUAL_TOL * lam_max:
            raise NumericalFailureError(
                f"eigenpair residual {resid:.3e} exceeds {RESIDUAL_TOL:g} * lambda_max "
                f"(lambda_max={lam_max:.6g}, lambda_min={w[-1]:.3g})",
                estimate=resid,
            )
    floor = -RESIDUAL_TOL * max(trace, 0.0)
    if w[-1] < floor:
        raise NumericalFailureError(
            f"Gram matrix has eigenvalue {w[-1]:.3e} below round-off floor {floor:.3e}",
            estimate=float(w[-1]),
        )
    w = np.clip(w, 0.0, None)
    return EigenSpectrum(np.ascontiguousarray(w), trace, "per-realization", resid)


@dataclass(frozen=True)
class EffectiveDof:
    """Both empirical DoF read-offs for one spectrum."""

    trace_fraction: int
    relative_floor: int
    tau: float
    rho: float

    def as_dict(self):
        return {"trace_fraction": self.trace_fraction, "relative_floor": self.relative_floor,
                "tau": self.tau, "rho": self.rho}


def effective_dof(spectrum, tau=0.95, rho=1e-2):
    """Count significant eigenvalues two ways.

    ``trace_fraction`` is the smallest ``k`` whose leading eigenvalues hold at
    least ``tau`` of the trace; ``relative_floor`` counts eigenvalues at or
    above ``rho`` times the largest.  An all-zero spectrum gives zero for both.
    """
    if not 0 < tau < 1:
        raise InvalidArgumentError(f"tau must lie in (0, 1), got {tau}")
    if not 0 < rho < 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1), got {rho}")
    ev = np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=float)
    total = float(ev.sum())
    if ev.size == 0 or total <= 0:
        return EffectiveDof(0, 0, tau, rho)
    csum = np.cumsum(ev)
    # Relative slack absorbs summation round-off on exactly flat spectra.
    k_tau = int(np.searchsorted(csum, tau * total * (1 - 1e-12), side="left")) + 1
    k_rho = int(np.count_nonzero(ev >= rho * ev[0]))
    return EffectiveDof(min(k_tau, ev.size), k_rho, tau, rho)


@dataclass(frozen=True)
class SteeringMatrix:
    """``A = [exp(j g z), exp(-j g z)]`` for one mode and a set of ``z`` samples."""

    gamma_lm: float
    z_samples: np.ndarray
    A: np.ndarray

    @cached_property
    def singular_values(self):
        return np.linalg.svd(self.A, compute_uv=False)

    @property
    def rank(self):
        s = self.singular_values
        return int(np.count_nonzero(s > RANK_TOL * s[0]))

    @property
    def degenerate(self):
        """Rank-deficient although ``gamma > 0`` and several ``z`` samples.

        Happens when every z-difference is a multiple of ``pi / gamma``.
        """
        return self.gamma_lm > 0 and len(self.z_samples) >= 2 and self.rank < 2


def steering_matrix(gamma_lm, z_samples):
    z = np.atleast_1d(np.asarray(z_samples, dtype=float))
    if z.size == 0:
        raise InvalidArgumentError("z_samples must not be empty")
    if z.ndim != 1 or np.unique(z).size != z.size:
        raise InvalidArgumentError("z_samples must be a vector of distinct values")
    if gamma_lm < 0:
        raise InvalidArgumentError(f"gamma must be nonnegative, got {gamma_lm}")
    e = np.exp(1j * gamma_lm * z)
    return SteeringMatrix(float(gamma_lm), z, np.stack([e, np.conj(e)], axis=1))


def steering_rank(gamma_lm, z_samples):
    """Numerical rank (1 or 2) of the two-column steering matrix.

    Degenerate sampling is reported with a ``RuntimeWarning`` rather than
    silently counted as full rank.
    """
    sm = steering_matrix(gamma_lm, z_samples)
    if sm.degenerate:
        warnings.warn(
            f"z-sampling is degenerate for gamma={gamma_lm:g}: spacings are "
            "multiples of pi/gamma, steering matrix has rank 1",
            RuntimeWarning,
            stacklevel=2,
        )
    return sm.rank


@dataclass(frozen=True)
class DofReport:
    eta_theory: float
    eta_effective: EffectiveDof
    policy: dict
    dimensionality: str
    aperture: dict


def dof_report(scenario, spectrum, tau=0.95, rho=1e-2):
    eff = effective_dof(spectrum, tau, rho)
    return DofReport(
        eta_theory=theoretical_dof(scenario.aperture, half_spaces=scenario.half_spaces),
        eta_effective=eff,
        policy={"tau": tau, "rho": rho,
                "note": "read-off rules are conventions of this package"},
        dimensionality=scenario.aperture.dimensionality.name.lower(),
        aperture=scenario.describe(),
    )

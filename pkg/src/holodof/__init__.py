"""Plane-wave series synthesis of random monochromatic fields and
Monte Carlo checks of their spatial degrees of freedom."""

from .exceptions import (
    ConfigError,
    EvanescentRegionError,
    HolodofError,
    InvalidArgumentError,
    NumericalFailureError,
)
from .spectral import (
    ISOTROPIC,
    Aperture,
    Dimensionality,
    LatticeMode,
    SpectralFactor,
    WavenumberLattice,
    build_lattice,
    cardinality_estimate,
    gamma,
    isotropic_psd,
    mode_variance,
    wavenumber,
)
from .synthesis import (
    ModeCoefficients,
    SpatialGrid,
    draw_coefficients,
    iid_rayleigh,
    realization_stream,
    synthesize_1d,
    synthesize_2d,
    synthesize_3d,
)
from .dof import (
    ChannelEnsemble,
    DofReport,
    EffectiveDof,
    EigenSpectrum,
    Scenario,
    SteeringMatrix,
    build_ensemble,
    effective_dof,
    gram_spectrum,
    steering_rank,
    theoretical_dof,
)
from .runner import (
    SCENARIOS,
    RunReport,
    ScenarioConfig,
    emit_results,
    parse_config,
    run_scenario,
    scenario_path,
)

__version__ = "0.1.0"

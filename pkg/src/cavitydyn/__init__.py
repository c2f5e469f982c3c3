"""Dynamics of a single cavity mode collectively coupled to a matter mode.

The package simulates the dimensionless two-oscillator model of a
bosonic matter excitation coupled to one cavity field mode, including
the diamagnetic self-interaction of the field.  Three backends cover
the physics at different levels: exact Gaussian phase-space propagation
(:mod:`cavitydyn.semiclassical`), truncated number-basis quantum
evolution (:mod:`cavitydyn.fock`), and open-cavity density-matrix
evolution with photon loss (:mod:`cavitydyn.lindblad`).  Scenario
configuration, sweeps, and table output live in
:mod:`cavitydyn.experiments` and :mod:`cavitydyn.cli`.
"""

from importlib import metadata as _metadata

from .core import (
    ModelVariant,
    PolaritonSpectrum,
    StabilityReport,
    SystemParams,
    drift_matrix,
    lambda_from_ion_parameters,
    polariton_spectrum,
    require_finite_period,
    stability_check,
)
from .errors import (
    CavityDynError,
    ConfigError,
    DegenerateSplitting,
    DimensionMismatch,
    GridTooNarrow,
    InsufficientSpan,
    NonPositiveInput,
    NumericError,
    ParameterError,
    StepTooLarge,
    TruncationError,
    TruncationTooSmall,
    UnstableSystem,
    WindowTooShort,
)
from .experiments import (
    DecayFit,
    ResultTable,
    ScenarioConfig,
    SweepSpec,
    TimeGridSpec,
    extract_beating_period,
    fit_decay_envelope,
    run_scenario,
    sweep,
)
from .fock import (
    FockState,
    TimeAverage,
    Truncation,
    build_hamiltonian,
    evolve_state,
    measure,
    prepare_scheme1,
    prepare_scheme2,
    time_average,
)
from .lindblad import (
    LindbladTrajectory,
    OutputFieldObservables,
    evolve_density,
    measure_density,
    output_field_observables,
)
from .semiclassical import (
    ClassicalPropagator,
    EllipseSummary,
    GaussianState,
    ModeStatistics,
    covariance_ellipse,
    delta_n_closed_form,
    delta_n_scheme2,
    delta_n_time_average,
    evolve_gaussian,
    f_functions,
    mean_X_closed_form,
    mode_statistics,
    position_density,
    position_variance,
    propagate_moments,
)

try:
    __version__ = _metadata.version("cavitydyn")
except _metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0+unknown"

__all__ = [
    "__version__",
    "ModelVariant",
    "PolaritonSpectrum",
    "StabilityReport",
    "SystemParams",
    "drift_matrix",
    "lambda_from_ion_parameters",
    "polariton_spectrum",
    "require_finite_period",
    "stability_check",
    "CavityDynError",
    "ConfigError",
    "DegenerateSplitting",
    "DimensionMismatch",
    "GridTooNarrow",
    "InsufficientSpan",
    "NonPositiveInput",
    "NumericError",
    "ParameterError",
    "StepTooLarge",
    "TruncationError",
    "TruncationTooSmall",
    "UnstableSystem",
    "WindowTooShort",
    "DecayFit",
    "ResultTable",
    "ScenarioConfig",
    "SweepSpec",
    "TimeGridSpec",
    "extract_beating_period",
    "fit_decay_envelope",
    "run_scenario",
    "sweep",
    "FockState",
    "TimeAverage",
    "Truncation",
    "build_hamiltonian",
    "evolve_state",
    "measure",
    "prepare_scheme1",
    "prepare_scheme2",
    "time_average",
    "LindbladTrajectory",
    "OutputFieldObservables",
    "evolve_density",
    "measure_density",
    "output_field_observables",
    "ClassicalPropagator",
    "EllipseSummary",
    "GaussianState",
    "ModeStatistics",
    "covariance_ellipse",
    "delta_n_closed_form",
    "delta_n_scheme2",
    "delta_n_time_average",
    "evolve_gaussian",
    "f_functions",
    "mean_X_closed_form",
    "mode_statistics",
    "position_density",
    "position_variance",
    "propagate_moments",
]

"""Scenario execution: reproducible tables of observables and sweeps.

A :class:`ScenarioConfig` fully describes one numerical experiment:
which initialization scheme, which parameters and backends, which
observables, and either a time grid (time-series mode) or one or two
sweep axes (sweep mode, one row per grid point).  :func:`run_scenario`
turns a config into a :class:`ResultTable` whose rows and columns are
deterministic functions of the config, so identical configs always
produce bit-identical tables.

The module also provides the two analysis routines used by the shipped
scenarios: beat-period extraction from a sampled collective-coordinate
trajectory, and exponential-envelope fitting for lossy-cavity decay.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fock as fock_mod
from . import lindblad as lindblad_mod
from .core import (
    ModelVariant,
    PolaritonSpectrum,
    SystemParams,
    polariton_spectrum,
    require_finite_period,
)
from .errors import (
    CavityDynError,
    InsufficientSpan,
    NumericError,
    ParameterError,
)
from .fock import TimeAverage, Truncation, time_average
from .semiclassical import (
    GaussianState,
    covariance_ellipse,
    delta_n_scheme2,
    delta_n_time_average,
    mode_statistics_arrays,
    propagate_moments,
)

__all__ = [
    "TimeGridSpec",
    "SweepSpec",
    "ScenarioConfig",
    "ColumnMeta",
    "ResultTable",
    "run_scenario",
    "sweep",
    "extract_beating_period",
    "DecayFit",
    "fit_decay_envelope",
    "TIME_SERIES_OBSERVABLES",
    "SCALAR_OBSERVABLES",
]

#: Default sampling density: points per period of the fast carrier 4 pi / sigma_bar.
SAMPLES_PER_CARRIER_PERIOD = 200

#: Hard cap on automatically built grids, to keep memory bounded.
MAX_GRID_POINTS = 200_001

_BACKENDS = ("semiclassical", "fock", "lindblad")

#: Time-series observables and which backends support them.
TIME_SERIES_OBSERVABLES: dict[str, frozenset] = {}
_MOMENT_NAMES = (
    "X",
    "P",
    "q",
    "p",
    "X2",
    "P2",
    "q2",
    "p2",
    "XP_sym",
    "qp_sym",
    "var_X",
    "n_photon",
    "var_n_photon",
    "Q_photon",
    "n_matter",
    "var_n_matter",
    "Q_matter",
    "delta_n_photon",
    "matter_axis_major",
    "matter_axis_minor",
    "matter_angle",
    "light_axis_major",
    "light_axis_minor",
    "light_angle",
)
for _name in _MOMENT_NAMES:
    TIME_SERIES_OBSERVABLES[_name] = frozenset(_BACKENDS)
TIME_SERIES_OBSERVABLES["n_out"] = frozenset({"lindblad"})
TIME_SERIES_OBSERVABLES["Q_out"] = frozenset({"lindblad"})

#: Observables whose values may legitimately be undefined (serialized empty/null).
_MAY_BE_UNDEFINED = {"Q_photon", "Q_matter", "Q_out", "Q_photon_avg", "Q_matter_avg", "Q_photon_min"}

#: Scalar observables available in sweep mode.
SCALAR_OBSERVABLES = (
    "omega_plus",
    "omega_minus",
    "sigma_bar",
    "delta_bar",
    "beta",
    "period_T",
    "omega_plus_rwa",
    "omega_minus_rwa",
    "sigma_bar_rwa",
    "delta_bar_rwa",
    "beta_rwa",
    "period_T_rwa",
    "delta_n_avg",
    "delta_n_avg_rwa",
    "scheme2_delta_n_avg",
    "scheme2_delta_n_avg_over_C2",
    "n_photon_avg",
    "delta_n_avg_sampled",
    "Q_photon_avg",
    "Q_matter_avg",
    "Q_photon_min",
    "T_extracted",
)

_SCHEME1_ONLY = {"delta_n_photon", "delta_n_avg", "delta_n_avg_rwa", "delta_n_avg_sampled"}
_SCHEME2_ONLY = {"scheme2_delta_n_avg", "scheme2_delta_n_avg_over_C2"}

_SWEEPABLE_FIELDS = (
    "params.gamma",
    "params.lambda",
    "params.kappa",
    "initial.x0",
    "initial.w",
    "initial.alpha_re",
    "initial.alpha_im",
)


@dataclass(frozen=True)
class TimeGridSpec:
    """Uniform output time grid specification.

    Exactly one of ``t_max`` (absolute end time) or ``periods`` (end time
    in units of the beat period) must be given.  The sampling step
    defaults to the carrier period divided by
    :data:`SAMPLES_PER_CARRIER_PERIOD`; it can be overridden with either
    ``n_points`` or ``dt``.  The resolved grid always starts at 0, is
    uniform, and contains the end time exactly.
    """

    t_max: float | None = None
    periods: float | None = None
    n_points: int | None = None
    dt: float | None = None

    def __post_init__(self) -> None:
        if (self.t_max is None) == (self.periods is None):
            raise ParameterError("specify exactly one of t_max or periods")
        if self.n_points is not None and self.dt is not None:
            raise ParameterError("specify at most one of n_points or dt")
        for name in ("t_max", "periods", "dt"):
            value = getattr(self, name)
            if value is not None and not (value > 0 and math.isfinite(value)):
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")
        if self.n_points is not None and (int(self.n_points) != self.n_points or self.n_points < 2):
            raise ParameterError(f"n_points must be an integer >= 2, got {self.n_points!r}")

    def resolve(self, spectrum: PolaritonSpectrum) -> np.ndarray:
        """Concrete time grid for the given normal-mode spectrum."""
        if self.periods is not None:
            t_max = self.periods * require_finite_period(spectrum)
        else:
            t_max = float(self.t_max)
        if self.n_points is not None:
            return np.linspace(0.0, t_max, int(self.n_points))
        dt = self.dt if self.dt is not None else spectrum.carrier_period / SAMPLES_PER_CARRIER_PERIOD
        n_intervals = max(1, math.ceil(t_max / dt - 1e-9))
        if n_intervals + 1 > MAX_GRID_POINTS:
            raise ParameterError(
                f"grid would need {n_intervals + 1} points (cap {MAX_GRID_POINTS}); "
                "increase dt or reduce the span"
            )
        return np.linspace(0.0, t_max, n_intervals + 1)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis: a config field and the values it takes."""

    field: str
    values: tuple

    def __post_init__(self) -> None:
        if self.field not in _SWEEPABLE_FIELDS:
            raise ParameterError(
                f"cannot sweep field {self.field!r}; sweepable fields: "
                + ", ".join(_SWEEPABLE_FIELDS)
            )
        values = tuple(float(v) for v in self.values)
        if len(values) == 0:
            raise ParameterError(f"sweep over {self.field!r} has no values")
        if not all(math.isfinite(v) for v in values):
            raise ParameterError(f"sweep over {self.field!r} contains non-finite values")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one reproducible experiment."""

    name: str
    scheme: str
    params: SystemParams
    x0: float | None = None
    w: float | None = None
    alpha: complex | None = None
    grid: TimeGridSpec | None = None
    truncation: Truncation | None = None
    backends: tuple = ("semiclassical",)
    observables: tuple = ("X",)
    sweeps: tuple = ()
    average_periods: int = 5

    def __post_init__(self) -> None:
        if self.scheme not in ("I", "II"):
            raise ParameterError(f"scheme must be 'I' or 'II', got {self.scheme!r}")
        if self.scheme == "I":
            if self.x0 is None or self.w is None:
                raise ParameterError("scheme I requires x0 and w")
            if not (self.w > 0):
                raise ParameterError(f"w must be > 0, got {self.w!r}")
            if self.alpha is not None:
                raise ParameterError("alpha is a scheme II field")
        else:
            if self.alpha is None:
                raise ParameterError("scheme II requires alpha")
            if self.x0 is not None or self.w is not None:
                raise ParameterError("x0 and w are scheme I fields")
            object.__setattr__(self, "alpha", complex(self.alpha))
        backends = tuple(self.backends)
        if not backends:
            raise ParameterError("at least one backend is required")
        for backend in backends:
            if backend not in _BACKENDS:
                raise ParameterError(
                    f"unknown backend {backend!r}; expected a subset of {_BACKENDS}"
                )
        object.__setattr__(self, "backends", backends)
        observables = tuple(self.observables)
        if not observables:
            raise ParameterError("at least one observable is required")
        object.__setattr__(self, "observables", observables)
        object.__setattr__(self, "sweeps", tuple(self.sweeps))
        if len(self.sweeps) > 2:
            raise ParameterError("at most two sweep axes are supported")
        if int(self.average_periods) != self.average_periods or self.average_periods < 3:
            raise ParameterError(
                f"average_periods must be an integer >= 3, got {self.average_periods!r}"
            )
        self._validate_observables()

    def _validate_observables(self) -> None:
        scalar = all(obs in SCALAR_OBSERVABLES for obs in self.observables)
        if self.sweeps and not scalar:
            bad = [o for o in self.observables if o not in SCALAR_OBSERVABLES]
            raise ParameterError(
                "sweeps tabulate scalar observables only; "
                f"{', '.join(repr(o) for o in bad)} not among: "
                + ", ".join(SCALAR_OBSERVABLES)
            )
        for obs in self.observables:
            if not scalar:
                if obs not in TIME_SERIES_OBSERVABLES:
                    raise ParameterError(
                        f"unknown time-series observable {obs!r}; available: "
                        + ", ".join(TIME_SERIES_OBSERVABLES)
                    )
                unsupported = [
                    b for b in self.backends if b not in TIME_SERIES_OBSERVABLES[obs]
                ]
                if unsupported:
                    raise ParameterError(
                        f"observable {obs!r} is not provided by backend(s) "
                        + ", ".join(unsupported)
                    )
            if obs in _SCHEME1_ONLY and self.scheme != "I":
                raise ParameterError(f"observable {obs!r} requires scheme I")
            if obs in _SCHEME2_ONLY and self.scheme != "II":
                raise ParameterError(f"observable {obs!r} requires scheme II")
        if not scalar and self.grid is None:
            raise ParameterError("time-series scenarios require a time grid")

    def is_tabular(self) -> bool:
        """True when the result is a sweep-style table of scalar values.

        Scalar observables always tabulate (a config without sweep axes
        yields a single-row table); time-series observables produce a
        ``t``-indexed series instead.
        """
        return all(obs in SCALAR_OBSERVABLES for obs in self.observables)

    # -- derived properties ------------------------------------------------

    def initial_gaussian(self) -> GaussianState:
        if self.scheme == "I":
            return GaussianState.scheme1(self.x0, self.w)
        return GaussianState.scheme2(self.alpha)

    def resolve_truncation(self) -> Truncation:
        if self.truncation is not None:
            return self.truncation
        if self.scheme == "I":
            return Truncation.for_scheme1(self.x0, self.w)
        return Truncation.for_scheme2(self.alpha)

    def initial_fock(self, trunc: Truncation):
        if self.scheme == "I":
            return fock_mod.prepare_scheme1(self.x0, self.w, trunc)
        return fock_mod.prepare_scheme2(self.alpha, trunc)

    def with_value(self, dotted_field: str, value: float) -> "ScenarioConfig":
        """Copy of the config with one sweepable field replaced."""
        if dotted_field == "params.gamma":
            return replace(self, params=self.params.replace(gamma=value))
        if dotted_field == "params.lambda":
            return replace(self, params=self.params.replace(lam=value))
        if dotted_field == "params.kappa":
            return replace(self, params=self.params.replace(kappa=value))
        if dotted_field == "initial.x0":
            return replace(self, x0=value)
        if dotted_field == "initial.w":
            return replace(self, w=value)
        if dotted_field == "initial.alpha_re":
            return replace(self, alpha=complex(value, self.alpha.imag))
        if dotted_field == "initial.alpha_im":
            return replace(self, alpha=complex(self.alpha.real, value))
        raise ParameterError(f"cannot set field {dotted_field!r}")

    def resolved(self) -> dict:
        """Plain-dict view of the fully resolved config (for metadata)."""
        out = {
            "name": self.name,
            "scheme": self.scheme,
            "params": {
                "gamma": self.params.gamma,
                "lambda": self.params.lam,
                "variant": self.params.variant.value,
                "kappa": self.params.kappa,
            },
            "backends": list(self.backends),
            "observables": list(self.observables),
            "average_periods": self.average_periods,
        }
        if self.scheme == "I":
            out["initial"] = {"x0": self.x0, "w": self.w}
        else:
            out["initial"] = {"alpha_re": self.alpha.real, "alpha_im": self.alpha.imag}
        if self.grid is not None:
            out["grid"] = {
                key: getattr(self.grid, key)
                for key in ("t_max", "periods", "n_points", "dt")
                if getattr(self.grid, key) is not None
            }
        trunc = self.resolve_truncation() if set(self.backends) & {"fock", "lindblad"} else None
        if trunc is not None:
            out["truncation"] = {
                "n_matter_max": trunc.n_matter_max,
                "n_photon_max": trunc.n_photon_max,
                "leak_tolerance": trunc.leak_tolerance,
                "auto_sized": self.truncation is None,
            }
        if self.sweeps:
            out["sweeps"] = [
                {"field": s.field, "values": list(s.values)} for s in self.sweeps
            ]
        return out


@dataclass(frozen=True)
class ColumnMeta:
    """Schema entry for one table column."""

    name: str
    unit: str = "dimensionless"
    backend: str | None = None
    may_be_undefined: bool = False


@dataclass
class ResultTable:
    """Row-major numeric results with schema and provenance metadata."""

    columns: list
    data: np.ndarray
    metadata: dict
    row_errors: list = field(default_factory=list)

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise ParameterError(
                f"data shape {self.data.shape} does not match {len(self.columns)} columns"
            )
        if not self.row_errors:
            self.row_errors = [""] * self.data.shape[0]
        if len(self.row_errors) != self.data.shape[0]:
            raise ParameterError("row_errors length must equal the number of rows")

    def column_names(self) -> list:
        return [c.name for c in self.columns]

    def column(self, name: str) -> np.ndarray:
        for k, c in enumerate(self.columns):
            if c.name == name:
                return self.data[:, k]
        raise KeyError(f"no column named {name!r}; have {self.column_names()}")


# ---------------------------------------------------------------------------
# propagator-matrix cache (shared across sweep rows with identical dynamics)

_MATS_CACHE: dict = {}
_MATS_LOCK = threading.Lock()


def _cached_moment_arrays(params: SystemParams, times: np.ndarray, init: GaussianState):
    """Moment propagation with a small cache on the propagator matrices.

    Sweep rows that share ``params`` and the time grid (for example a
    heatmap over initial conditions) reuse the propagator stack instead
    of rebuilding it per row.  Uniform grids are fully described by
    (size, first, last), which keys the cache together with the
    hashable parameter set.
    """
    key = (params, times.size, float(times[0]), float(times[-1]))
    with _MATS_LOCK:
        cached = _MATS_CACHE.get(key)
    if cached is None:
        from .semiclassical import ClassicalPropagator

        cached = ClassicalPropagator(params).matrix(times)
        with _MATS_LOCK:
            if len(_MATS_CACHE) > 8:
                _MATS_CACHE.clear()
            _MATS_CACHE[key] = cached
    means = np.einsum("tij,j->ti", cached, init.mean)
    covs = np.einsum("tij,jk,tlk->til", cached, init.cov, cached)
    return means, covs


# ---------------------------------------------------------------------------
# time-series backends: each produces a uniform "moment bundle" dict


def _bundle_from_moments(means: np.ndarray, covs: np.ndarray, kappa: float | None) -> dict:
    n_a, var_a, q_a = mode_statistics_arrays(means, covs, "light")
    n_b, var_b, q_b = mode_statistics_arrays(means, covs, "matter")
    return {
        "means": means,
        "covs": covs,
        "n_photon": n_a,
        "var_n_photon": var_a,
        "Q_photon": q_a,
        "n_matter": n_b,
        "var_n_matter": var_b,
        "Q_matter": q_b,
        "kappa": kappa,
    }


def _semiclassical_bundle(config: ScenarioConfig, times: np.ndarray) -> dict:
    means, covs = _cached_moment_arrays(config.params, times, config.initial_gaussian())
    return _bundle_from_moments(means, covs, None)


def _observables_to_bundle(obs_list: list, kappa: float | None) -> dict:
    nt = len(obs_list)
    means = np.empty((nt, 4))
    covs = np.zeros((nt, 4, 4))
    n_a = np.empty(nt)
    var_a = np.empty(nt)
    q_a = np.empty(nt)
    n_b = np.empty(nt)
    var_b = np.empty(nt)
    q_b = np.empty(nt)
    for k, o in enumerate(obs_list):
        means[k] = (o.mean_X, o.mean_P, o.mean_q, o.mean_p)
        covs[k, 0, 0] = o.X2 - o.mean_X**2
        covs[k, 1, 1] = o.P2 - o.mean_P**2
        covs[k, 0, 1] = covs[k, 1, 0] = o.XP_sym - o.mean_X * o.mean_P
        covs[k, 2, 2] = o.q2 - o.mean_q**2
        covs[k, 3, 3] = o.p2 - o.mean_p**2
        covs[k, 2, 3] = covs[k, 3, 2] = o.qp_sym - o.mean_q * o.mean_p
        n_a[k], var_a[k] = o.mean_n_photon, o.var_n_photon
        q_a[k] = math.nan if o.Q_photon is None else o.Q_photon
        n_b[k], var_b[k] = o.mean_n_matter, o.var_n_matter
        q_b[k] = math.nan if o.Q_matter is None else o.Q_matter
    return {
        "means": means,
        "covs": covs,
        "n_photon": n_a,
        "var_n_photon": var_a,
        "Q_photon": q_a,
        "n_matter": n_b,
        "var_n_matter": var_b,
        "Q_matter": q_b,
        "kappa": kappa,
    }


def _fock_bundle(config: ScenarioConfig, times: np.ndarray) -> dict:
    trunc = config.resolve_truncation()
    h = fock_mod.build_hamiltonian(config.params, trunc)
    psi0 = config.initial_fock(trunc)
    states = fock_mod.evolve_state(h, psi0, times)
    return _observables_to_bundle([fock_mod.measure(s) for s in states], None)


def _lindblad_bundle(config: ScenarioConfig, times: np.ndarray) -> dict:
    trunc = config.resolve_truncation()
    psi0 = config.initial_fock(trunc)
    traj = lindblad_mod.evolve_density(config.params, trunc, psi0, times)
    return _observables_to_bundle(traj.observables, config.params.kappa)


_BUNDLE_BUILDERS = {
    "semiclassical": _semiclassical_bundle,
    "fock": _fock_bundle,
    "lindblad": _lindblad_bundle,
}

_MEAN_INDEX = {"X": 0, "P": 1, "q": 2, "p": 3}
_SECOND_MOMENT = {
    "X2": (0, 0),
    "P2": (1, 1),
    "XP_sym": (0, 1),
    "q2": (2, 2),
    "p2": (3, 3),
    "qp_sym": (2, 3),
}


def _ellipse_arrays(bundle: dict, subsystem: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sl = slice(0, 2) if subsystem == "matter" else slice(2, 4)
    blocks = bundle["covs"][:, sl, sl]
    evals, evecs = np.linalg.eigh(blocks)
    evals = np.clip(evals, 0.0, None)
    major = np.sqrt(evals[:, 1])
    minor = np.sqrt(evals[:, 0])
    vx, vy = evecs[:, 0, 1], evecs[:, 1, 1]
    angle = np.arctan2(vy, vx)
    angle = np.where(angle <= -math.pi / 2.0, angle + math.pi, angle)
    angle = np.where(angle > math.pi / 2.0, angle - math.pi, angle)
    return major, minor, angle


def _series_for(name: str, bundle: dict, baseline: dict | None) -> np.ndarray:
    if name in _MEAN_INDEX:
        return bundle["means"][:, _MEAN_INDEX[name]]
    if name in _SECOND_MOMENT:
        i, j = _SECOND_MOMENT[name]
        return bundle["covs"][:, i, j] + bundle["means"][:, i] * bundle["means"][:, j]
    if name == "var_X":
        return bundle["covs"][:, 0, 0]
    if name in ("n_photon", "var_n_photon", "Q_photon", "n_matter", "var_n_matter", "Q_matter"):
        return bundle[name]
    if name == "delta_n_photon":
        if baseline is None:
            raise NumericError("baseline bundle missing for delta_n_photon")
        return bundle["n_photon"] - baseline["n_photon"]
    if name == "n_out":
        return bundle["kappa"] * bundle["n_photon"]
    if name == "Q_out":
        return bundle["kappa"] * bundle["Q_photon"]
    if name.startswith(("matter_", "light_")):
        subsystem, _, kind = name.partition("_")
        major, minor, angle = _ellipse_arrays(bundle, subsystem)
        return {"axis_major": major, "axis_minor": minor, "angle": angle}[kind]
    raise ParameterError(f"unknown time-series observable {name!r}")


def _needs_baseline(config: ScenarioConfig) -> bool:
    return config.scheme == "I" and "delta_n_photon" in config.observables


def _baseline_config(config: ScenarioConfig) -> ScenarioConfig:
    return replace(config, x0=0.0, w=1.0)


def _run_time_series(config: ScenarioConfig) -> ResultTable:
    spectrum = polariton_spectrum(config.params)
    times = config.grid.resolve(spectrum)
    columns = [ColumnMeta(name="t")]
    series = [times]
    for backend in config.backends:
        bundle = _BUNDLE_BUILDERS[backend](config, times)
        baseline = None
        if _needs_baseline(config):
            baseline = _BUNDLE_BUILDERS[backend](_baseline_config(config), times)
        for name in config.observables:
            columns.append(
                ColumnMeta(
                    name=f"{name}_{backend}",
                    backend=backend,
                    may_be_undefined=name in _MAY_BE_UNDEFINED,
                )
            )
            series.append(np.asarray(_series_for(name, bundle, baseline), dtype=float))
    data = np.column_stack(series)
    return ResultTable(columns=columns, data=data, metadata=_metadata(config, columns))


# ---------------------------------------------------------------------------
# scalar (sweep) observables


def _averaging_grid(spectrum: PolaritonSpectrum, periods: int) -> np.ndarray:
    """Uniform grid spanning the averaging window plus one extra sample.

    The extra sample keeps a full integer number of periods available
    even when the t = 0 sample must be trimmed (an undefined Mandel Q of
    an initially empty cavity, for example).
    """
    t_max = periods * require_finite_period(spectrum)
    dt = spectrum.carrier_period / SAMPLES_PER_CARRIER_PERIOD
    n_intervals = min(math.ceil(t_max / dt), MAX_GRID_POINTS - 2)
    grid = np.linspace(0.0, t_max, n_intervals + 1)
    return np.append(grid, t_max + grid[1])


def _sampled_average(values: np.ndarray, times: np.ndarray, period: float, periods: int) -> TimeAverage:
    return time_average(times, values, period, min_periods=min(3, periods))


def _fill_undefined(times: np.ndarray, series: np.ndarray):
    """Prepare a Mandel Q series for averaging despite undefined samples.

    Q is undefined wherever a mode holds essentially no quanta, which
    happens at isolated revival instants (and at t = 0 for an initially
    empty mode).  Isolated gaps are bridged by linear interpolation; a
    series that is undefined over half the window or more has no
    meaningful average and yields ``None``.
    """
    finite = np.isfinite(series)
    if finite.mean() < 0.5:
        return None
    if finite.all():
        return series
    return np.interp(times, times[finite], series[finite])


def _scalar_value(name: str, config: ScenarioConfig, cache: dict) -> float:
    params = config.params
    spectrum = cache.setdefault("spectrum", polariton_spectrum(params))

    if name in ("omega_plus", "omega_minus", "sigma_bar", "delta_bar", "beta", "period_T"):
        return float(getattr(spectrum, name))
    if name.endswith("_rwa") and name[: -len("_rwa")] in (
        "omega_plus",
        "omega_minus",
        "sigma_bar",
        "delta_bar",
        "beta",
        "period_T",
    ):
        key = "spectrum_rwa"
        if key not in cache:
            cache[key] = polariton_spectrum(params.replace(variant=ModelVariant.RWA))
        return float(getattr(cache[key], name[: -len("_rwa")]))

    if name == "delta_n_avg":
        return float(delta_n_time_average(params, config.x0, config.w))
    if name == "delta_n_avg_rwa":
        return float(
            delta_n_time_average(
                params.replace(variant=ModelVariant.RWA), config.x0, config.w
            )
        )
    if name == "scheme2_delta_n_avg":
        c_disp = math.sqrt(2.0) * abs(config.alpha)
        return float(delta_n_scheme2(params, c_disp))
    if name == "scheme2_delta_n_avg_over_C2":
        c_disp = math.sqrt(2.0) * abs(config.alpha)
        if c_disp == 0.0:
            raise ParameterError("scheme2_delta_n_avg_over_C2 requires alpha != 0")
        return float(delta_n_scheme2(params, c_disp)) / c_disp**2

    if name in ("n_photon_avg", "delta_n_avg_sampled", "Q_photon_avg", "Q_matter_avg", "Q_photon_min"):
        if "bundle" not in cache:
            times = _averaging_grid(spectrum, config.average_periods)
            cache["avg_times"] = times
            cache["bundle"] = _semiclassical_bundle(config, times)
        times, bundle = cache["avg_times"], cache["bundle"]
        if name == "Q_photon_min":
            values = bundle["Q_photon"]
            if not np.isfinite(values).any():
                return math.nan
            return float(np.nanmin(values))
        if name == "n_photon_avg":
            series = bundle["n_photon"]
        elif name == "delta_n_avg_sampled":
            if "baseline" not in cache:
                cache["baseline"] = _semiclassical_bundle(_baseline_config(config), times)
            series = bundle["n_photon"] - cache["baseline"]["n_photon"]
        elif name == "Q_photon_avg":
            series = _fill_undefined(times, bundle["Q_photon"])
        else:
            series = _fill_undefined(times, bundle["Q_matter"])
        if series is None:
            return math.nan
        return _sampled_average(series, times, spectrum.period_T, config.average_periods).value

    if name == "T_extracted":
        t_max = 2.5 * require_finite_period(spectrum)
        grid = TimeGridSpec(t_max=t_max).resolve(spectrum)
        bundle = _semiclassical_bundle(config, grid)
        return extract_beating_period(grid, bundle["means"][:, 0], spectrum)

    raise ParameterError(f"unknown scalar observable {name!r}")


def _run_sweep(config: ScenarioConfig, jobs: int = 1) -> ResultTable:
    axes = config.sweeps
    grids = [axis.values for axis in axes]
    index_grid = [()]
    for values in grids:
        index_grid = [prefix + (v,) for prefix in index_grid for v in values]

    columns = [ColumnMeta(name=axis.field) for axis in axes]
    for name in config.observables:
        backend = "semiclassical" if name in (
            "n_photon_avg",
            "delta_n_avg_sampled",
            "Q_photon_avg",
            "Q_matter_avg",
            "Q_photon_min",
            "T_extracted",
        ) else None
        columns.append(
            ColumnMeta(name=name, backend=backend, may_be_undefined=name in _MAY_BE_UNDEFINED)
        )

    def compute_row(point: tuple) -> tuple[list, str]:
        cells = list(point)
        try:
            row_config = config
            for axis, value in zip(axes, point):
                row_config = row_config.with_value(axis.field, value)
            cache: dict = {}
            for name in config.observables:
                cells.append(_scalar_value(name, row_config, cache))
            return cells, ""
        except CavityDynError as exc:
            cells = list(point) + [math.nan] * len(config.observables)
            return cells, f"{type(exc).__name__}: {exc}"

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(compute_row, index_grid))
    else:
        results = [compute_row(point) for point in index_grid]

    data = np.array([cells for cells, _ in results], dtype=float)
    row_errors = [err for _, err in results]
    return ResultTable(
        columns=columns,
        data=data,
        metadata=_metadata(config, columns),
        row_errors=row_errors,
    )


def _metadata(config: ScenarioConfig, columns: list) -> dict:
    from . import __version__

    return {
        "package": "cavitydyn",
        "version": __version__,
        "resolved_config": config.resolved(),
        "determinism": "fully deterministic: no random numbers, no environment dependence",
        "tolerances": {
            "mandel_q_defined_above_mean_n": 1e-12,
            "degeneracy_eps": 1e-12,
            "stability_tol": 1e-10,
        },
        "columns": [
            {
                "name": c.name,
                "unit": c.unit,
                "backend": c.backend,
                "may_be_undefined": c.may_be_undefined,
            }
            for c in columns
        ],
    }


def run_scenario(config: ScenarioConfig, jobs: int = 1) -> ResultTable:
    """Execute a scenario and assemble its result table.

    Time-series configs produce a ``t`` column followed by one column
    per (observable, backend) pair.  Scalar-observable configs produce
    one row per sweep grid point (a single row when no sweep axis is
    set), leading with the swept field values; a per-row ``error`` field
    records failures without aborting the sweep.
    """
    if config.is_tabular():
        return _run_sweep(config, jobs=jobs)
    return _run_time_series(config)


def sweep(config: ScenarioConfig, dotted_field: str, values, jobs: int = 1) -> ResultTable:
    """Sweep one scalar config field over the given values."""
    axis = SweepSpec(field=dotted_field, values=tuple(values))
    return run_scenario(replace(config, sweeps=(axis,)), jobs=jobs)


# ---------------------------------------------------------------------------
# extraction routines


def extract_beating_period(times, values, spectrum_hint: PolaritonSpectrum) -> float:
    """Estimate the beat period of a sampled collective-coordinate series.

    The series is demodulated at the carrier frequency sigma_bar/2,
    low-pass filtered over one carrier period, and the beat period is
    read off as twice the mean spacing of the envelope zero crossings.
    A spectrum hint supplies the carrier frequency and the expected
    period scale; the sampled span must cover at least two expected
    periods.
    """
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ts.shape != vs.shape or ts.ndim != 1 or ts.size < 16:
        raise ParameterError("times and values must be equal-length 1-d arrays")
    t_hint = require_finite_period(spectrum_hint)
    span = ts[-1] - ts[0]
    if span < 2.0 * t_hint:
        raise InsufficientSpan(
            f"series spans {span:g} but at least two expected periods "
            f"({2 * t_hint:g}) are required"
        )
    steps = np.diff(ts)
    dt = float(steps[0])
    if np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise ParameterError("time grid must be uniform for period extraction")

    demod = vs * np.exp(-1j * spectrum_hint.sigma_bar * ts / 2.0)
    window = max(3, int(round(spectrum_hint.carrier_period / dt)))
    kernel = np.ones(window) / window
    # Two smoothing passes: the image sidebands left by demodulation sit
    # near the carrier frequency but not exactly on the boxcar nulls, so
    # a single pass leaves a bias that grows with the splitting.
    smoothed = np.convolve(np.convolve(demod, kernel, mode="same"), kernel, mode="same")
    envelope = smoothed.real
    # Discard the filter edge transients before locating crossings.
    guard = window + window // 2
    env = envelope[guard:-guard]
    t_env = ts[guard:-guard]

    sign_flip = np.where(env[:-1] * env[1:] < 0.0)[0]
    crossings = []
    for idx in sign_flip:
        frac = env[idx] / (env[idx] - env[idx + 1])
        t_cross = t_env[idx] + frac * (t_env[idx + 1] - t_env[idx])
        if crossings and t_cross - crossings[-1] < spectrum_hint.carrier_period:
            continue
        crossings.append(t_cross)
    if len(crossings) < 2:
        raise InsufficientSpan(
            "fewer than two envelope zero crossings found; "
            "extend the series or refine the sampling"
        )
    return float(2.0 * np.mean(np.diff(crossings)))


@dataclass(frozen=True)
class DecayFit:
    """Log-linear fit of a decaying oscillation envelope."""

    rate: float
    log_amplitude: float
    n_windows: int


def fit_decay_envelope(times, values, window: float) -> DecayFit:
    """Fit an exponential decay rate to the envelope of an oscillating series.

    The series is split into consecutive windows of the given length
    (typically half the beat period, so each window contains one
    envelope maximum); the windowed maxima are fitted log-linearly
    against their times.  Returns the decay rate (positive for decay).
    """
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ts.shape != vs.shape or ts.ndim != 1 or ts.size < 8:
        raise ParameterError("times and values must be equal-length 1-d arrays")
    if not (window > 0 and math.isfinite(window)):
        raise ParameterError(f"window must be positive and finite, got {window!r}")
    n_windows = int(math.floor((ts[-1] - ts[0]) / window + 1e-9))
    if n_windows < 3:
        raise InsufficientSpan(
            f"series spans {n_windows} full windows; at least 3 are required"
        )
    peak_times = []
    peak_values = []
    for k in range(n_windows):
        lo, hi = ts[0] + k * window, ts[0] + (k + 1) * window
        inside = (ts >= lo) & (ts < hi)
        if not inside.any():
            raise InsufficientSpan("a fitting window contains no samples")
        local = vs[inside]
        arg = int(np.argmax(local))
        peak_values.append(float(local[arg]))
        peak_times.append(float(ts[inside][arg]))
    if min(peak_values) <= 0:
        raise NumericError("envelope maxima must be positive for a log-linear fit")
    slope, intercept = np.polyfit(peak_times, np.log(peak_values), 1)
    return DecayFit(rate=float(-slope), log_amplitude=float(intercept), n_windows=n_windows)

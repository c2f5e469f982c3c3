"""Command-line interface: configs in, tables out.

Subcommands
-----------
spectrum    print normal-mode frequencies, splitting, beat period, and
            the mixing coefficient for a parameter set
evolve      run a time-series scenario directly from flags
scenario    run a scenario config file (or packaged scenario by name)
sweep       run a scenario with one or two sweep axes
validate    run the built-in invariant suite and report pass/fail counts

Config file schema (INI syntax)
-------------------------------
[scenario]  name, scheme (I or II), backends (comma list), observables
            (comma list), average_periods
[params]    gamma, lambda, variant (full | no_diamagnetic | rwa), kappa
[initial]   x0 and w (scheme I), or alpha_re and alpha_im (scheme II)
[grid]      t_max or periods; optionally n_points or dt
[truncation] n_matter_max, n_photon_max, leak_tolerance
[sweep]     field (dotted config path), values ("start:stop:count" or a
            comma list); [sweep2] adds a second axis

Unknown sections or keys are errors.  Every generated output file is
accompanied by a ``<file>.meta.json`` sidecar holding the fully
resolved configuration, column schema, and tolerances.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 truncation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .core import ModelVariant, SystemParams, polariton_spectrum
from .errors import (
    CavityDynError,
    ConfigError,
    NumericError,
    ParameterError,
    TruncationError,
)
from .experiments import (
    ColumnMeta,
    ResultTable,
    ScenarioConfig,
    SweepSpec,
    TimeGridSpec,
    run_scenario,
)
from .fock import Truncation

__all__ = [
    "parse_config",
    "load_scenario",
    "packaged_scenarios",
    "write_table",
    "read_table",
    "run_validation_suite",
    "main",
]

_SCHEMA = {
    "scenario": ("name", "scheme", "backends", "observables", "average_periods"),
    "params": ("gamma", "lambda", "variant", "kappa"),
    "initial": ("x0", "w", "alpha_re", "alpha_im"),
    "grid": ("t_max", "periods", "n_points", "dt"),
    "truncation": ("n_matter_max", "n_photon_max", "leak_tolerance"),
    "sweep": ("field", "values"),
    "sweep2": ("field", "values"),
}


# ---------------------------------------------------------------------------
# config parsing


def _coerce(section: str, key: str, raw: str, kind):
    try:
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"[{section}] {key}: cannot interpret {raw!r} ({exc})"
        ) from None


def _parse_value_list(section: str, raw: str) -> tuple:
    """Sweep values: either ``start:stop:count`` or a comma list."""
    text = raw.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"[{section}] values: expected start:stop:count, got {raw!r}"
            )
        start = _coerce(section, "values", parts[0], float)
        stop = _coerce(section, "values", parts[1], float)
        count = _coerce(section, "values", parts[2], int)
        if count < 1:
            raise ConfigError(f"[{section}] values: count must be >= 1, got {count}")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    values = tuple(
        _coerce(section, "values", tok.strip(), float)
        for tok in text.split(",")
        if tok.strip()
    )
    if not values:
        raise ConfigError(f"[{section}] values: no values given in {raw!r}")
    return values


def _parse_name_list(raw: str) -> tuple:
    return tuple(tok.strip() for tok in raw.split(",") if tok.strip())


def parse_config(text: str, origin: str = "<config>") -> ScenarioConfig:
    """Parse and validate scenario config text into a :class:`ScenarioConfig`.

    All defaults are applied here, so the returned config (and hence the
    metadata sidecar) records every effective setting.  Unknown sections
    or keys raise :class:`ConfigError` naming the offending entry.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"{origin}: unknown section [{section}]; expected one of "
                + ", ".join(f"[{s}]" for s in _SCHEMA)
            )
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"{origin}: unknown key {key!r} in section [{section}]; "
                    f"expected one of: " + ", ".join(_SCHEMA[section])
                )

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    if not parser.has_section("params"):
        raise ConfigError(f"{origin}: missing required section [params]")
    for required in ("gamma", "lambda"):
        if get("params", required) is None:
            raise ConfigError(f"{origin}: [params] {required} is required")

    params = SystemParams(
        gamma=_coerce("params", "gamma", get("params", "gamma"), float),
        lam=_coerce("params", "lambda", get("params", "lambda"), float),
        variant=ModelVariant.parse(get("params", "variant", "full")),
        kappa=_coerce("params", "kappa", get("params", "kappa", "0"), float),
    )

    scheme = get("scenario", "scheme", "I").strip()
    name = get("scenario", "name", "scenario").strip()
    backends = _parse_name_list(get("scenario", "backends", "semiclassical"))
    observables = _parse_name_list(get("scenario", "observables", "X"))
    average_periods = _coerce(
        "scenario", "average_periods", get("scenario", "average_periods", "5"), int
    )

    x0 = w = alpha = None
    if scheme == "II":
        alpha_re = _coerce("initial", "alpha_re", get("initial", "alpha_re", "0"), float)
        alpha_im = _coerce("initial", "alpha_im", get("initial", "alpha_im", "0"), float)
        alpha = complex(alpha_re, alpha_im)
        for key in ("x0", "w"):
            if get("initial", key) is not None:
                raise ConfigError(f"{origin}: [initial] {key} is a scheme I key")
    else:
        if get("initial", "x0") is None or get("initial", "w") is None:
            raise ConfigError(f"{origin}: scheme I requires [initial] x0 and w")
        x0 = _coerce("initial", "x0", get("initial", "x0"), float)
        w = _coerce("initial", "w", get("initial", "w"), float)
        for key in ("alpha_re", "alpha_im"):
            if get("initial", key) is not None:
                raise ConfigError(f"{origin}: [initial] {key} is a scheme II key")

    sweeps = []
    for section in ("sweep", "sweep2"):
        if parser.has_section(section):
            field_name = get(section, "field")
            raw_values = get(section, "values")
            if field_name is None or raw_values is None:
                raise ConfigError(
                    f"{origin}: section [{section}] requires both field and values"
                )
            sweeps.append(
                SweepSpec(field=field_name.strip(), values=_parse_value_list(section, raw_values))
            )
    if parser.has_section("sweep2") and not parser.has_section("sweep"):
        raise ConfigError(f"{origin}: [sweep2] given without [sweep]")

    grid = None
    if parser.has_section("grid"):
        grid = TimeGridSpec(
            t_max=(
                None
                if get("grid", "t_max") is None
                else _coerce("grid", "t_max", get("grid", "t_max"), float)
            ),
            periods=(
                None
                if get("grid", "periods") is None
                else _coerce("grid", "periods", get("grid", "periods"), float)
            ),
            n_points=(
                None
                if get("grid", "n_points") is None
                else _coerce("grid", "n_points", get("grid", "n_points"), int)
            ),
            dt=(
                None
                if get("grid", "dt") is None
                else _coerce("grid", "dt", get("grid", "dt"), float)
            ),
        )
    elif not sweeps:
        grid = TimeGridSpec(periods=2.0)

    truncation = None
    if parser.has_section("truncation"):
        truncation = Truncation(
            n_matter_max=_coerce(
                "truncation", "n_matter_max", get("truncation", "n_matter_max", "24"), int
            ),
            n_photon_max=_coerce(
                "truncation", "n_photon_max", get("truncation", "n_photon_max", "24"), int
            ),
            leak_tolerance=_coerce(
                "truncation", "leak_tolerance", get("truncation", "leak_tolerance", "1e-8"), float
            ),
        )

    return ScenarioConfig(
        name=name,
        scheme=scheme,
        params=params,
        x0=x0,
        w=w,
        alpha=alpha,
        grid=grid,
        truncation=truncation,
        backends=backends,
        observables=observables,
        sweeps=tuple(sweeps),
        average_periods=average_periods,
    )


def packaged_scenarios() -> list:
    """Names of the scenario configs shipped inside the package."""
    from importlib import resources

    root = resources.files("cavitydyn") / "scenarios"
    return sorted(
        entry.name[: -len(".cfg")]
        for entry in root.iterdir()
        if entry.name.endswith(".cfg")
    )


def load_scenario(ref: str, overrides=()) -> ScenarioConfig:
    """Load a scenario from a file path or a packaged scenario name.

    ``overrides`` are ``section.key=value`` strings applied on top of
    the file before validation.
    """
    path = Path(ref)
    if path.is_file():
        text, origin = path.read_text(), str(path)
    else:
        from importlib import resources

        stem = ref[: -len(".cfg")] if ref.endswith(".cfg") else ref
        candidate = resources.files("cavitydyn") / "scenarios" / f"{stem}.cfg"
        if not candidate.is_file():
            raise ConfigError(
                f"no config file or packaged scenario named {ref!r}; "
                "packaged scenarios: " + ", ".join(packaged_scenarios())
            )
        text, origin = candidate.read_text(), f"packaged:{stem}"
    if overrides:
        text = _apply_overrides(text, overrides, origin)
    return parse_config(text, origin=origin)


def _apply_overrides(text: str, overrides, origin: str) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(
                f"override {item!r} must look like section.key=value"
            )
        target, value = item.split("=", 1)
        section, _, key = target.strip().partition(".")
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(
                f"override {item!r} names unknown config field {section}.{key}"
            )
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value.strip())
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# table serialization


def _render_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    if math.isnan(value):
        return ""
    return repr(float(value))


def write_table(table: ResultTable, path, fmt: str = "csv") -> list:
    """Write a table plus its metadata sidecar; returns the paths written."""
    path = Path(path)
    written = []
    has_errors = any(table.row_errors)
    include_error_column = has_errors or bool(
        table.metadata.get("resolved_config", {}).get("sweeps")
    )
    if fmt == "csv":
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            header = table.column_names()
            if include_error_column:
                header = header + ["error"]
            writer.writerow(header)
            for k in range(table.data.shape[0]):
                row = [_render_float(v) for v in table.data[k]]
                if include_error_column:
                    row.append(table.row_errors[k])
                writer.writerow(row)
    elif fmt == "json":
        payload = {
            "columns": table.column_names(),
            "data": [
                [None if math.isnan(v) else float(v) for v in row]
                for row in table.data
            ],
            "metadata": table.metadata,
        }
        if include_error_column:
            payload["row_errors"] = list(table.row_errors)
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}; expected csv or json")
    written.append(path)
    sidecar = Path(str(path) + ".meta.json")
    sidecar.write_text(json.dumps(table.metadata, indent=2) + "\n")
    written.append(sidecar)
    return written


def _columns_from_metadata(names, metadata) -> list:
    by_name = {c["name"]: c for c in metadata.get("columns", [])} if metadata else {}
    columns = []
    for name in names:
        meta = by_name.get(name)
        if meta:
            columns.append(
                ColumnMeta(
                    name=meta["name"],
                    unit=meta.get("unit", "dimensionless"),
                    backend=meta.get("backend"),
                    may_be_undefined=bool(meta.get("may_be_undefined", False)),
                )
            )
        else:
            columns.append(ColumnMeta(name=name))
    return columns


def read_table(path) -> ResultTable:
    """Read a table written by :func:`write_table` (CSV or JSON)."""
    path = Path(path)
    sidecar = Path(str(path) + ".meta.json")
    metadata = json.loads(sidecar.read_text()) if sidecar.is_file() else {}
    if path.suffix == ".json":
        payload = json.loads(path.read_text())
        names = payload["columns"]
        data = np.array(
            [[math.nan if v is None else float(v) for v in row] for row in payload["data"]],
            dtype=float,
        ).reshape(-1, len(names))
        return ResultTable(
            columns=_columns_from_metadata(names, payload.get("metadata", metadata)),
            data=data,
            metadata=payload.get("metadata", metadata),
            row_errors=list(payload.get("row_errors", [])),
        )
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ConfigError(f"{path}: empty table file")
    names = rows[0]
    has_error_column = bool(names) and names[-1] == "error"
    if has_error_column:
        names = names[:-1]
    data = []
    row_errors = []
    for row in rows[1:]:
        cells = row[:-1] if has_error_column else row
        data.append([math.nan if cell == "" else float(cell) for cell in cells])
        if has_error_column:
            row_errors.append(row[-1])
    return ResultTable(
        columns=_columns_from_metadata(names, metadata),
        data=np.array(data, dtype=float).reshape(-1, len(names)),
        metadata=metadata,
        row_errors=row_errors,
    )


# ---------------------------------------------------------------------------
# validation suite


def _check(name, fn):
    try:
        detail = fn()
        return (name, True, detail or "ok")
    except AssertionError as exc:
        return (name, False, str(exc) or "assertion failed")
    except CavityDynError as exc:
        return (name, False, f"{type(exc).__name__}: {exc}")


def run_validation_suite() -> list:
    """Fast self-contained invariant checks; returns (name, ok, detail) rows."""
    from . import fock as fock_mod
    from .core import drift_matrix
    from .semiclassical import (
        J_CANONICAL,
        ClassicalPropagator,
        GaussianState,
        f_functions,
        propagate_moments,
    )

    rng = np.random.default_rng(20240811)
    checks = []

    def spectrum_identities():
        worst = 0.0
        for gamma in (0.5, 0.8, 1.0, 1.3, 2.0):
            for lam in (0.01, 0.1, 0.3, 0.8):
                s = polariton_spectrum(SystemParams(gamma=gamma, lam=lam))
                worst = max(
                    worst,
                    abs(s.omega_plus**2 * s.omega_minus**2 - gamma**2),
                    abs(s.omega_plus**2 + s.omega_minus**2 - (1 + gamma**2 + gamma * lam**2)),
                )
        assert worst < 1e-10, f"frequency product/sum identity violated by {worst:.2e}"
        return f"max deviation {worst:.2e}"

    def resonance_splitting():
        worst = max(
            abs(polariton_spectrum(SystemParams(gamma=1.0, lam=lam)).delta_bar - lam)
            for lam in (0.01, 0.05, 0.2, 0.5)
        )
        assert worst < 1e-12, f"splitting at resonance deviates from lambda by {worst:.2e}"
        return f"max |delta_bar - lambda| = {worst:.2e}"

    def symplectic_form():
        worst = 0.0
        for _ in range(20):
            params = SystemParams(
                gamma=float(rng.uniform(0.5, 2.0)), lam=float(rng.uniform(0.0, 0.8))
            )
            t = np.array([float(rng.uniform(0.0, 50.0))])
            m = ClassicalPropagator(params).matrix(t)[0]
            worst = max(worst, float(np.max(np.abs(m.T @ J_CANONICAL @ m - J_CANONICAL))))
        assert worst < 1e-9, f"propagator departs from symplectic form by {worst:.2e}"
        return f"max |M^T J M - J| = {worst:.2e}"

    def closed_form_matrix_agreement():
        from scipy.linalg import expm

        worst = 0.0
        for _ in range(10):
            params = SystemParams(
                gamma=float(rng.uniform(0.5, 2.0)), lam=float(rng.uniform(0.01, 0.8))
            )
            t = float(rng.uniform(0.1, 30.0))
            row = np.array(f_functions(params, np.array([t]))).ravel()
            m = expm(drift_matrix(params) * t)
            worst = max(worst, float(np.max(np.abs(row - m[0]))))
        assert worst < 1e-8, f"mean-motion closed form deviates by {worst:.2e}"
        return f"max deviation {worst:.2e}"

    def covariance_invariants():
        worst_det = 0.0
        worst_heis = 0.0
        for _ in range(10):
            params = SystemParams(
                gamma=float(rng.uniform(0.5, 2.0)), lam=float(rng.uniform(0.0, 0.8))
            )
            state = GaussianState.scheme1(float(rng.uniform(0.0, 4.0)), float(rng.uniform(0.4, 2.0)))
            times = np.linspace(0.0, 40.0, 97)
            _, covs = propagate_moments(state, params, times)
            dets = np.linalg.det(covs)
            worst_det = max(worst_det, float(np.max(np.abs(dets - dets[0]))))
            for sl in (slice(0, 2), slice(2, 4)):
                block_dets = np.linalg.det(covs[:, sl, sl])
                worst_heis = max(worst_heis, float(np.max(0.25 - block_dets)))
        assert worst_det < 1e-9, f"total covariance determinant drifts by {worst_det:.2e}"
        assert worst_heis < 1e-9, f"uncertainty product falls below bound by {worst_heis:.2e}"
        return f"det drift {worst_det:.2e}, bound margin {worst_heis:.2e}"

    def rwa_excitation_conservation():
        params = SystemParams(gamma=1.1, lam=0.3, variant=ModelVariant.RWA)
        trunc = Truncation(n_matter_max=14, n_photon_max=14)
        h = fock_mod.build_hamiltonian(params, trunc)
        psi0 = fock_mod.prepare_scheme2(1.0 + 0.5j, trunc)
        times = np.linspace(0.0, 8.0, 33)
        states = fock_mod.evolve_state(h, psi0, times)
        totals = [fock_mod.measure(s).mean_n_total for s in states]
        drift = max(abs(n - totals[0]) for n in totals)
        assert drift < 1e-9, f"total excitation number drifts by {drift:.2e}"
        return f"excitation drift {drift:.2e}"

    def backend_mean_agreement():
        params = SystemParams(gamma=1.0, lam=0.2)
        trunc = Truncation(n_matter_max=18, n_photon_max=14)
        h = fock_mod.build_hamiltonian(params, trunc)
        psi0 = fock_mod.prepare_scheme1(1.0, 0.8, trunc)
        times = np.linspace(0.0, 10.0, 41)
        states = fock_mod.evolve_state(h, psi0, times)
        means, _ = propagate_moments(GaussianState.scheme1(1.0, 0.8), params, times)
        worst = max(
            abs(fock_mod.measure(s).mean_X - means[k, 0]) for k, s in enumerate(states)
        )
        assert worst < 1e-6, f"mean positions disagree by {worst:.2e}"
        return f"max |<X>_fock - <X>_gaussian| = {worst:.2e}"

    def rwa_domain_guard():
        try:
            SystemParams(gamma=0.01, lam=0.5, variant=ModelVariant.RWA)
        except ParameterError:
            return "rejected lambda^2 >= 4*gamma as required"
        raise AssertionError("rotating-wave variant accepted outside its validity domain")

    def averaging_exactness():
        from .fock import time_average

        times = np.linspace(0.0, 11.3 * 2 * math.pi, 40_001)
        values = np.cos(times) ** 2
        result = time_average(times, values, 2 * math.pi)
        assert abs(result.value - 0.5) < 1e-9, f"periodic average off by {result.value - 0.5:.2e}"
        return f"cos^2 average error {abs(result.value - 0.5):.2e}"

    for name, fn in (
        ("spectrum_identities", spectrum_identities),
        ("resonance_splitting", resonance_splitting),
        ("symplectic_form", symplectic_form),
        ("closed_form_matrix_agreement", closed_form_matrix_agreement),
        ("covariance_invariants", covariance_invariants),
        ("rwa_excitation_conservation", rwa_excitation_conservation),
        ("backend_mean_agreement", backend_mean_agreement),
        ("rwa_domain_guard", rwa_domain_guard),
        ("averaging_exactness", averaging_exactness),
    ):
        checks.append(_check(name, fn))
    return checks


# ---------------------------------------------------------------------------
# subcommand implementations


def _output_path(args, config_name: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(args.out_dir) / f"{config_name}.{args.format}"


def _emit(table: ResultTable, args, config_name: str) -> None:
    path = _output_path(args, config_name)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = write_table(table, path, fmt=args.format)
    for p in written:
        print(f"wrote {p}")
    failed = sum(1 for e in table.row_errors if e)
    if failed:
        print(f"note: {failed} of {len(table.row_errors)} sweep rows recorded errors")


def _cmd_spectrum(args) -> int:
    params = SystemParams(
        gamma=args.gamma, lam=args.lam, variant=ModelVariant.parse(args.variant)
    )
    spectrum = polariton_spectrum(params)
    fields = {
        "omega_plus": spectrum.omega_plus,
        "omega_minus": spectrum.omega_minus,
        "sigma_bar": spectrum.sigma_bar,
        "delta_bar": spectrum.delta_bar,
        "beta": spectrum.beta,
        "period_T": spectrum.period_T,
    }
    if args.json:
        print(json.dumps(fields, indent=2))
    else:
        for key, value in fields.items():
            print(f"{key} = {_render_float(value) or 'nan'}")
    return 0


def _cmd_evolve(args) -> int:
    if (args.t_max is None) == (args.periods is None):
        raise ConfigError("specify exactly one of --t-max or --periods")
    grid = TimeGridSpec(
        t_max=args.t_max, periods=args.periods, n_points=args.n_points, dt=args.dt
    )
    params = SystemParams(
        gamma=args.gamma,
        lam=args.lam,
        variant=ModelVariant.parse(args.variant),
        kappa=args.kappa,
    )
    truncation = None
    if args.n_matter_max is not None or args.n_photon_max is not None:
        if args.n_matter_max is None or args.n_photon_max is None:
            raise ConfigError("give both --n-matter-max and --n-photon-max or neither")
        truncation = Truncation(
            n_matter_max=args.n_matter_max,
            n_photon_max=args.n_photon_max,
            leak_tolerance=args.leak_tolerance,
        )
    alpha = None
    x0 = w = None
    if args.scheme == "II":
        alpha = complex(args.alpha_re, args.alpha_im)
    else:
        if args.x0 is None or args.w is None:
            raise ConfigError("scheme I requires --x0 and --w")
        x0, w = args.x0, args.w
    config = ScenarioConfig(
        name=args.name,
        scheme=args.scheme,
        params=params,
        x0=x0,
        w=w,
        alpha=alpha,
        grid=grid,
        truncation=truncation,
        backends=_parse_name_list(args.backends),
        observables=_parse_name_list(args.observables),
        average_periods=args.average_periods,
    )
    table = run_scenario(config, jobs=args.jobs)
    _emit(table, args, config.name)
    return 0


def _cmd_scenario(args) -> int:
    if args.list:
        for name in packaged_scenarios():
            print(name)
        return 0
    if args.config is None:
        raise ConfigError("a config path or packaged scenario name is required")
    config = load_scenario(args.config, overrides=args.set or ())
    table = run_scenario(config, jobs=args.jobs)
    _emit(table, args, config.name)
    return 0


def _cmd_sweep(args) -> int:
    overrides = list(args.set or ())
    if args.field is not None:
        if args.values is None:
            raise ConfigError("--field requires --values")
        overrides += [f"sweep.field={args.field}", f"sweep.values={args.values}"]
    if args.field2 is not None:
        if args.values2 is None:
            raise ConfigError("--field2 requires --values2")
        overrides += [f"sweep2.field={args.field2}", f"sweep2.values={args.values2}"]
    config = load_scenario(args.config, overrides=overrides)
    if not config.sweeps:
        raise ConfigError(
            "sweep requires a [sweep] section in the config or --field/--values"
        )
    table = run_scenario(config, jobs=args.jobs)
    _emit(table, args, config.name)
    return 0


def _cmd_validate(args) -> int:
    checks = run_validation_suite()
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    passed = sum(1 for _, ok, _ in checks if ok)
    failed = len(checks) - passed
    print(f"{passed} passed, {failed} failed")
    if failed:
        raise NumericError(f"{failed} invariant check(s) failed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _add_output_options(sub) -> None:
    sub.add_argument("--out", default=None, help="explicit output file path")
    sub.add_argument(
        "--out-dir", default=".", help="output directory (default: current directory)"
    )
    sub.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )
    sub.add_argument(
        "--jobs", type=int, default=1, help="parallel workers for sweep rows"
    )


def _add_machine_flag(sub) -> None:
    sub.add_argument(
        "--machine",
        action="store_true",
        help="report errors as JSON on stderr",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitydyn",
        description="Dynamics of a collectively coupled cavity system, from config to table.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sp = subs.add_parser("spectrum", help="print normal-mode data for a parameter set")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--variant", default="full")
    sp.add_argument("--json", action="store_true", help="print as JSON")
    _add_machine_flag(sp)
    sp.set_defaults(func=_cmd_spectrum)

    ev = subs.add_parser("evolve", help="run a time-series scenario from flags")
    ev.add_argument("--gamma", type=float, required=True)
    ev.add_argument("--lambda", dest="lam", type=float, required=True)
    ev.add_argument("--variant", default="full")
    ev.add_argument("--kappa", type=float, default=0.0)
    ev.add_argument("--scheme", choices=("I", "II"), default="I")
    ev.add_argument("--x0", type=float, default=None)
    ev.add_argument("--w", type=float, default=None)
    ev.add_argument("--alpha-re", type=float, default=0.0)
    ev.add_argument("--alpha-im", type=float, default=0.0)
    ev.add_argument("--t-max", type=float, default=None)
    ev.add_argument("--periods", type=float, default=None)
    ev.add_argument("--n-points", type=int, default=None)
    ev.add_argument("--dt", type=float, default=None)
    ev.add_argument("--backends", default="semiclassical")
    ev.add_argument("--observables", default="X")
    ev.add_argument("--average-periods", type=int, default=5)
    ev.add_argument("--n-matter-max", type=int, default=None)
    ev.add_argument("--n-photon-max", type=int, default=None)
    ev.add_argument("--leak-tolerance", type=float, default=1e-8)
    ev.add_argument("--name", default="evolve")
    _add_output_options(ev)
    _add_machine_flag(ev)
    ev.set_defaults(func=_cmd_evolve)

    sc = subs.add_parser("scenario", help="run a scenario config file")
    sc.add_argument("config", nargs="?", default=None, help="path or packaged name")
    sc.add_argument(
        "--set",
        action="append",
        metavar="SECTION.KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    sc.add_argument("--list", action="store_true", help="list packaged scenarios")
    _add_output_options(sc)
    _add_machine_flag(sc)
    sc.set_defaults(func=_cmd_scenario)

    sw = subs.add_parser("sweep", help="run a scenario with sweep axes")
    sw.add_argument("config", help="path or packaged name")
    sw.add_argument("--field", default=None, help="swept config field (dotted)")
    sw.add_argument("--values", default=None, help="start:stop:count or comma list")
    sw.add_argument("--field2", default=None)
    sw.add_argument("--values2", default=None)
    sw.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    _add_output_options(sw)
    _add_machine_flag(sw)
    sw.set_defaults(func=_cmd_sweep)

    va = subs.add_parser("validate", help="run the built-in invariant suite")
    _add_machine_flag(va)
    va.set_defaults(func=_cmd_validate)

    return parser


def _exit_code(exc: CavityDynError) -> int:
    if isinstance(exc, TruncationError):
        return 4
    if isinstance(exc, (ConfigError, ParameterError)):
        return 2
    return 3


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CavityDynError as exc:
        code = _exit_code(exc)
        if getattr(args, "machine", False):
            report = {
                "error": type(exc).__name__,
                "message": str(exc),
                "exit_code": code,
            }
            print(json.dumps(report), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

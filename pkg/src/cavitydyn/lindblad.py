"""Open-cavity dynamics: density-matrix evolution with photon loss.

The cavity couples to a zero-temperature bath, so the density matrix
obeys a master equation with a single photon-annihilation jump channel
at rate ``kappa``:

    d rho/dt = -i [H, rho] + (kappa/2) (2 a rho a^dag - n_a rho - rho n_a)

The integrator is a fixed-step classic Runge-Kutta scheme on the full
density matrix.  The Hamiltonian and loss anticommutator are folded into
a single non-Hermitian generator G = H - i (kappa/2) n_a, so one step
needs only three sparse-dense products.  The right-hand side maps
Hermitian matrices to Hermitian matrices exactly, hence hermiticity is
preserved; trace drift is monitored at every output time and positivity
can be checked on demand.  Output times are always hit exactly: each
interval between requested times is subdivided into an integer number of
equal steps no longer than the step bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .core import SystemParams, polariton_spectrum
from .errors import DimensionMismatch, ParameterError, StepTooLarge
from .fock import FockState, QuantumObservables, Truncation, assemble_observables, build_hamiltonian

__all__ = [
    "LindbladTrajectory",
    "OutputFieldObservables",
    "default_step_bound",
    "evolve_density",
    "measure_density",
    "density_diagnostics",
    "output_field_observables",
]

#: Number of integrator steps per relevant timescale in the default bound.
_STEPS_PER_TIMESCALE = 200


def default_step_bound(params: SystemParams) -> float:
    """Default maximum integrator step.

    Resolves both the fast carrier oscillation (period 2 pi / sigma_bar)
    and, for lossy systems, the decay timescale 1/kappa, with
    :data:`_STEPS_PER_TIMESCALE` steps per timescale.
    """
    spec = polariton_spectrum(params)
    scale = 2.0 * math.pi / spec.sigma_bar
    if params.kappa > 0:
        scale = min(scale, 1.0 / params.kappa)
    return scale / _STEPS_PER_TIMESCALE


def _reduced_density_matrices(rho: np.ndarray, trunc: Truncation) -> tuple[np.ndarray, np.ndarray]:
    """Partial traces (matter, photon) of the composite density matrix."""
    nb, na = trunc.dim_matter, trunc.dim_photon
    r4 = rho.reshape(nb, na, nb, na)
    rho_b = np.einsum("iaja->ij", r4)
    rho_a = np.einsum("iaib->ab", r4)
    return rho_b, rho_a


def _single_mode_moments(rho_mode: np.ndarray) -> tuple[complex, complex, float, float]:
    """Ladder moments (<c>, <c^2>, <n>, Var n) of a single-mode density matrix."""
    dim = rho_mode.shape[0]
    levels = np.arange(dim, dtype=float)
    pops = np.real(np.diag(rho_mode))
    n = float(pops @ levels)
    var = float(pops @ levels**2) - n**2
    sq = np.sqrt(levels)
    # tr(rho c)   = sum_m rho[m, m-1] sqrt(m)
    # tr(rho c^2) = sum_m rho[m, m-2] sqrt(m (m-1))
    c1 = complex(np.sum(np.diag(rho_mode, -1) * sq[1:]))
    c2 = complex(np.sum(np.diag(rho_mode, -2) * (sq[2:] * sq[1:-1])))
    return c1, c2, n, var


def measure_density(rho: np.ndarray, trunc: Truncation) -> QuantumObservables:
    """All tracked observables of a (possibly mixed) composite state."""
    if rho.shape != (trunc.dim_total, trunc.dim_total):
        raise DimensionMismatch(
            f"density matrix shape {rho.shape} does not match truncation "
            f"dimension {trunc.dim_total}"
        )
    rho_b, rho_a = _reduced_density_matrices(rho, trunc)
    return assemble_observables(
        _single_mode_moments(rho_b), _single_mode_moments(rho_a)
    )


def density_diagnostics(rho: np.ndarray) -> dict:
    """Trace, hermiticity deviation and minimum eigenvalue of a density matrix.

    The eigenvalue check is a full Hermitian diagonalization; it is meant
    for validation, not for per-step use.
    """
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    eigenvalues = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    return {
        "trace": complex(np.trace(rho)),
        "herm_deviation": herm_dev,
        "min_eigenvalue": float(eigenvalues[0]),
    }


@dataclass
class LindbladTrajectory:
    """Result of an open-system evolution.

    Stores per-time observables rather than every density matrix (a full
    matrix per output time would be prohibitively large); the final
    density matrix is kept for diagnostics and restarts.
    """

    times: np.ndarray
    observables: list[QuantumObservables]
    final_state: np.ndarray
    max_trace_drift: float
    params: SystemParams
    trunc: Truncation

    def series(self, attribute: str) -> np.ndarray:
        """Extract one observable as an array (undefined entries become NaN)."""
        values = [getattr(obs, attribute) for obs in self.observables]
        return np.array(
            [math.nan if value is None else float(value) for value in values]
        )


def evolve_density(
    params: SystemParams,
    trunc: Truncation,
    initial,
    times,
    max_step: float | None = None,
    trace_tol: float = 1e-8,
) -> LindbladTrajectory:
    """Integrate the lossy-cavity master equation over a time grid.

    Parameters
    ----------
    params:
        System parameters; ``params.kappa`` is the photon loss rate
        (``kappa = 0`` reduces to closed unitary dynamics and is useful
        for validating the integrator against the exact propagator).
    trunc:
        Fock-space truncation for both modes.
    initial:
        Either a :class:`FockState` (converted to a projector) or a
        density matrix of matching dimension.
    times:
        Strictly increasing output times; ``times[0]`` may be 0.
    max_step:
        Optional cap on the integrator step; defaults to
        :func:`default_step_bound`.
    trace_tol:
        Maximum tolerated deviation of the trace from 1 at any output
        time before the run aborts with :class:`StepTooLarge`.
    """
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if ts.size < 1 or (ts.size > 1 and not np.all(np.diff(ts) > 0)):
        raise ParameterError("times must be a nonempty strictly increasing grid")
    if ts[0] < 0:
        raise ParameterError("times must be nonnegative")

    if isinstance(initial, FockState):
        if initial.trunc.dim_total != trunc.dim_total:
            raise DimensionMismatch("initial state truncation does not match trunc")
        rho = np.outer(initial.amplitudes, initial.amplitudes.conj())
    else:
        rho = np.asarray(initial, dtype=complex)
        if rho.shape != (trunc.dim_total, trunc.dim_total):
            raise DimensionMismatch(
                f"initial density matrix shape {rho.shape} does not match "
                f"truncation dimension {trunc.dim_total}"
            )
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > 1e-8:
            raise ParameterError(f"initial density matrix trace is {trace!r}, expected 1")

    h_bound = default_step_bound(params)
    if max_step is not None:
        if max_step <= 0:
            raise ParameterError(f"max_step must be positive, got {max_step!r}")
        h_bound = min(h_bound, max_step)

    kappa = params.kappa
    h_dense = build_hamiltonian(params, trunc)
    n_photon_diag = np.kron(
        np.ones(trunc.dim_matter), np.arange(trunc.dim_photon, dtype=float)
    )
    gen = scipy.sparse.csr_matrix(
        h_dense - 1j * (kappa / 2.0) * np.diag(n_photon_diag)
    )
    a_op = scipy.sparse.csr_matrix(
        scipy.sparse.kron(
            scipy.sparse.eye(trunc.dim_matter),
            scipy.sparse.diags(
                np.sqrt(np.arange(1.0, trunc.dim_photon)), 1
            ),
        )
    )

    def rhs(r: np.ndarray) -> np.ndarray:
        m = gen @ r
        out = -1j * (m - m.conj().T)
        if kappa > 0:
            out += kappa * (a_op @ (a_op @ r).conj().T)
        return out

    observables: list[QuantumObservables] = []
    max_drift = 0.0
    t_now = ts[0]
    if t_now > 0:
        rho = _integrate_interval(rhs, rho, 0.0, t_now, h_bound)
    for index, t_next in enumerate(ts):
        if index > 0:
            rho = _integrate_interval(rhs, rho, t_now, t_next, h_bound)
            t_now = t_next
        drift = abs(float(np.trace(rho).real) - 1.0) + abs(float(np.trace(rho).imag))
        max_drift = max(max_drift, drift)
        if drift > trace_tol:
            raise StepTooLarge(
                f"trace drift {drift:.3e} at t = {t_now:g} exceeds {trace_tol:g}; "
                "reduce max_step"
            )
        observables.append(measure_density(rho, trunc))

    return LindbladTrajectory(
        times=ts,
        observables=observables,
        final_state=rho,
        max_trace_drift=max_drift,
        params=params,
        trunc=trunc,
    )


def _integrate_interval(rhs, rho: np.ndarray, t0: float, t1: float, h_bound: float) -> np.ndarray:
    """Advance rho from t0 to t1 with equal RK4 steps of length <= h_bound."""
    span = t1 - t0
    if span <= 0:
        return rho
    n_steps = max(1, math.ceil(span / h_bound))
    h = span / n_steps
    for _ in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + (h / 2.0) * k1)
        k3 = rhs(rho + (h / 2.0) * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


@dataclass(frozen=True)
class OutputFieldObservables:
    """Observables of the field leaking out of the cavity.

    Modeled by the instantaneous proportional extraction relations
    flux = kappa <n> and Q_out = kappa Q.  This is a simple modeling
    choice for the detected field, not a full filtered photodetection
    calculation; it preserves the sign structure of the intracavity
    Mandel parameter.
    """

    photon_flux: float
    Q_out: float | None


def output_field_observables(obs: QuantumObservables, kappa: float) -> OutputFieldObservables:
    """Map intracavity observables onto the extracted output field."""
    if kappa < 0:
        raise ParameterError(f"kappa must be >= 0, got {kappa!r}")
    q_out = None if obs.Q_photon is None else kappa * obs.Q_photon
    return OutputFieldObservables(photon_flux=kappa * obs.mean_n_photon, Q_out=q_out)

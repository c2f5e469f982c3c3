"""Fully quantum dynamics on a truncated two-mode Fock space.

The composite Hilbert space is spanned by |m> x |n> with m matter quanta
and n photons, truncated at configurable cutoffs.  Basis ordering is
matter-major: amplitude index i = m * (n_photon_max + 1) + n, so a state
vector reshapes to a (matter, photon) grid.  This module provides
Hamiltonian assembly for all model variants, preparation of the two
initialization schemes, unitary propagation through a dense Hermitian
eigendecomposition (with a Krylov fallback for large bases), and
measurement of quadrature moments and occupation statistics including
the Mandel Q parameter of both modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .core import ModelVariant, SystemParams
from .errors import (
    DimensionMismatch,
    NumericError,
    ParameterError,
    TruncationTooSmall,
    WindowTooShort,
)
from .semiclassical import Q_DEFINED_EPS

__all__ = [
    "Truncation",
    "FockState",
    "QuantumObservables",
    "TimeAverage",
    "destroy",
    "position_op",
    "momentum_op",
    "build_hamiltonian",
    "prepare_scheme1",
    "prepare_scheme2",
    "evolve_state",
    "measure",
    "assemble_observables",
    "time_average",
]

#: Above this Hilbert-space dimension the propagator switches to Krylov steps.
_EIGH_DIM_LIMIT = 4000


@dataclass(frozen=True)
class Truncation:
    """Fock-space cutoffs (inclusive) and the tolerated boundary leakage.

    ``leak_tolerance`` bounds the total population allowed in the top
    two levels of either mode after state preparation; larger leakage
    means the basis is too small for the requested state.
    """

    n_matter_max: int
    n_photon_max: int
    leak_tolerance: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("n_matter_max", "n_photon_max"):
            value = getattr(self, name)
            if int(value) != value or value < 4:
                raise ParameterError(f"{name} must be an integer >= 4, got {value!r}")
        if not (0.0 < self.leak_tolerance <= 1e-3):
            raise ParameterError(
                f"leak_tolerance must lie in (0, 1e-3], got {self.leak_tolerance!r}"
            )

    @property
    def dim_matter(self) -> int:
        return self.n_matter_max + 1

    @property
    def dim_photon(self) -> int:
        return self.n_photon_max + 1

    @property
    def dim_total(self) -> int:
        return self.dim_matter * self.dim_photon

    @staticmethod
    def _auto_cutoff(mean_occupation: float) -> int:
        """Cutoff with Gaussian-tail headroom above the mean occupation."""
        mu = max(float(mean_occupation), 0.0)
        return math.ceil(mu + 8.0 * math.sqrt(mu) + 12.0)

    @classmethod
    def for_scheme1(cls, x0: float, w: float, leak_tolerance: float = 1e-8) -> "Truncation":
        """Auto-sized cutoffs for a displaced squeezed matter preparation.

        The matter mode starts with mean occupation x0^2/2 + sinh^2(ln w);
        the photon cutoff matches it because resonant evolution can
        transfer the full excitation content to the field.
        """
        mu = x0**2 / 2.0 + math.sinh(math.log(w)) ** 2
        n = cls._auto_cutoff(mu)
        return cls(n, n, leak_tolerance)

    @classmethod
    def for_scheme2(cls, alpha: complex, leak_tolerance: float = 1e-8) -> "Truncation":
        """Auto-sized cutoffs for a coherent-field preparation."""
        mu = abs(alpha) ** 2
        n = cls._auto_cutoff(mu)
        return cls(n, n, leak_tolerance)

    def doubled(self) -> "Truncation":
        """Truncation with both cutoffs doubled (for convergence checks)."""
        return Truncation(2 * self.n_matter_max, 2 * self.n_photon_max, self.leak_tolerance)


@dataclass
class FockState:
    """Normalized state vector on the truncated two-mode basis."""

    amplitudes: np.ndarray
    trunc: Truncation

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.trunc.dim_total:
            raise DimensionMismatch(
                f"amplitude vector has length {amps.size}, expected "
                f"{self.trunc.dim_total} for cutoffs "
                f"({self.trunc.n_matter_max}, {self.trunc.n_photon_max})"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-8:
            raise ParameterError(f"state norm is {norm!r}, expected 1 within 1e-8")
        self.amplitudes = amps

    def as_grid(self) -> np.ndarray:
        """Amplitudes reshaped to (matter level, photon level)."""
        return self.amplitudes.reshape(self.trunc.dim_matter, self.trunc.dim_photon)

    def photon_populations(self) -> np.ndarray:
        return (np.abs(self.as_grid()) ** 2).sum(axis=0)

    def matter_populations(self) -> np.ndarray:
        return (np.abs(self.as_grid()) ** 2).sum(axis=1)

    def overlap(self, other: "FockState") -> complex:
        """Inner product <self|other> on the common truncation.

        States with different cutoffs are compared by zero-padding the
        smaller basis, which embeds it exactly in the larger one.
        """
        a, b = self.as_grid(), other.as_grid()
        nb = max(a.shape[0], b.shape[0])
        na = max(a.shape[1], b.shape[1])
        pa = np.zeros((nb, na), dtype=complex)
        pb = np.zeros((nb, na), dtype=complex)
        pa[: a.shape[0], : a.shape[1]] = a
        pb[: b.shape[0], : b.shape[1]] = b
        return complex(np.vdot(pa, pb))


def destroy(dim: int) -> np.ndarray:
    """Bosonic annihilation operator on a ``dim``-level basis."""
    return np.diag(np.sqrt(np.arange(1.0, dim)), 1)


def position_op(dim: int) -> np.ndarray:
    """Position quadrature (a^dag + a)/sqrt(2)."""
    a = destroy(dim)
    return (a.conj().T + a) / math.sqrt(2.0)


def momentum_op(dim: int) -> np.ndarray:
    """Momentum quadrature i (a^dag - a)/sqrt(2)."""
    a = destroy(dim)
    return 1j * (a.conj().T - a) / math.sqrt(2.0)


def build_hamiltonian(params: SystemParams, trunc: Truncation) -> np.ndarray:
    """Dense Hermitian Hamiltonian of the chosen variant on the truncated basis.

    Full variant:
        H = (n_b + 1/2) + gamma (n_a + 1/2) - lam q P + (lam^2/2) q^2
    where P is the matter momentum quadrature and q the field position
    quadrature.  The no-self-interaction variant drops the lam^2 term;
    the rotating-wave variant replaces the coupling with the
    excitation-conserving combination -i lam/2 (b^dag a - b a^dag).
    """
    nb, na = trunc.dim_matter, trunc.dim_photon
    ib, ia = np.eye(nb), np.eye(na)
    num_b = np.diag(np.arange(nb, dtype=float))
    num_a = np.diag(np.arange(na, dtype=float))
    h = np.kron(num_b + 0.5 * ib, ia) + params.gamma * np.kron(ib, num_a + 0.5 * ia)
    h = h.astype(complex)
    if params.variant is ModelVariant.RWA:
        b = destroy(nb)
        a = destroy(na)
        h += (-1j * params.lam / 2.0) * np.kron(b.conj().T, a)
        h += (+1j * params.lam / 2.0) * np.kron(b, a.conj().T)
    else:
        q_a = position_op(na)
        p_b = momentum_op(nb)
        h += -params.lam * np.kron(p_b, q_a)
        if params.variant is ModelVariant.FULL:
            h += (params.lam**2 / 2.0) * np.kron(ib, q_a @ q_a)
    herm_dev = float(np.max(np.abs(h - h.conj().T)))
    if herm_dev > 1e-12:
        raise NumericError(f"Hamiltonian assembly lost hermiticity: deviation {herm_dev:.3e}")
    return h


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Unnormalized coherent-state amplitudes alpha^n / sqrt(n!)."""
    amps = np.empty(dim, dtype=complex)
    amps[0] = 1.0
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps * math.exp(-abs(alpha) ** 2 / 2.0)


def _displaced_squeezed_recurrence(alpha: complex, r: float, dim: int) -> np.ndarray:
    """Fock amplitudes of D(alpha) S(r) |0> by the three-term recurrence."""
    c = np.zeros(dim, dtype=complex)
    ch, sh = math.cosh(r), math.sinh(r)
    c[0] = 1.0
    drive = alpha * ch + np.conj(alpha) * sh
    for n in range(dim - 1):
        prev = c[n - 1] if n >= 1 else 0.0
        c[n + 1] = (drive * c[n] - math.sqrt(n) * sh * prev) / (ch * math.sqrt(n + 1))
    norm = np.linalg.norm(c)
    if norm == 0.0:
        raise NumericError("displaced-squeezed recurrence produced a null vector")
    return c / norm


def _displaced_squeezed_operator(alpha: complex, r: float, dim: int) -> np.ndarray:
    """Fock amplitudes of D(alpha) S(r) |0> via exact matrix exponentials."""
    a = destroy(dim)
    adag = a.conj().T
    displace = scipy.linalg.expm(alpha * adag - np.conj(alpha) * a)
    squeeze = scipy.linalg.expm((r / 2.0) * (a @ a - adag @ adag))
    vec = (displace @ squeeze)[:, 0]
    return vec / np.linalg.norm(vec)


def _check_leak(populations: np.ndarray, trunc: Truncation, label: str) -> None:
    leak = float(populations[-2:].sum())
    if leak > trunc.leak_tolerance:
        raise TruncationTooSmall(
            f"{label} population {leak:.3e} in the top two basis levels exceeds "
            f"the leak tolerance {trunc.leak_tolerance:g}; increase the cutoff "
            f"(currently ({trunc.n_matter_max}, {trunc.n_photon_max}))"
        )


def prepare_scheme1(
    x0: float, w: float, trunc: Truncation, method: str = "recurrence"
) -> FockState:
    """Displaced squeezed matter state tensored with the field vacuum.

    The matter wave function is proportional to
    exp[-(X - x0)^2 / (2 w^2)], realized as D(alpha) S(r) |0> with
    alpha = x0/sqrt(2) and squeezing parameter r = -ln w.  Two
    construction routes are available and agree to high precision:
    the analytic three-term recurrence (default) and direct matrix
    exponentials of the displacement and squeeze generators.

    After construction the first two position moments are verified
    against their targets.  At the default leak tolerance the check
    enforces agreement to 1e-6; when a caller explicitly allows more
    boundary leakage, the moment tolerance is relaxed proportionally,
    because the deviation is exactly the truncation loss the caller
    opted into.
    """
    if not (w > 0 and math.isfinite(w)):
        raise ParameterError(f"w must be > 0, got {w!r}")
    alpha = x0 / math.sqrt(2.0)
    r = -math.log(w)
    if method == "recurrence":
        matter = _displaced_squeezed_recurrence(alpha, r, trunc.dim_matter)
    elif method == "operator":
        matter = _displaced_squeezed_operator(alpha, r, trunc.dim_matter)
    else:
        raise ParameterError(f"unknown construction method {method!r}")
    _check_leak(np.abs(matter) ** 2, trunc, "matter")

    grid = np.zeros((trunc.dim_matter, trunc.dim_photon), dtype=complex)
    grid[:, 0] = matter
    state = FockState(grid.reshape(-1), trunc)

    obs = measure(state)
    moment_tol = max(1e-6, 100.0 * trunc.leak_tolerance)
    if (
        abs(obs.mean_X - x0) > moment_tol
        or abs(obs.X2 - obs.mean_X**2 - w**2 / 2.0) > moment_tol
    ):
        raise TruncationTooSmall(
            "prepared matter moments deviate from the target "
            f"(<X> = {obs.mean_X!r} vs {x0!r}, Var X = "
            f"{obs.X2 - obs.mean_X**2!r} vs {w**2 / 2.0!r}); increase the cutoff"
        )
    return state


def prepare_scheme2(alpha: complex, trunc: Truncation) -> FockState:
    """Matter ground state tensored with a coherent field state |alpha>."""
    alpha = complex(alpha)
    if abs(alpha) ** 2 + 5.0 * abs(alpha) >= trunc.n_photon_max:
        raise TruncationTooSmall(
            f"coherent amplitude |alpha| = {abs(alpha):g} needs a photon cutoff "
            f"above |alpha|^2 + 5 |alpha| = {abs(alpha) ** 2 + 5 * abs(alpha):.1f}, "
            f"got {trunc.n_photon_max}"
        )
    photon = _coherent_amplitudes(alpha, trunc.dim_photon)
    photon = photon / np.linalg.norm(photon)
    _check_leak(np.abs(photon) ** 2, trunc, "photon")
    grid = np.zeros((trunc.dim_matter, trunc.dim_photon), dtype=complex)
    grid[0, :] = photon
    return FockState(grid.reshape(-1), trunc)


def evolve_state(
    h: np.ndarray, psi0: FockState, times, method: str = "auto"
) -> list[FockState]:
    """Propagate a state under exp(-i H t) for every requested time.

    For bases up to a few thousand states the dense Hermitian
    eigendecomposition is used; it is exact to machine precision at every
    output time.  Larger problems use Krylov stepping between grid
    points.  Norm and mean-energy drift are verified to stay below 1e-9.
    """
    dim = psi0.amplitudes.size
    if h.shape != (dim, dim):
        raise DimensionMismatch(
            f"Hamiltonian shape {h.shape} does not match state dimension {dim}"
        )
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if ts.size > 1 and not np.all(np.diff(ts) > 0):
        raise ParameterError("time grid must be strictly increasing")
    if method == "auto":
        method = "eigh" if dim <= _EIGH_DIM_LIMIT else "krylov"

    if method == "eigh":
        energies, modes = scipy.linalg.eigh(h)
        amps0 = modes.conj().T @ psi0.amplitudes
        phases = np.exp(-1j * np.outer(energies, ts)) * amps0[:, None]
        evolved = (modes @ phases).T
    elif method == "krylov":
        h_sparse = scipy.sparse.csc_matrix(h)
        evolved = np.empty((ts.size, dim), dtype=complex)
        psi = psi0.amplitudes.astype(complex)
        t_prev = 0.0
        for k, t in enumerate(ts):
            if t != t_prev:
                psi = scipy.sparse.linalg.expm_multiply(-1j * h_sparse * (t - t_prev), psi)
                t_prev = t
            evolved[k] = psi
    else:
        raise ParameterError(f"unknown propagation method {method!r}")

    norms = np.linalg.norm(evolved, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > 1e-9:
        raise NumericError(f"propagation norm drift {drift:.3e} exceeds 1e-9")
    e0 = float(np.real(np.vdot(psi0.amplitudes, h @ psi0.amplitudes)))
    e_end = float(np.real(np.vdot(evolved[-1], h @ evolved[-1])))
    if abs(e_end - e0) > 1e-9 * max(1.0, abs(e0)):
        raise NumericError(
            f"mean energy drifted from {e0!r} to {e_end!r} during propagation"
        )
    return [FockState(row, psi0.trunc) for row in evolved]


@dataclass(frozen=True)
class QuantumObservables:
    """Single-time expectation values of the composite state.

    ``Q_photon``/``Q_matter`` are ``None`` when the corresponding mode is
    (numerically) in vacuum, where the Mandel parameter is undefined.
    """

    mean_X: float
    mean_P: float
    mean_q: float
    mean_p: float
    mean_n_photon: float
    var_n_photon: float
    Q_photon: float | None
    mean_n_matter: float
    var_n_matter: float
    Q_matter: float | None
    X2: float
    P2: float
    q2: float
    p2: float
    XP_sym: float
    qp_sym: float

    @property
    def mean_n_total(self) -> float:
        return self.mean_n_matter + self.mean_n_photon


def _mandel(mean_n: float, var_n: float) -> float | None:
    if mean_n < Q_DEFINED_EPS:
        return None
    return (var_n - mean_n) / mean_n


def assemble_observables(
    matter_moments: tuple[complex, complex, float, float],
    photon_moments: tuple[complex, complex, float, float],
) -> QuantumObservables:
    """Build the observable record from per-mode ladder moments.

    Each tuple is (<c>, <c^2>, <n>, Var n) for the mode's annihilation
    operator c.  Quadrature moments follow from the ladder moments via
    the convention q = (c^dag + c)/sqrt(2), p = i (c^dag - c)/sqrt(2).
    """
    b1, b2, n_m, var_m = matter_moments
    a1, a2, n_a, var_a = photon_moments
    root2 = math.sqrt(2.0)
    return QuantumObservables(
        mean_X=root2 * b1.real,
        mean_P=root2 * b1.imag,
        mean_q=root2 * a1.real,
        mean_p=root2 * a1.imag,
        mean_n_photon=n_a,
        var_n_photon=var_a,
        Q_photon=_mandel(n_a, var_a),
        mean_n_matter=n_m,
        var_n_matter=var_m,
        Q_matter=_mandel(n_m, var_m),
        X2=b2.real + n_m + 0.5,
        P2=-b2.real + n_m + 0.5,
        q2=a2.real + n_a + 0.5,
        p2=-a2.real + n_a + 0.5,
        XP_sym=b2.imag,
        qp_sym=a2.imag,
    )


def measure(state: FockState) -> QuantumObservables:
    """All tracked observables of a composite pure state.

    Moments are accumulated from index-shifted amplitude products, which
    avoids building any operator on the composite space.
    """
    grid = state.as_grid()
    nb, na = grid.shape
    pops_m = (np.abs(grid) ** 2).sum(axis=1)
    pops_a = (np.abs(grid) ** 2).sum(axis=0)
    levels_m = np.arange(nb, dtype=float)
    levels_a = np.arange(na, dtype=float)
    n_m = float(pops_m @ levels_m)
    n_a = float(pops_a @ levels_a)
    var_m = float(pops_m @ levels_m**2) - n_m**2
    var_a = float(pops_a @ levels_a**2) - n_a**2

    sq_m = np.sqrt(levels_m)
    sq_a = np.sqrt(levels_a)
    # <b>   = sum conj(c[m-1, a]) sqrt(m) c[m, a]
    # <b^2> = sum conj(c[m-2, a]) sqrt(m (m-1)) c[m, a]
    b1 = complex(np.sum(np.conj(grid[:-1]) * (sq_m[1:, None] * grid[1:])))
    b2 = complex(
        np.sum(np.conj(grid[:-2]) * ((sq_m[2:] * sq_m[1:-1])[:, None] * grid[2:]))
    )
    a1 = complex(np.sum(np.conj(grid[:, :-1]) * (sq_a[None, 1:] * grid[:, 1:])))
    a2 = complex(
        np.sum(np.conj(grid[:, :-2]) * ((sq_a[2:] * sq_a[1:-1])[None, :] * grid[:, 2:]))
    )
    return assemble_observables((b1, b2, n_m, var_m), (a1, a2, n_a, var_a))


@dataclass(frozen=True)
class TimeAverage:
    """Windowed time average with a convergence-based error estimate."""

    value: float
    error: float
    periods_used: int


def time_average(times, values, period: float, min_periods: int = 3) -> TimeAverage:
    """Trapezoidal average of a uniformly sampled series over whole periods.

    The window is the largest integer number K of ``period`` lengths that
    fits in the sampled span (K >= ``min_periods``).  The reported error
    is half the difference between the K-period and (K-1)-period means.
    Non-finite samples at either end of the series (for example an
    undefined Mandel Q at t = 0) are trimmed before averaging;
    non-finite interior samples are an error.
    """
    ts = np.asarray(times, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ts.shape != vs.shape or ts.ndim != 1 or ts.size < 4:
        raise ParameterError("times and values must be equal-length 1-d arrays")
    if not (math.isfinite(period) and period > 0):
        raise ParameterError(f"period must be positive and finite, got {period!r}")
    finite = np.isfinite(vs)
    first = int(np.argmax(finite))
    last = int(len(vs) - np.argmax(finite[::-1]) - 1)
    if not finite.any() or not finite[first : last + 1].all():
        raise NumericError("series contains interior non-finite samples")
    ts, vs = ts[first : last + 1], vs[first : last + 1]

    steps = np.diff(ts)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise ParameterError("time grid must be uniform for windowed averaging")

    span = ts[-1] - ts[0]
    k = int(math.floor(span / period + 1e-9))
    if k < min_periods:
        raise WindowTooShort(
            f"series spans {span / period:.2f} periods; at least {min_periods} required"
        )

    def window_mean(n_periods: int) -> float:
        t_end = ts[0] + n_periods * period
        inside = ts <= t_end + 1e-12 * period
        t_in, v_in = ts[inside], vs[inside]
        total = np.trapezoid(v_in, t_in)
        if t_in[-1] < t_end:
            v_end = float(np.interp(t_end, ts, vs))
            total += 0.5 * (v_in[-1] + v_end) * (t_end - t_in[-1])
        return float(total / (n_periods * period))

    value = window_mean(k)
    error = abs(value - window_mean(k - 1)) / 2.0 if k > 1 else math.inf
    return TimeAverage(value=value, error=error, periods_used=k)

"""Exact Gaussian-state dynamics of the coupled oscillator pair.

Because every supported Hamiltonian variant is quadratic, an initial
Gaussian phase-space distribution stays Gaussian forever and is fully
described by its first and second moments.  This module provides

* the classical propagator M(t) mapping phase-space coordinates
  (X, P, q, p) at time 0 to time t, built from the eigendecomposition
  of the drift matrix (exact up to that decomposition, no time stepping),
* moment propagation mean(t) = M mean(0), cov(t) = M cov(0) M^T,
* closed-form expressions for the collective coordinate <X(t)>, the
  generated photon number, its long-time averages, and the marginal
  position density of the matter mode,
* occupation statistics (mean photon number, variance, Mandel Q) of a
  Gaussian state, and 1-sigma covariance ellipses for plotting.

Conventions: the ground state of each mode has variance 1/2 per
quadrature; a mode displaced by a coherent amplitude alpha has mean
quadratures (sqrt(2) Re alpha, sqrt(2) Im alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import (
    ModelVariant,
    PolaritonSpectrum,
    SystemParams,
    drift_matrix,
    polariton_spectrum,
    stability_check,
)
from .errors import (
    DegenerateSplitting,
    GridTooNarrow,
    ParameterError,
    UnstableSystem,
    UnsupportedVariant,
)

__all__ = [
    "J_CANONICAL",
    "Q_DEFINED_EPS",
    "GaussianState",
    "ModeStatistics",
    "EllipseSummary",
    "ClassicalPropagator",
    "evolve_gaussian",
    "propagate_moments",
    "mode_statistics",
    "mode_statistics_arrays",
    "mean_X_closed_form",
    "f_functions",
    "delta_n_closed_form",
    "delta_n_time_average",
    "delta_n_scheme2",
    "position_density",
    "position_variance",
    "covariance_ellipse",
]

#: Canonical symplectic form on (X, P, q, p).
J_CANONICAL = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)

#: Mean occupations below this are treated as vacuum; Mandel Q is undefined there.
Q_DEFINED_EPS = 1e-12

#: Splitting below which the propagator falls back to the matrix exponential.
_EIG_DEGENERACY_EPS = 1e-8

_SUBSYSTEM_SLICES = {"matter": slice(0, 2), "light": slice(2, 4)}


def _subsystem_slice(subsystem: str) -> slice:
    try:
        return _SUBSYSTEM_SLICES[subsystem]
    except KeyError:
        raise ParameterError(
            f"subsystem must be 'matter' or 'light', got {subsystem!r}"
        ) from None


@dataclass
class GaussianState:
    """First and second moments of a two-mode Gaussian state.

    ``mean`` is the 4-vector (<X>, <P>, <q>, <p>) and ``cov`` the
    symmetric 4x4 covariance matrix in the same ordering (matter first).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float).reshape(4)
        cov = np.asarray(self.cov, dtype=float).reshape(4, 4)
        if not np.allclose(cov, cov.T, atol=1e-8):
            raise ParameterError("covariance matrix must be symmetric")
        self.cov = (cov + cov.T) / 2.0

    @classmethod
    def vacuum(cls) -> "GaussianState":
        """Both modes in their ground state."""
        return cls(np.zeros(4), np.eye(4) / 2.0)

    @classmethod
    def scheme1(cls, x0: float, w: float) -> "GaussianState":
        """Displaced, quadrature-squeezed matter mode with the field in vacuum.

        The matter wave function is a Gaussian centered at ``x0`` with
        width ``w`` (position variance w^2/2); ``w = 1`` is the ground
        state width and ``w < 1`` squeezes the position quadrature.
        """
        if not (w > 0 and math.isfinite(w)):
            raise ParameterError(f"w must be > 0, got {w!r}")
        mean = np.array([float(x0), 0.0, 0.0, 0.0])
        cov = np.diag([w**2 / 2.0, 1.0 / (2.0 * w**2), 0.5, 0.5])
        return cls(mean, cov)

    @classmethod
    def scheme2(cls, alpha: complex) -> "GaussianState":
        """Matter mode in its ground state, field in a coherent state."""
        alpha = complex(alpha)
        mean = np.array(
            [0.0, 0.0, math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag]
        )
        return cls(mean, np.eye(4) / 2.0)

    def block(self, subsystem: str) -> tuple[np.ndarray, np.ndarray]:
        """Mean 2-vector and 2x2 covariance block of one subsystem."""
        sl = _subsystem_slice(subsystem)
        return self.mean[sl].copy(), self.cov[sl, sl].copy()

    def mode_statistics(self, subsystem: str) -> "ModeStatistics":
        """Occupation statistics of one mode (exact for Gaussian states)."""
        mean2, cov2 = self.block(subsystem)
        return mode_statistics(mean2, cov2)


@dataclass(frozen=True)
class ModeStatistics:
    """Occupation-number statistics of a single bosonic mode.

    ``mandel_q`` is ``None`` for (numerically) vacuum states, where the
    normalized variance excess (Var n - <n>)/<n> is undefined.
    """

    mean_n: float
    var_n: float
    mandel_q: float | None


def mode_statistics(mean2: np.ndarray, cov2: np.ndarray) -> ModeStatistics:
    """Occupation statistics of a Gaussian mode from its moments.

    Uses the exact relations between quadrature moments and number
    statistics for Gaussian states: the mean occupation follows from the
    second moments directly, and the number variance equals the variance
    of the symmetrized quadratic form minus the 1/4 ordering correction.
    """
    qbar, pbar = float(mean2[0]), float(mean2[1])
    sqq, spp, sqp = float(cov2[0, 0]), float(cov2[1, 1]), float(cov2[0, 1])
    mean_n = (qbar**2 + pbar**2 + sqq + spp) / 2.0 - 0.5
    var_sym = (
        (sqq**2 + spp**2 + 2.0 * sqp**2) / 2.0
        + qbar**2 * sqq
        + pbar**2 * spp
        + 2.0 * qbar * pbar * sqp
    )
    var_n = var_sym - 0.25
    if mean_n < Q_DEFINED_EPS:
        return ModeStatistics(mean_n=mean_n, var_n=var_n, mandel_q=None)
    return ModeStatistics(mean_n=mean_n, var_n=var_n, mandel_q=(var_n - mean_n) / mean_n)


def mode_statistics_arrays(
    means: np.ndarray, covs: np.ndarray, subsystem: str
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized occupation statistics along a trajectory.

    Parameters are stacked moments of shape (nt, 4) and (nt, 4, 4).
    Returns arrays (mean_n, var_n, mandel_q); undefined Mandel Q entries
    are NaN (callers serialize them as explicitly undefined values).
    """
    sl = _subsystem_slice(subsystem)
    m = means[:, sl]
    c = covs[:, sl, sl]
    qbar, pbar = m[:, 0], m[:, 1]
    sqq, spp, sqp = c[:, 0, 0], c[:, 1, 1], c[:, 0, 1]
    mean_n = (qbar**2 + pbar**2 + sqq + spp) / 2.0 - 0.5
    var_n = (
        (sqq**2 + spp**2 + 2.0 * sqp**2) / 2.0
        + qbar**2 * sqq
        + pbar**2 * spp
        + 2.0 * qbar * pbar * sqp
        - 0.25
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(mean_n >= Q_DEFINED_EPS, (var_n - mean_n) / mean_n, np.nan)
    return mean_n, var_n, q


class ClassicalPropagator:
    """Linear phase-space propagator M(t) for a stable parameter set.

    The propagator is built once from the eigendecomposition of the
    drift matrix; evaluating ``matrix(t)`` afterwards costs a single
    small complex contraction per time.  Near-degenerate spectra (mode
    splitting below 1e-8) fall back to the scaling-and-squaring matrix
    exponential, which stays well conditioned there.
    """

    def __init__(self, params: SystemParams):
        self.params = params
        self.drift = drift_matrix(params)
        report = stability_check(params)
        if not report.stable:
            raise UnstableSystem(
                "cannot build a propagator for unstable dynamics: "
                f"max |Re eigenvalue| = {report.max_real_part:.3e}",
                report,
            )
        self.spectrum: PolaritonSpectrum = polariton_spectrum(params)
        self._use_expm = self.spectrum.delta_bar < _EIG_DEGENERACY_EPS
        if not self._use_expm:
            evals, vecs = np.linalg.eig(self.drift)
            self._evals = evals
            self._vecs = vecs
            self._vecs_inv = np.linalg.inv(vecs)

    def matrix(self, t) -> np.ndarray:
        """Propagator M(t); shape (4, 4) for scalar t, (nt, 4, 4) for arrays."""
        ts = np.asarray(t, dtype=float)
        scalar = ts.ndim == 0
        ts = np.atleast_1d(ts)
        if self._use_expm:
            out = np.stack([expm(self.drift * ti) for ti in ts])
        else:
            phases = np.exp(np.outer(ts, self._evals))
            out = np.einsum(
                "ij,tj,jk->tik", self._vecs, phases, self._vecs_inv
            ).real
        return out[0] if scalar else out

    def modes(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        """Decompose M(t) = sum_k [C_k cos(w_k t) + S_k sin(w_k t)].

        Returns one (frequency, C_k, S_k) triple per distinct normal-mode
        frequency.  Requires a non-degenerate spectrum.
        """
        if self._use_expm:
            raise DegenerateSplitting(
                "mode decomposition requires distinct normal-mode frequencies"
            )
        buckets: dict[float, list[np.ndarray]] = {}
        for idx in range(4):
            mu = self._evals[idx]
            proj = np.outer(self._vecs[:, idx], self._vecs_inv[idx, :])
            freq = round(abs(mu.imag), 12)
            entry = buckets.setdefault(freq, [np.zeros((4, 4)), np.zeros((4, 4))])
            entry[0] += proj.real
            if freq:
                entry[1] += -np.sign(mu.imag) * proj.imag
        return [(freq, c, s) for freq, (c, s) in sorted(buckets.items())]

    def average_square(self) -> np.ndarray:
        """Exact infinite-time average of M(t)**2, elementwise.

        Valid because the two normal-mode frequencies are distinct and
        incommensurate cross terms average to zero.
        """
        total = np.zeros((4, 4))
        for freq, c, s in self.modes():
            if freq == 0.0:
                total += c**2
            else:
                total += (c**2 + s**2) / 2.0
        return total


def propagate_moments(
    init: GaussianState, params: SystemParams, times
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate Gaussian moments along a time grid (vectorized).

    Returns (means, covs) of shapes (nt, 4) and (nt, 4, 4).  The
    evolution is exact for the quadratic Hamiltonian; there is no
    time-stepping error beyond the propagator construction itself.
    """
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    prop = ClassicalPropagator(params)
    mats = prop.matrix(ts)
    means = np.einsum("tij,j->ti", mats, init.mean)
    covs = np.einsum("tij,jk,tlk->til", mats, init.cov, mats)
    return means, covs


def evolve_gaussian(
    init: GaussianState, params: SystemParams, times
) -> list[GaussianState]:
    """Evolve a Gaussian state, returning one state per requested time."""
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if ts.size > 1 and not np.all(np.diff(ts) > 0):
        raise ParameterError("time grid must be strictly increasing")
    means, covs = propagate_moments(init, params, ts)
    return [GaussianState(m, c) for m, c in zip(means, covs)]


def _closed_form_spectrum(params: SystemParams, allow_rwa: bool = True) -> PolaritonSpectrum:
    if params.variant is ModelVariant.NO_DIAMAGNETIC or (
        params.variant is ModelVariant.RWA and not allow_rwa
    ):
        raise UnsupportedVariant(
            f"no closed form for variant {params.variant.value!r}; "
            "use the propagator-based Gaussian evolution instead"
        )
    return polariton_spectrum(params)


def mean_X_closed_form(params: SystemParams, x0: float, t):
    """Collective matter coordinate <X(t)> for an initial displacement x0.

    Valid for the full and rotating-wave variants.  The result is a
    carrier oscillation at frequency sigma_bar/2 slowly modulated at
    delta_bar/2, with the asymmetry coefficient beta weighting the
    quadrature component of the beat.
    """
    spec = _closed_form_spectrum(params)
    ts = np.asarray(t, dtype=float)
    return x0 * (
        np.cos(spec.sigma_bar * ts / 2.0) * np.cos(spec.delta_bar * ts / 2.0)
        + spec.beta
        * np.sin(spec.sigma_bar * ts / 2.0)
        * np.sin(spec.delta_bar * ts / 2.0)
    )


def f_functions(params: SystemParams, t) -> tuple:
    """Row of the full-variant propagator acting on X: X(t) = f1 X(0) + f2 P(0) + f3 q(0) + f4 p(0).

    Exact closed forms in terms of the two normal-mode frequencies.  At
    the single degenerate point (resonance with zero coupling) the
    decoupled-oscillator limit (cos t, sin t, 0, 0) is returned.
    """
    if params.variant is not ModelVariant.FULL:
        raise UnsupportedVariant(
            f"f-functions are defined for the full variant, got {params.variant.value!r}"
        )
    spec = polariton_spectrum(params)
    ts = np.asarray(t, dtype=float)
    if spec.degenerate:
        zero = np.zeros_like(ts)
        return np.cos(ts), np.sin(ts), zero, zero
    g, lam = params.gamma, params.lam
    op, om = spec.omega_plus, spec.omega_minus
    ds = spec.delta_bar * spec.sigma_bar
    f1 = mean_X_closed_form(params, 1.0, ts)
    f2 = (op**2 - g**2) * np.sin(op * ts) / (op * ds) - (om**2 - g**2) * np.sin(
        om * ts
    ) / (om * ds)
    f3 = -lam * (op * np.sin(op * ts) - om * np.sin(om * ts)) / ds
    f4 = lam * g * (np.cos(op * ts) - np.cos(om * ts)) / ds
    return f1, f2, f3, f4


def delta_n_closed_form(params: SystemParams, x0: float, w: float, t):
    """Generated photon number Delta<n(t)> above the vacuum baseline.

    The baseline is the photon number produced from the two-mode ground
    state (x0 = 0, w = 1) by the same evolution, so this quantity
    isolates the photons generated by the initial displacement and
    squeezing of the matter mode.  Full variant only.
    """
    if params.variant is not ModelVariant.FULL:
        raise UnsupportedVariant(
            "the generated-photon closed form applies to the full variant only"
        )
    spec = polariton_spectrum(params)
    ts = np.asarray(t, dtype=float)
    if spec.degenerate:
        return np.zeros_like(ts)
    g, lam = params.gamma, params.lam
    op, om = spec.omega_plus, spec.omega_minus
    sig, del_ = spec.sigma_bar, spec.delta_bar
    half_s = np.sin(sig * ts / 2.0)
    half_c = np.cos(del_ * ts / 2.0)
    ss = half_s * np.sin(del_ * ts / 2.0)
    b1 = op * half_s * half_c - (sig / 2.0) * np.sin(om * ts)
    b2 = om * half_s * half_c - (sig / 2.0) * np.sin(om * ts)
    pref = lam**2 / (sig**2 * del_**2)
    return pref * (
        (1.0 / w**2 - 1.0) * (g**2 * ss**2 + b1**2)
        + (2.0 * x0**2 + w**2 - 1.0) * (g**2 * b2**2 / (op**2 * om**2) + ss**2)
    )


def delta_n_time_average(params: SystemParams, x0: float, w: float) -> float:
    """Infinite-time average of the generated photon number.

    Full variant: lam^2 fbar1 (w^-2 - 1) + lam^2 fbar2 (2 x0^2 + w^2 - 1)
    with exact spectral coefficients fbar1, fbar2.  Rotating-wave
    variant: a Lorentzian in gamma of width lam centered at resonance.
    At resonance both reduce to x0^2/4 + (w - 1/w)^2/8, independent of
    the coupling strength.
    """
    spec = _closed_form_spectrum(params)
    if spec.degenerate:
        return 0.0
    g, lam = params.gamma, params.lam
    if params.variant is ModelVariant.RWA:
        return (
            0.125 * lam**2 / ((g - 1.0) ** 2 + lam**2) * (2.0 * x0**2 + (w - 1.0 / w) ** 2)
        )
    op2, om2 = spec.omega_plus**2, spec.omega_minus**2
    s2d2 = spec.sigma_bar**2 * spec.delta_bar**2
    fbar1 = (op2 + om2 + 2.0 * g**2) / (8.0 * s2d2)
    fbar2 = (2.0 * op2 * om2 + g**2 * (op2 + om2)) / (8.0 * op2 * om2 * s2d2)
    return lam**2 * fbar1 * (1.0 / w**2 - 1.0) + lam**2 * fbar2 * (
        2.0 * x0**2 + w**2 - 1.0
    )


def delta_n_scheme2(params: SystemParams, c_disp: float) -> float:
    """Average photon-number difference between two coherent preparations.

    Compares the long-time average photon number for an initial field
    displaced along the position quadrature by ``c_disp`` (coherent
    amplitude c_disp/sqrt(2)) against the same displacement along the
    momentum quadrature.  The difference is generated entirely by the
    counter-rotating and self-interaction terms, so the rotating-wave
    variant returns exactly 0.
    """
    if params.variant is ModelVariant.RWA:
        return 0.0
    if params.variant is not ModelVariant.FULL:
        raise UnsupportedVariant(
            "the coherent-preparation average applies to the full variant "
            "(or trivially to the rotating-wave variant)"
        )
    if params.lam == 0.0:
        return 0.0
    spec = polariton_spectrum(params)
    g, lam = params.gamma, params.lam
    op2, om2 = spec.omega_plus**2, spec.omega_minus**2
    s2d2 = spec.sigma_bar**2 * spec.delta_bar**2
    return lam**2 * c_disp**2 * ((2.0 * g + lam**2) * (op2 + om2) - 4.0 * g) / (4.0 * s2d2)


def position_variance(params: SystemParams, w: float, t):
    """Variance of the matter position marginal at time t (full variant)."""
    f1, f2, f3, f4 = f_functions(params, t)
    return (w**2 * f1**2 + f2**2 / w**2 + f3**2 + f4**2) / 2.0


def position_density(params: SystemParams, x0: float, w: float, t: float, x_grid):
    """Marginal probability density of the matter position at one time.

    The marginal is an exact Gaussian with mean <X(t)> = x0 f1(t) and
    variance given by :func:`position_variance`.  Raises
    :class:`GridTooNarrow` when more than 1e-6 of the probability mass
    lies outside the supplied grid.
    """
    xs = np.asarray(x_grid, dtype=float)
    if xs.size < 2 or not np.all(np.isfinite(xs)):
        raise ParameterError("x_grid must contain at least two finite points")
    mean = float(np.asarray(mean_X_closed_form(params, x0, t)))
    var = float(np.asarray(position_variance(params, w, t)))
    sigma = math.sqrt(var)
    lo, hi = float(np.min(xs)), float(np.max(xs))
    mass_out = 0.5 * math.erfc((hi - mean) / (sigma * math.sqrt(2.0))) + 0.5 * math.erfc(
        (mean - lo) / (sigma * math.sqrt(2.0))
    )
    if mass_out > 1e-6:
        raise GridTooNarrow(
            f"position grid [{lo:g}, {hi:g}] misses {mass_out:.2e} of the "
            f"probability mass (density centered at {mean:g}, sigma {sigma:g})"
        )
    return np.exp(-((xs - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


@dataclass(frozen=True)
class EllipseSummary:
    """1-sigma covariance ellipse of a single-mode Gaussian marginal.

    ``semi_axes`` are the square roots of the covariance eigenvalues in
    descending order; ``angle`` is the orientation of the major axis
    measured from the position axis, wrapped to (-pi/2, pi/2].
    """

    center: np.ndarray
    semi_axes: np.ndarray
    angle: float


def covariance_ellipse(state: GaussianState, subsystem: str) -> EllipseSummary:
    """1-sigma iso-density ellipse of one subsystem's phase-space marginal."""
    mean2, cov2 = state.block(subsystem)
    evals, evecs = np.linalg.eigh(cov2)
    if np.min(evals) < -1e-10:
        raise ParameterError(
            f"covariance block has negative eigenvalue {np.min(evals):.3e}"
        )
    evals = np.clip(evals, 0.0, None)
    # eigh returns ascending eigenvalues; the major axis is the last one
    major = evecs[:, 1]
    angle = math.atan2(major[1], major[0])
    if angle <= -math.pi / 2.0:
        angle += math.pi
    elif angle > math.pi / 2.0:
        angle -= math.pi
    return EllipseSummary(
        center=mean2,
        semi_axes=np.sqrt(evals[::-1]),
        angle=angle,
    )

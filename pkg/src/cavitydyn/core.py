"""Model parameters, normal-mode spectrum, and stability analysis.

The system is a pair of coupled harmonic oscillators in dimensionless
units: a collective matter mode with quadratures (X, P) and unit bare
frequency, and a cavity field mode with quadratures (q, p) and bare
frequency ``gamma``.  The dimensionless Hamiltonian of the full model is

    H = (P^2 + X^2)/2 + gamma (p^2 + q^2)/2 - lam q P + (lam^2 / 2) q^2

where ``lam`` is the collective coupling strength.  Two reduced variants
are supported: one that drops the quadratic self-interaction term
(``lam^2 q^2 / 2``) and a rotating-wave variant that additionally drops
the counter-rotating parts of the bilinear coupling.

All quantities in this module are exact closed forms or small dense
eigenproblems; nothing here depends on a Fock-space truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DegenerateSplitting,
    NonPositiveInput,
    ParameterError,
    UnstableSystem,
)

__all__ = [
    "CODATA",
    "DEGENERACY_EPS",
    "STABILITY_TOL",
    "ModelVariant",
    "SystemParams",
    "PolaritonSpectrum",
    "StabilityReport",
    "drift_matrix",
    "polariton_spectrum",
    "stability_check",
    "require_finite_period",
    "lambda_from_ion_parameters",
]

#: Physical constants (SI), pinned for bit-reproducible unit conversion.
CODATA = {
    "epsilon_0": 8.8541878128e-12,  # vacuum permittivity, F/m
    "c": 299792458.0,               # speed of light, m/s
    "e": 1.602176634e-19,           # elementary charge, C
}

#: Splitting below this threshold is treated as exactly degenerate.
DEGENERACY_EPS = 1e-12

#: Maximum tolerated real part of a drift-matrix eigenvalue for stability.
STABILITY_TOL = 1e-10


class ModelVariant(Enum):
    """Which terms of the coupled-oscillator Hamiltonian are retained."""

    FULL = "full"
    NO_DIAMAGNETIC = "no_diamagnetic"
    RWA = "rwa"

    @classmethod
    def parse(cls, text: str) -> "ModelVariant":
        """Parse a case-insensitive variant name."""
        key = str(text).strip().lower().replace("-", "_")
        for member in cls:
            if member.value == key:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ParameterError(f"unknown model variant {text!r}; expected one of: {valid}")


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless parameters of the coupled light-matter system.

    Attributes
    ----------
    gamma:
        Ratio of the cavity frequency to the matter frequency (> 0).
    lam:
        Collective coupling strength (>= 0).
    variant:
        Which Hamiltonian variant to simulate.
    kappa:
        Cavity energy loss rate (>= 0); only the open-system solver
        uses it, closed-system backends require ``kappa == 0`` implicitly
        by ignoring it.
    """

    gamma: float
    lam: float
    variant: ModelVariant = ModelVariant.FULL
    kappa: float = 0.0

    def __post_init__(self) -> None:
        for name in ("gamma", "lam", "kappa"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.lam < 0:
            raise ParameterError(f"lam must be >= 0, got {self.lam}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        if not isinstance(self.variant, ModelVariant):
            object.__setattr__(self, "variant", ModelVariant.parse(self.variant))
        if self.variant is ModelVariant.RWA and self.lam**2 >= 4 * self.gamma:
            raise ParameterError(
                "rotating-wave variant requires lam^2 < 4*gamma "
                f"(got lam^2 = {self.lam**2:g}, 4*gamma = {4 * self.gamma:g}); "
                "outside this domain the rotating-wave normal modes are not real"
            )

    def replace(self, **changes) -> "SystemParams":
        """Return a copy with the given fields replaced."""
        values = {
            "gamma": self.gamma,
            "lam": self.lam,
            "variant": self.variant,
            "kappa": self.kappa,
        }
        values.update(changes)
        return SystemParams(**values)


@dataclass(frozen=True)
class PolaritonSpectrum:
    """Normal-mode (polariton) frequencies and derived beat quantities.

    ``sigma_bar`` and ``delta_bar`` are the sum and difference of the two
    mode frequencies.  The collective matter oscillation beats with
    period ``period_T = 4*pi/delta_bar``; at exact degeneracy the period
    is reported as ``math.inf`` and ``beta`` takes its continuity limit 0.
    """

    omega_plus: float
    omega_minus: float
    beta: float
    sigma_bar: float = field(init=False)
    delta_bar: float = field(init=False)
    period_T: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_bar", self.omega_plus + self.omega_minus)
        object.__setattr__(self, "delta_bar", self.omega_plus - self.omega_minus)
        if self.delta_bar < DEGENERACY_EPS:
            object.__setattr__(self, "period_T", math.inf)
        else:
            object.__setattr__(self, "period_T", 4 * math.pi / self.delta_bar)

    @property
    def degenerate(self) -> bool:
        """True when the splitting is below the degeneracy threshold."""
        return not math.isfinite(self.period_T)

    @property
    def carrier_period(self) -> float:
        """Period of the fast carrier oscillation at frequency sigma_bar/2."""
        return 4 * math.pi / self.sigma_bar


def drift_matrix(params: SystemParams) -> np.ndarray:
    """Classical drift matrix A with d/dt (X, P, q, p) = A (X, P, q, p).

    Rows follow Hamilton's equations for the chosen variant; the phase
    space ordering is (X, P, q, p) with the matter pair first.
    """
    g, lam = params.gamma, params.lam
    if params.variant is ModelVariant.RWA:
        h = lam / 2
        return np.array(
            [
                [0.0, 1.0, -h, 0.0],
                [-1.0, 0.0, 0.0, -h],
                [h, 0.0, 0.0, g],
                [0.0, h, -g, 0.0],
            ]
        )
    qq = g if params.variant is ModelVariant.NO_DIAMAGNETIC else g + lam**2
    return np.array(
        [
            [0.0, 1.0, -lam, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, g],
            [0.0, lam, -qq, 0.0],
        ]
    )


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the classical stability analysis.

    ``stable`` is True when every drift-matrix eigenvalue is purely
    imaginary within :data:`STABILITY_TOL`; otherwise ``max_real_part``
    and ``eigenvalues`` carry the diagnostic.
    """

    stable: bool
    max_real_part: float
    eigenvalues: tuple

    def __bool__(self) -> bool:
        return self.stable


def stability_check(params: SystemParams) -> StabilityReport:
    """Check that the classical dynamics is purely oscillatory.

    The full and rotating-wave variants are stable for every admissible
    parameter set; the variant without the quadratic self-interaction
    term loses stability in part of the (gamma, lam) plane, which this
    routine detects numerically from the drift-matrix eigenvalues.
    """
    eigenvalues = np.linalg.eigvals(drift_matrix(params))
    max_real = float(np.max(np.abs(eigenvalues.real)))
    return StabilityReport(
        stable=max_real < STABILITY_TOL,
        max_real_part=max_real,
        eigenvalues=tuple(complex(v) for v in eigenvalues),
    )


def _full_mode_frequencies(gamma: float, lam: float) -> tuple[float, float]:
    """Normal-mode frequencies of the full model (exact closed form)."""
    s = 1.0 + gamma**2 + gamma * lam**2
    disc = s * s - 4.0 * gamma**2
    # The discriminant equals (1 - gamma^2)^2 + gamma*lam^2*(2 + 2*gamma^2
    # + gamma*lam^2) >= 0, so the square root is always real.
    root = math.sqrt(max(disc, 0.0))
    return math.sqrt((s + root) / 2.0), math.sqrt((s - root) / 2.0)


def _rwa_mode_frequencies(gamma: float, lam: float) -> tuple[float, float]:
    """Normal-mode frequencies of the rotating-wave variant."""
    s = (1.0 + gamma**2 + lam**2 / 2.0) / 2.0
    root = 0.5 * (gamma + 1.0) * math.sqrt((gamma - 1.0) ** 2 + lam**2)
    return math.sqrt(s + root), math.sqrt(s - root)


def polariton_spectrum(params: SystemParams) -> PolaritonSpectrum:
    """Normal-mode frequencies and beat parameters for the given variant.

    The full and rotating-wave variants use exact closed forms.  The
    variant without the quadratic self-interaction term has no closed
    form here, so its frequencies are the imaginary parts of the drift
    matrix eigenvalues; an :class:`UnstableSystem` error is raised when
    those eigenvalues leave the imaginary axis.

    The asymmetry coefficient ``beta`` weights the slow quadrature of
    the beat pattern in the collective-coordinate closed forms.  For the
    rotating-wave variant it reduces to (gamma - 1)/delta_bar, which
    vanishes at resonance; at exact degeneracy it is set to 0 by
    continuity.
    """
    g, lam = params.gamma, params.lam
    if params.variant is ModelVariant.RWA:
        omega_plus, omega_minus = _rwa_mode_frequencies(g, lam)
    elif params.variant is ModelVariant.FULL:
        omega_plus, omega_minus = _full_mode_frequencies(g, lam)
    else:
        report = stability_check(params)
        if not report.stable:
            raise UnstableSystem(
                "classical dynamics unstable for "
                f"gamma={g:g}, lam={lam:g} ({params.variant.value}); "
                f"max |Re eigenvalue| = {report.max_real_part:.3e}",
                report,
            )
        freqs = sorted(abs(v.imag) for v in report.eigenvalues)
        # Eigenvalues come in conjugate pairs (+i w, -i w); freqs is
        # (w-, w-, w+, w+) after sorting.
        omega_minus, omega_plus = freqs[0], freqs[2]

    delta = omega_plus - omega_minus
    if delta < DEGENERACY_EPS:
        beta = 0.0
    elif params.variant is ModelVariant.RWA:
        beta = (g - 1.0) / delta
    else:
        beta = (omega_plus**2 + omega_minus**2 - 2.0) / ((omega_plus + omega_minus) * delta)
    return PolaritonSpectrum(omega_plus=omega_plus, omega_minus=omega_minus, beta=beta)


def require_finite_period(spectrum: PolaritonSpectrum) -> float:
    """Return the beat period, raising :class:`DegenerateSplitting` if infinite."""
    if spectrum.degenerate:
        raise DegenerateSplitting(
            "mode frequencies are degenerate (splitting < "
            f"{DEGENERACY_EPS:g}); the beat period is infinite"
        )
    return spectrum.period_T


def lambda_from_ion_parameters(
    n_particles: int,
    g0: float,
    mass: float,
    omega: float,
    mirror_area: float,
) -> float:
    """Dimensionless collective coupling for N identical trapped charges.

    Parameters
    ----------
    n_particles:
        Number of particles N (integer >= 1).
    g0:
        Effective charge per particle in units of the elementary charge.
    mass:
        Particle mass in kg.
    omega:
        Matter oscillation angular frequency in rad/s.
    mirror_area:
        Effective cavity mirror area in m^2.

    Returns
    -------
    float
        lam = sqrt(N (g0 e)^2 / (pi eps0 c A m omega)).  The scaling
        lam ~ sqrt(N) is exact.
    """
    if int(n_particles) != n_particles or n_particles < 1:
        raise NonPositiveInput(f"n_particles must be an integer >= 1, got {n_particles!r}")
    for name, value in (
        ("g0", g0),
        ("mass", mass),
        ("omega", omega),
        ("mirror_area", mirror_area),
    ):
        if not (math.isfinite(value) and value > 0):
            raise NonPositiveInput(f"{name} must be strictly positive and finite, got {value!r}")
    charge = g0 * CODATA["e"]
    denom = math.pi * CODATA["epsilon_0"] * CODATA["c"] * mirror_area * mass * omega
    return math.sqrt(n_particles * charge**2 / denom)

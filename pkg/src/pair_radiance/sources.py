"""Harmonic amplitudes of the orbiting sources.

Each source is a time-periodic perturbation alpha(r, t) whose space-time
Fourier transform splits into harmonics m*Omega. The reduced amplitude
returned here is the real factor multiplying i^m exp(i m phi); the phase is
kept as metadata because rates only use |amplitude|^2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, OutOfRegimeError, SingularInputError
from .special import HELICITY_PAIRS, Helicity, bessel_j, form_factor
from .units import C, DerivedOrbit, OrbitInput, derive_orbit

DENSITY_RTOL = 1e-6
FINE_TUNING_RTOL = 1e-12


class SourceKind(enum.Enum):
    DIELECTRIC_SPHERE = "DielectricSphere"
    BINARY_DIELECTRIC = "BinaryDielectric"
    BINARY_METRIC = "BinaryMetric"


class AlphaVariant(enum.Enum):
    """Prefactor of the metric amplitude.

    PAPER uses 16 pi^2 / k^2, the default; REDERIVED uses 4 pi / k^2 from
    the regularized transform of 1/r outside a ball.
    """

    PAPER = "paper"
    REDERIVED = "rederived"


@dataclass(frozen=True)
class SourceChannel:
    kind: SourceKind
    allowed_pairs: frozenset
    rate_normalization: float

    def allows(self, pair) -> bool:
        return tuple(pair) in self.allowed_pairs


_DIELECTRIC_NORM = 1.0 / ((2.0 * math.pi) ** 5 * 8.0)
_METRIC_NORM = 2.0 / (2.0 * math.pi) ** 5

OPPOSITE_PAIRS = frozenset({(Helicity.L, Helicity.R), (Helicity.R, Helicity.L)})


def channel_for(kind: SourceKind) -> SourceChannel:
    if kind is SourceKind.BINARY_METRIC:
        return SourceChannel(kind, OPPOSITE_PAIRS, _METRIC_NORM)
    return SourceChannel(kind, frozenset(HELICITY_PAIRS), _DIELECTRIC_NORM)


@dataclass(frozen=True)
class SphereConfig:
    """Homogeneous sphere of radius ``a`` on a circle of radius ``R``.

    ``kappa`` is 1/eps_r - 1 (or 1/mu_r - 1 for a magnetic sphere).
    """

    a: float
    kappa: float
    R: float
    omega: float

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidInputError("sphere radius must be positive")
        if not self.R > 0 or not self.omega > 0:
            raise InvalidInputError("orbit radius and omega must be positive")
        if not self.kappa > -1.0:
            raise InvalidInputError("kappa must exceed -1")
        if not self.a < self.R:
            raise InvalidInputError("sphere radius must be smaller than the orbit radius")
        if self.v_R >= 1.0:
            raise OutOfRegimeError(f"v_R={self.v_R:.6g} is not subluminal")

    @classmethod
    def from_permittivity(cls, a, eps_r, R, omega):
        return cls(a=a, kappa=1.0 / eps_r - 1.0, R=R, omega=omega)

    @property
    def v_R(self) -> float:
        return self.R * self.omega / C

    @property
    def T(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class BinaryConfig:
    """Two spheres on circular orbits about their common centre of mass.

    Densities default to M_i / (4 pi a_i^3 / 3); when given they must agree
    with that value to ``DENSITY_RTOL``.
    """

    orbit: OrbitInput
    a1: float
    a2: float
    kappa1: float = 0.0
    kappa2: float = 0.0
    rho1: float | None = None
    rho2: float | None = None

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise InvalidInputError("body radii must be positive")
        for name, kap in (("kappa1", self.kappa1), ("kappa2", self.kappa2)):
            if not kap > -1.0:
                raise InvalidInputError(f"{name} must exceed -1")
        masses = (self.M1, self.M2)
        for i, (a, rho) in enumerate(((self.a1, self.rho1), (self.a2, self.rho2))):
            implied = masses[i] / (4.0 * math.pi * a**3 / 3.0)
            if rho is None:
                object.__setattr__(self, f"rho{i + 1}", implied)
            elif not rho > 0:
                raise InvalidInputError(f"rho{i + 1} must be positive")
            elif abs(rho / implied - 1.0) > DENSITY_RTOL:
                raise InvalidInputError(
                    f"rho{i + 1}={rho:.6g} inconsistent with body mass and radius "
                    f"(expected {implied:.6g})"
                )
        if not self.a1 + self.a2 < self.derived.R:
            raise InvalidInputError(
                f"bodies overlap: a1 + a2 = {self.a1 + self.a2:.6g} m >= R = {self.derived.R:.6g} m"
            )

    @cached_property
    def derived(self) -> DerivedOrbit:
        return derive_orbit(self.orbit)

    @property
    def mu(self) -> float:
        return self.orbit.mu

    @property
    def M1(self) -> float:
        return self.orbit.mu * self.orbit.M_total

    @property
    def M2(self) -> float:
        return (1.0 - self.orbit.mu) * self.orbit.M_total

    @property
    def kappa_over_rho_eff(self) -> float:
        """Effective kappa/rho of the binary, kappa1/rho1 - kappa2/rho2."""
        return self.kappa1 / self.rho1 - self.kappa2 / self.rho2

    @property
    def fine_tuned(self) -> bool:
        k1, k2 = self.kappa1 / self.rho1, self.kappa2 / self.rho2
        scale = max(abs(k1), abs(k2))
        return scale == 0.0 or abs(k1 - k2) <= FINE_TUNING_RTOL * scale

    def body_positions(self, t):
        """Positions R_1(t), R_2(t) (m), each of shape (..., 3)."""
        d = self.derived
        ph = d.omega * np.asarray(t, dtype=float)
        u = np.stack([np.cos(ph), np.sin(ph), np.zeros_like(ph)], axis=-1)
        return (1.0 - self.mu) * d.R * u, -self.mu * d.R * u


@dataclass(frozen=True)
class HarmonicAmplitude:
    """Reduced harmonic amplitude (m^3); full value is value * i^m exp(i m phi)."""

    m: int
    value: np.ndarray | float
    k: np.ndarray | float
    kperp: np.ndarray | float
    kind: SourceKind
    variant: AlphaVariant | None = None

    @property
    def abs2(self):
        return np.abs(self.value) ** 2

    def phase(self, phi):
        return (1j) ** self.m * np.exp(1j * self.m * np.asarray(phi))

    def full(self, phi):
        return self.value * self.phase(phi)


def _check_k(m, k, kperp, allow_zero_k=True):
    if int(m) != m or m < 0:
        raise InvalidInputError(f"harmonic index must be a nonnegative integer, got {m!r}")
    k = np.asarray(k, dtype=float)
    kperp = np.asarray(kperp, dtype=float)
    if np.any(kperp < 0) or np.any(k < 0):
        raise InvalidInputError("k and kperp must be nonnegative")
    if np.any(kperp > k * (1.0 + 1e-12)):
        raise InvalidInputError("kperp cannot exceed k")
    if not allow_zero_k and np.any(k == 0):
        raise SingularInputError("metric amplitude is singular at k = 0")
    return int(m), k, np.minimum(kperp, k)


def alpha_m_sphere(cfg: SphereConfig, m: int, k, kperp) -> HarmonicAmplitude:
    m, k, kperp = _check_k(m, k, kperp)
    val = (4.0 * math.pi * cfg.a**3 / 3.0) * cfg.kappa * form_factor(k * cfg.a) * bessel_j(
        m, kperp * cfg.R
    )
    return HarmonicAmplitude(m, val, k, kperp, SourceKind.DIELECTRIC_SPHERE)


def alpha_m_binary_dielectric(cfg: BinaryConfig, m: int, k, kperp) -> HarmonicAmplitude:
    m, k, kperp = _check_k(m, k, kperp)
    R, mu, M = cfg.derived.R, cfg.mu, cfg.orbit.M_total
    sign = -1.0 if m % 2 else 1.0
    first = mu * cfg.kappa1 / cfg.rho1 * form_factor(k * cfg.a1) * bessel_j(m, (1.0 - mu) * kperp * R)
    second = (1.0 - mu) * cfg.kappa2 / cfg.rho2 * form_factor(k * cfg.a2) * bessel_j(m, mu * kperp * R)
    return HarmonicAmplitude(m, M * (first + sign * second), k, kperp, SourceKind.BINARY_DIELECTRIC)


def metric_prefactor(variant: AlphaVariant) -> float:
    return 16.0 * math.pi**2 if variant is AlphaVariant.PAPER else 4.0 * math.pi


def alpha_m_binary_metric(
    cfg: BinaryConfig, m: int, k, kperp, variant: AlphaVariant = AlphaVariant.PAPER
) -> HarmonicAmplitude:
    """Harmonic amplitude of the weak-field metric perturbation.

    -P/k^2 [r1 cos(k a1) J_m((1-mu) kperp R) + (-1)^m r2 cos(k a2) J_m(mu kperp R)]
    with P = 16 pi^2 (``PAPER``) or 4 pi (``REDERIVED``).
    """
    variant = AlphaVariant(variant)
    m, k, kperp = _check_k(m, k, kperp, allow_zero_k=False)
    d = cfg.derived
    mu, R = cfg.mu, d.R
    sign = -1.0 if m % 2 else 1.0
    bracket = d.r1 * np.cos(k * cfg.a1) * bessel_j(m, (1.0 - mu) * kperp * R) + sign * d.r2 * np.cos(
        k * cfg.a2
    ) * bessel_j(m, mu * kperp * R)
    val = -metric_prefactor(variant) / k**2 * bracket
    if np.ndim(val) == 0:
        val = float(val)
    return HarmonicAmplitude(m, val, k, kperp, SourceKind.BINARY_METRIC, variant)


def alpha_m_time_oracle(trajectory_weight: float, m: int, kperp_r: float, phi: float = 0.0,
                        n_nodes: int | None = None) -> complex:
    """One-period average (1/T) int dt exp(i m Omega t) exp(i s kperp R cos(Omega t - phi)).

    ``trajectory_weight`` s scales the orbit (s = 1 - mu for body 1, -mu for
    body 2). Evaluated with the periodic trapezoid rule, which converges
    geometrically for this entire integrand; the result should equal
    i^m exp(i m phi) J_m(s kperp R).
    """
    x = trajectory_weight * kperp_r
    if n_nodes is None:
        n_nodes = 2 * int(abs(m) + abs(x) + 40)
    tau = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    vals = np.exp(1j * m * tau) * np.exp(1j * x * np.cos(tau - phi))
    return complex(np.mean(vals))


class WeakFieldAlpha(NamedTuple):
    exact: float
    linear: float


def weak_field_alpha(cfg: BinaryConfig, r, t: float) -> WeakFieldAlpha:
    """sqrt(h0/h1) - 1 from the summed weak-field metric, and its linearization."""
    r = np.asarray(r, dtype=float)
    p1, p2 = cfg.body_positions(t)
    d1 = float(np.linalg.norm(r - p1))
    d2 = float(np.linalg.norm(r - p2))
    if d1 < cfg.a1 or d2 < cfg.a2:
        raise InvalidInputError("point lies inside a body; the interior metric is not modeled")
    d = cfg.derived
    u = d.r1 / d1 + d.r2 / d2
    h0, h1 = 1.0 - u, 1.0 + u
    return WeakFieldAlpha(exact=math.sqrt(h0 / h1) - 1.0, linear=-u)


class M1M2Ratio(NamedTuple):
    approx: float
    exact: float


def grav_m1_m2_ratio(cfg: BinaryConfig, K: float, Kperp: float,
                     variant: AlphaVariant = AlphaVariant.PAPER) -> M1M2Ratio:
    """|alpha_1(K)|^2 / |alpha_2(2K)|^2 for the metric source.

    ``approx`` is v_R^2 ((1-2mu)/2 + 2 (a1^2-a2^2)/R^2 * K/Kperp)^2, which
    assumes a collinear pair (|K| ~ Omega/c) moving near the orbital plane.
    It diverges as Kperp -> 0, where both amplitudes vanish.
    """
    if not Kperp > 0:
        raise SingularInputError("Kperp must be positive")
    d = cfg.derived
    approx = d.v_R**2 * ((1.0 - 2.0 * cfg.mu) / 2.0 + 2.0 * (cfg.a1**2 - cfg.a2**2) / d.R**2 * K / Kperp) ** 2
    a1 = alpha_m_binary_metric(cfg, 1, K, Kperp, variant).abs2
    a2 = alpha_m_binary_metric(cfg, 2, 2.0 * K, 2.0 * Kperp, variant).abs2
    return M1M2Ratio(approx=float(approx), exact=float(a1 / a2))


def harmonic_cutoff(v_R: float, tol: float, kind: SourceKind = SourceKind.DIELECTRIC_SPHERE) -> int:
    """Smallest m_max whose neglected harmonics are bounded by ``tol``.

    Harmonic n is estimated relative to the leading one (m=1, or m=2 for
    the metric source) by the product of asymptotic suppression ratios
    t_j = v^2 (1 + 1/j)^(2j+2). Since t_j decreases in j, the tail beyond
    m_max is bounded by P_{m_max+1} / (1 - t_{m_max+1}).
    """
    if not (0.0 < v_R < 1.0):
        raise InvalidInputError("v_R must lie in (0, 1)")
    if not (0.0 < tol <= 1.0):
        raise InvalidInputError("tol must lie in (0, 1]")
    if math.e**2 * v_R**2 >= 1.0:
        raise OutOfRegimeError("harmonic series does not converge for v_R >= 1/e")
    lead = 2 if kind is SourceKind.BINARY_METRIC else 1
    m_max = lead
    prod = 1.0
    while True:
        t = v_R**2 * (1.0 + 1.0 / m_max) ** (2 * m_max + 2)
        prod *= t
        if t < 1.0 and prod / (1.0 - t) < tol:
            return m_max
        m_max += 1


# --- source objects consumed by the phase-space and rate layers ---


class Source:
    """Common interface: harmonic |amplitude|^2 on top of an orbit."""

    kind: SourceKind

    def __init__(self, config, variant=AlphaVariant.PAPER):
        self.config = config
        self.variant = AlphaVariant(variant)

    def __repr__(self):
        return f"{type(self).__name__}({self.config!r}, variant={self.variant.value!r})"

    @property
    def channel(self) -> SourceChannel:
        return channel_for(self.kind)

    @property
    def leading_harmonic(self) -> int:
        return 2 if self.kind is SourceKind.BINARY_METRIC else 1

    @property
    def singular_at_zero_k(self) -> bool:
        return self.kind is SourceKind.BINARY_METRIC

    def amplitude(self, m, k, kperp) -> HarmonicAmplitude:
        raise NotImplementedError

    def amplitude_sq(self, m, k, kperp):
        return self.amplitude(m, k, kperp).abs2

    def m_max(self, tol: float = 1e-6) -> int:
        return harmonic_cutoff(self.v_R, tol, self.kind)


class SphereSource(Source):
    kind = SourceKind.DIELECTRIC_SPHERE

    omega = property(lambda self: self.config.omega)
    v_R = property(lambda self: self.config.v_R)
    T = property(lambda self: self.config.T)

    def amplitude(self, m, k, kperp):
        return alpha_m_sphere(self.config, m, k, kperp)


class _BinarySource(Source):
    omega = property(lambda self: self.config.derived.omega)
    v_R = property(lambda self: self.config.derived.v_R)
    T = property(lambda self: self.config.derived.T)


class BinaryDielectricSource(_BinarySource):
    kind = SourceKind.BINARY_DIELECTRIC

    def amplitude(self, m, k, kperp):
        return alpha_m_binary_dielectric(self.config, m, k, kperp)


class BinaryMetricSource(_BinarySource):
    kind = SourceKind.BINARY_METRIC

    def amplitude(self, m, k, kperp):
        return alpha_m_binary_metric(self.config, m, k, kperp, self.variant)

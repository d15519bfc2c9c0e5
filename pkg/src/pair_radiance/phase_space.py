"""Two-photon kinematics on the energy shell and differential pair rates.

Photon wave vectors are measured in units of m*Omega/c, so the pair at
harmonic m has dimensionless energies l and 1 - l. The orbital plane is the
x-y plane. Rate densities are per unit d^3l1 d^3l2 delta(l1 + l2 - 1), with
the delta function consumed analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .rules import gauss_legendre, split_gauss_legendre
from .special import Helicity
from .sources import Source, SourceKind
from .units import C

BACK_TO_BACK_L = 1e-6


@dataclass(frozen=True)
class PairGeometry:
    """Reduced kinematics of a photon pair (arrays broadcast together).

    ``chi`` is the elevation of the total wave vector above the orbital
    plane; it is NaN for an exactly back-to-back pair (``back_to_back``).
    """

    l: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    cos_theta: np.ndarray
    L: np.ndarray
    Lperp: np.ndarray
    chi: np.ndarray

    @property
    def theta(self):
        return np.arccos(np.clip(self.cos_theta, -1.0, 1.0))

    @property
    def back_to_back(self):
        return self.L == 0.0

    @property
    def total_vector(self):
        return self.l[..., None] * self.n1 + (1.0 - self.l)[..., None] * self.n2


def reduce_pair(l, n1, n2, check: bool = True) -> PairGeometry:
    """Build the reduced geometry of a pair with energy fractions (l, 1 - l)."""
    l = np.asarray(l, dtype=float)
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    if check:
        if np.any(l <= 0) or np.any(l >= 1):
            raise InvalidInputError("energy fraction l must lie in (0, 1)")
        for n in (n1, n2):
            if np.any(np.abs(np.linalg.norm(n, axis=-1) - 1.0) > 1e-12):
                raise InvalidInputError("photon directions must be unit vectors")
    K = l[..., None] * n1 + (1.0 - l)[..., None] * n2
    Lperp = np.hypot(K[..., 0], K[..., 1])
    L = np.hypot(Lperp, K[..., 2])
    with np.errstate(invalid="ignore"):
        chi = np.where(L > 0, np.arctan2(K[..., 2], Lperp), np.nan)
    cos_theta = np.clip(np.sum(n1 * n2, axis=-1), -1.0, 1.0)
    return PairGeometry(l=l, n1=n1, n2=n2, cos_theta=cos_theta, L=L, Lperp=Lperp, chi=chi)


def geometry_from_angles(l, c1, c2, dphi, phi1=0.0) -> PairGeometry:
    """Geometry from (l, cos theta1, cos theta2, phi2 - phi1) and an overall azimuth."""
    l, c1, c2, dphi, phi1 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (l, c1, c2, dphi, phi1)))
    s1 = np.sqrt(np.maximum(0.0, 1.0 - c1 * c1))
    s2 = np.sqrt(np.maximum(0.0, 1.0 - c2 * c2))
    phi2 = phi1 + dphi
    n1 = np.stack([s1 * np.cos(phi1), s1 * np.sin(phi1), c1], axis=-1)
    n2 = np.stack([s2 * np.cos(phi2), s2 * np.sin(phi2), c2], axis=-1)
    return reduce_pair(l, n1, n2, check=False)


def one_plus_cos_theta(geom: PairGeometry):
    """1 + cos(theta), switching to (L^2 - (l1 - l2)^2) / (2 l1 l2) for L < 1e-6."""
    l1, l2 = geom.l, 1.0 - geom.l
    direct = 1.0 + geom.cos_theta
    near = (geom.L**2 - (l1 - l2) ** 2) / (2.0 * l1 * l2)
    return np.where(geom.L < BACK_TO_BACK_L, np.maximum(near, 0.0), direct)


@dataclass(frozen=True)
class RateDensity:
    value: np.ndarray
    m: int
    channel: tuple


def allowed_channels(source: Source):
    """Allowed helicity pairs in a fixed order (LL, LR, RL, RR)."""
    return sorted(source.channel.allowed_pairs, key=lambda p: (p[0].value, p[1].value))


def _overlap(channel, cos_theta, one_plus_cos):
    if channel[0] is channel[1]:
        return (1.0 - cos_theta) ** 2 / 4.0
    return one_plus_cos**2 / 4.0


def _amplitude_sq(source: Source, m, L, Lperp):
    scale = m * source.omega / C
    if source.singular_at_zero_k:
        # fixed direction, L clamped: the metric amplitude is finite as K -> 0
        tiny = L < BACK_TO_BACK_L
        if np.any(tiny):
            safe = np.where(L > 0, L, 1.0)
            q = np.where(L > 0, Lperp / safe, 1.0)
            L = np.where(tiny, BACK_TO_BACK_L, L)
            Lperp = np.where(tiny, BACK_TO_BACK_L * q, Lperp)
    return source.amplitude_sq(m, scale * L, scale * Lperp)


def density_from_invariants(source: Source, m: int, channel, l, cos_theta, one_plus_cos, L, Lperp):
    """Rate density for one helicity channel from rotation-invariant variables."""
    chan = source.channel
    if not chan.allows(channel):
        return np.zeros(np.broadcast(l, L).shape)
    if source.kind is SourceKind.BINARY_METRIC:
        # LR and RL label the same two-photon states; each carries half of
        # the opposite-helicity total.
        norm = 0.5 * chan.rate_normalization
    else:
        norm = chan.rate_normalization
    shell = (m * source.omega) ** 7 / C**6
    amp2 = _amplitude_sq(source, m, L, Lperp)
    return norm * shell * l * (1.0 - l) * _overlap(channel, cos_theta, one_plus_cos) * amp2


def differential_rate(source: Source, geom: PairGeometry, channel, m: int) -> RateDensity:
    """Differential pair rate (1/s per unit reduced phase-space volume).

    Disallowed helicity channels (LL, RR for the metric source) give exact
    zeros.
    """
    channel = tuple(Helicity(h) for h in channel)
    val = density_from_invariants(
        source, m, channel, geom.l, geom.cos_theta, one_plus_cos_theta(geom), geom.L, geom.Lperp
    )
    return RateDensity(value=val, m=m, channel=channel)


def total_density(source: Source, geom: PairGeometry, m: int):
    """Sum of :func:`differential_rate` over all allowed helicity channels."""
    opc = one_plus_cos_theta(geom)
    total = 0.0
    for ch in allowed_channels(source):
        total = total + density_from_invariants(source, m, ch, geom.l, geom.cos_theta, opc, geom.L, geom.Lperp)
    return total


@dataclass(frozen=True)
class AngularTable:
    chi: np.ndarray
    intensity: np.ndarray
    peak: float  # rate per unit solid angle of the pair direction at the peak (1/s/sr)


def _rate_per_solid_angle(source, m, chi, orders):
    # By rotation invariance of the phase-space measure, the rate per unit
    # solid angle of K is (1/4pi) times the full integral with Lperp = L cos(chi).
    l, wl = split_gauss_legendre(orders, 0.0, 1.0, 0.5)
    c, wc = gauss_legendre(orders, -1.0, 1.0)
    Lg, Cg = np.meshgrid(l, c, indexing="ij")
    W = np.outer(wl * l**2 * (1.0 - l) ** 2, wc)
    L = np.sqrt(np.maximum(Lg**2 + (1.0 - Lg) ** 2 + 2.0 * Lg * (1.0 - Lg) * Cg, 0.0))
    out = np.empty(len(chi))
    for i, x in enumerate(chi):
        cx = 0.0 if abs(abs(x) - math.pi / 2) < 1e-12 else abs(math.cos(x))
        Lperp = L * cx
        dens = 0.0
        for ch in allowed_channels(source):
            dens = dens + density_from_invariants(source, m, ch, Lg, Cg, 1.0 + Cg, L, Lperp)
        out[i] = 2.0 * math.pi * np.sum(W * dens)
    return out


def angular_distribution(source: Source, m: int, chi_grid, orders: int = 48) -> AngularTable:
    """Pair rate per unit solid angle of the pair direction versus chi, peak-normalized."""
    chi = np.asarray(chi_grid, dtype=float)
    if chi.size == 0:
        raise InvalidInputError("chi grid is empty")
    if np.any(np.abs(chi) > math.pi / 2 + 1e-12):
        raise InvalidInputError("chi must lie in [-pi/2, pi/2]")
    vals = _rate_per_solid_angle(source, m, np.append(chi, 0.0), orders)
    peak = float(np.max(vals))
    rel = vals[:-1] / peak if peak > 0 else np.zeros(chi.size)
    return AngularTable(chi=chi, intensity=rel, peak=peak)


def spectrum_density_l(source: Source, m: int, l_values, orders: int = 32):
    """dRate/dl at fixed energy fractions l, integrating over both directions."""
    c, wc = gauss_legendre(orders, -1.0, 1.0)
    p, wp = split_gauss_legendre(orders, 0.0, 2.0 * math.pi, math.pi)
    C1, C2, P = np.meshgrid(c, c, p, indexing="ij")
    W = wc[:, None, None] * wc[None, :, None] * wp[None, None, :]
    out = np.empty(len(l_values))
    for i, l in enumerate(l_values):
        g = geometry_from_angles(l, C1, C2, P)
        out[i] = 2.0 * math.pi * l**2 * (1.0 - l) ** 2 * np.sum(W * total_density(source, g, m))
    return out


def spectrum(source: Source, m: int, grid, orders: int = 32) -> np.ndarray:
    """Table of (omega1/Omega, dRate/domega1) at harmonic m.

    ``grid`` holds omega1/Omega values in (0, m). Returns an (n, 2) array.
    """
    x = np.asarray(grid, dtype=float)
    if np.any(x <= 0) or np.any(x >= m):
        raise InvalidInputError("spectrum grid must lie in (0, m)")
    dens = spectrum_density_l(source, m, x / m, orders)
    return np.column_stack([x, dens / (m * source.omega)])

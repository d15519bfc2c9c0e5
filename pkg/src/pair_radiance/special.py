"""Bessel functions, the uniform-sphere form factor, and circular polarization.

Everything here is vectorized over numpy arrays. Only |.|^2 of polarization
overlaps enters any rate, so the global phase of the helicity vectors is a
convention (documented on :func:`helicity_vector`).
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError

BESSEL_MAX_ORDER = 20
_SERIES_SWITCH = 2.0
_SERIES_TERMS = 24
_RESCALE = 1e250


class Helicity(enum.Enum):
    """Circular polarization; L carries positive helicity."""

    L = "L"
    R = "R"

    @property
    def sign(self) -> int:
        return 1 if self is Helicity.L else -1

    def flipped(self) -> "Helicity":
        return Helicity.R if self is Helicity.L else Helicity.L


HELICITY_PAIRS = tuple((a, b) for a in Helicity for b in Helicity)


def _bessel_series(m: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half**m / math.factorial(m)
    q = half * half
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = -term * q / (k * (k + m))
        total += term
    return total


def _bessel_miller(m: int, x: np.ndarray) -> np.ndarray:
    # Backward recurrence from an order well above max(m, x), normalized by
    # J0 + 2*sum(J_2k) = 1.
    top = max(m, float(np.max(x)))
    start = int(top + 30 + 6 * math.sqrt(top))
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    two_over_x = 2.0 / x
    for n in range(start, 0, -1):
        j_prev = n * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the (unnormalized) order n-1
        if n - 1 == m:
            result = j_cur.copy()
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            result *= scale
    norm += j_cur
    return result / norm


def bessel_j(m: int, x):
    """Bessel function of the first kind J_m(x) for integer order m >= 0.

    Uses the ascending series for |x| < 2 and Miller's backward recurrence
    otherwise. Relative accuracy is ~1e-13 away from zeros of J_m for
    |x| <= 50 and m <= 20; larger orders work but are not part of the
    validated range.
    """
    if int(m) != m or m < 0:
        raise InvalidInputError(f"order must be a nonnegative integer, got {m!r}")
    m = int(m)
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)):
        raise InvalidInputError("bessel_j received NaN")
    if not np.all(np.isfinite(xa)):
        raise InvalidInputError("bessel_j requires finite arguments")
    ax = np.abs(xa)
    out = np.empty_like(ax)
    small = ax < _SERIES_SWITCH
    if np.any(small):
        out[small] = _bessel_series(m, ax[small])
    if not np.all(small):
        out[~small] = _bessel_miller(m, ax[~small])
    if m % 2 == 1:
        out = np.where(xa < 0, -out, out)
    return out if out.ndim else float(out)


_FF_SWITCH = 0.1


def form_factor(x):
    """Normalized Fourier transform of a uniform ball, f(x) = 3(sin x - x cos x)/x^3.

    Below x = 0.1 the Taylor series 1 - x^2/10 + x^4/280 - x^6/15120 is used
    to avoid the 0/0 cancellation.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)) or np.any(xa < 0):
        raise InvalidInputError("form_factor requires x >= 0")
    x2 = xa * xa
    series = 1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = 3.0 * (np.sin(xa) - xa * np.cos(xa)) / (xa * x2)
    out = np.where(xa < _FF_SWITCH, series, closed)
    return out if out.ndim else float(out)


def _as_unit(khat, tol=1e-12):
    k = np.asarray(khat, dtype=float)
    if k.shape[-1] != 3:
        raise InvalidInputError("direction vectors must have a trailing axis of length 3")
    norm = np.linalg.norm(k, axis=-1)
    if np.any(np.abs(norm - 1.0) > tol):
        raise InvalidInputError("direction vectors must be unit length")
    return k


def helicity_vector(khat, lam: Helicity) -> np.ndarray:
    """Circular polarization vector for propagation direction ``khat``.

    Convention: e_L = exp(i*phi) (theta_hat + i*phi_hat) / sqrt(2), with
    (theta, phi) the polar angles of khat. This is smooth everywhere except
    at khat = -z, where phi = 0 is used. e_R is the complex conjugate.
    The helicity condition i khat x e_L = e_L holds.
    """
    k = _as_unit(khat)
    kx, ky, kz = k[..., 0], k[..., 1], k[..., 2]
    rho = np.hypot(kx, ky)
    pole = rho == 0.0
    safe = np.where(pole, 1.0, rho)
    cphi = np.where(pole, 1.0, kx / safe)
    sphi = np.where(pole, 0.0, ky / safe)
    theta_hat = np.stack([kz * cphi, kz * sphi, -rho], axis=-1)
    phi_hat = np.stack([-sphi, cphi, np.zeros_like(kx)], axis=-1)
    phase = (cphi + 1j * sphi)[..., None]
    e = phase * (theta_hat + 1j * phi_hat) / math.sqrt(2.0)
    return e if lam is Helicity.L else np.conj(e)


def polarization_overlap(khat1, lam1: Helicity, khat2, lam2: Helicity):
    """|e_lam1(k1) . e_lam2(k2)|^2 from explicit vectors (bilinear dot product)."""
    e1 = helicity_vector(khat1, lam1)
    e2 = helicity_vector(khat2, lam2)
    # symmetrized so that swapping the two photons is bit-exact (FMA-based
    # complex products need not commute to the last bit)
    val = np.abs(np.sum(0.5 * (e1 * e2 + e2 * e1), axis=-1)) ** 2
    return val if val.ndim else float(val)


def overlap_closed_form(cos_theta, same_helicity: bool):
    """(1 - cos)^2/4 for equal helicities, (1 + cos)^2/4 for opposite ones."""
    c = np.asarray(cos_theta, dtype=float)
    return (1.0 - c) ** 2 / 4.0 if same_helicity else (1.0 + c) ** 2 / 4.0


class SuppressionRatio(NamedTuple):
    asymptotic: float
    exact: float


def harmonic_suppression_ratio(m: int, v: float) -> SuppressionRatio:
    """Ratio of consecutive harmonic strengths at orbital speed ``v``.

    ``exact`` is (m+1)^2 J_{m+1}^2((m+1)v) / (m^2 J_m^2(m v)); ``asymptotic``
    is the small-v estimate v^2 (1 + 1/m)^(2m+2). For v -> 0 the leading
    Bessel series gives exact -> v^2 (1 + 1/m)^(2m+2) / 4, so the
    asymptotic estimate overstates the ratio by a factor 4 (conservative
    for harmonic truncation).
    """
    if int(m) != m or m < 1:
        raise InvalidInputError(f"m must be a positive integer, got {m!r}")
    if not (0.0 < v < 1.0):
        raise InvalidInputError(f"v must lie in (0, 1), got {v!r}")
    m = int(m)
    asym = v * v * (1.0 + 1.0 / m) ** (2 * m + 2)
    # the amplitude ratio is formed before squaring; J_m(m v)^2 underflows at large m
    amp = (m + 1) * bessel_j(m + 1, (m + 1) * v) / (m * bessel_j(m, m * v))
    return SuppressionRatio(asymptotic=asym, exact=amp * amp)

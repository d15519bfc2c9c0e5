"""Pinned physical constants and Kepler-orbit derivation.

All values are SI. The constants are frozen at build time so that every
reported number is reproducible to the last bit on IEEE-754 platforms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InvalidInputError, NonrelativisticWarning, OutOfRegimeError

G = 6.67430e-11  # m^3 kg^-1 s^-2
C = 299_792_458.0  # m / s
HBAR = 1.054571817e-34  # J s
M_SUN = 1.98892e30  # kg

SECONDS_PER_YEAR = 365.25 * 86400.0  # Julian year

NONRELATIVISTIC_LIMIT = 0.1


@dataclass(frozen=True)
class PhysicalConstants:
    G: float = G
    c: float = C
    hbar: float = HBAR
    M_sun: float = M_SUN

    def as_dict(self) -> dict[str, float]:
        return {"G": self.G, "c": self.c, "hbar": self.hbar, "M_sun": self.M_sun}


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class OrbitInput:
    """Circular two-body orbit: total mass, mass fraction and either omega or T."""

    M_total: float
    mu: float
    omega: float | None = None
    T: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.M_total) and self.M_total > 0):
            raise InvalidInputError(f"M_total must be positive, got {self.M_total!r}")
        if not (0.0 < self.mu < 1.0):
            raise InvalidInputError(f"mu must lie in (0, 1), got {self.mu!r}")
        if (self.omega is None) == (self.T is None):
            raise InvalidInputError("exactly one of omega or T must be given")
        given = self.omega if self.omega is not None else self.T
        if not (math.isfinite(given) and given > 0):
            raise InvalidInputError(f"orbital frequency/period must be positive, got {given!r}")

    @property
    def angular_frequency(self) -> float:
        return self.omega if self.omega is not None else 2.0 * math.pi / self.T


@dataclass(frozen=True)
class DerivedOrbit:
    """Kepler-derived orbit quantities.

    Attributes
    ----------
    R : float
        Separation of the two bodies (m).
    v_R : float
        Relative orbital speed R*omega/c.
    T, omega : float
        Period (s) and angular frequency (rad/s).
    r1, r2 : float
        Schwarzschild radii of the bodies (m).
    """

    R: float
    v_R: float
    T: float
    omega: float
    r1: float
    r2: float
    M_total: float
    mu: float

    @property
    def schwarzschild_radius(self) -> float:
        return 2.0 * G * self.M_total / C**2


def derive_orbit(inp: OrbitInput) -> DerivedOrbit:
    """Derive separation, speed, period and Schwarzschild radii from Kepler's law.

    Raises :class:`OutOfRegimeError` for v_R >= 1 and warns with
    :class:`NonrelativisticWarning` above v_R = 0.1.
    """
    omega = inp.angular_frequency
    T = inp.T if inp.T is not None else 2.0 * math.pi / omega
    R = (G * inp.M_total / omega**2) ** (1.0 / 3.0)
    v_R = R * omega / C
    if v_R >= 1.0:
        raise OutOfRegimeError(f"orbital speed v_R={v_R:.6g} is not subluminal")
    if v_R > NONRELATIVISTIC_LIMIT:
        warnings.warn(
            f"v_R={v_R:.3g} exceeds {NONRELATIVISTIC_LIMIT}; nonrelativistic closed forms degrade",
            NonrelativisticWarning,
            stacklevel=2,
        )
    rs = 2.0 * G * inp.M_total / C**2
    return DerivedOrbit(
        R=R, v_R=v_R, T=T, omega=omega,
        r1=inp.mu * rs, r2=(1.0 - inp.mu) * rs,
        M_total=inp.M_total, mu=inp.mu,
    )


def check_kepler_identity(orbit: DerivedOrbit) -> float:
    """Largest relative residual of v_R^3 = G M omega / c^3 and v_R = R omega / c."""
    kepler = orbit.v_R**3 * C**3 / (G * orbit.M_total * orbit.omega) - 1.0
    speed = orbit.R * orbit.omega / (C * orbit.v_R) - 1.0
    return max(abs(kepler), abs(speed))

"""Total pair rates and radiated powers.

Closed forms set the O(1) phase-space integral to one, as order-of-magnitude
estimates. The numerical pipeline integrates the full differential rate
(exact Bessel functions and form factors) harmonic by harmonic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import InvalidInputError, NonrelativisticWarning, OutOfRegimeError
from .phase_space import total_density
from .quadrature import DEFAULT_ORDER, custom_weight, dimensionless_integrals, integrate_reduced
from .sources import (
    AlphaVariant,
    BinaryConfig,
    BinaryDielectricSource,
    BinaryMetricSource,
    Source,
    SourceKind,
    SphereConfig,
    SphereSource,
)
from .units import C, G, HBAR, NONRELATIVISTIC_LIMIT, SECONDS_PER_YEAR

# Prefactor of P_M/P_E after Kepler reduction: (64 * 2) / pi^2 * 512 pi^4.
RATIO_PREFACTOR = 2.0 * 64.0 * 512.0 * math.pi**2


def _check_regime(v_R):
    if v_R >= 1.0:
        raise OutOfRegimeError(f"superluminal orbit, v_R={v_R!r}")
    if v_R >= NONRELATIVISTIC_LIMIT:
        warnings.warn(f"closed form is nonrelativistic; v_R={v_R:.3g} >= {NONRELATIVISTIC_LIMIT}",
                      NonrelativisticWarning, stacklevel=3)


def power_sphere_closed(cfg: SphereConfig) -> float:
    """kappa^2/(288 pi^2) (a/R)^6 v_R^8 hbar Omega / T, in watts."""
    _check_regime(cfg.v_R)
    return cfg.kappa**2 / (288.0 * math.pi**2) * (cfg.a / cfg.R) ** 6 * cfg.v_R**8 * HBAR * cfg.omega / cfg.T


def _binary_dielectric_coefficient(cfg: BinaryConfig) -> float:
    d = cfg.derived
    mu = cfg.mu
    return cfg.orbit.M_total**2 * mu**2 * (1.0 - mu) ** 2 / d.R**6


def power_binary_dielectric_closed(cfg: BinaryConfig) -> float:
    """Radiated power of two dielectric stars, in watts.

    Generic case: M^2 mu^2 (1-mu)^2 / (512 pi^4) (kappa/rho)_eff^2 v_R^8 / R^6 * hbar Omega / T.
    When kappa1/rho1 == kappa2/rho2 the m = 1 amplitude cancels at leading
    order and the m = 2 estimate M^2 mu^2 (1-mu)^2 (kappa/rho)^2 v_R^10 /
    (4 pi^4 R^6) * 2 hbar Omega / T is returned instead (see
    ``BinaryConfig.fine_tuned``).
    """
    d = cfg.derived
    _check_regime(d.v_R)
    base = _binary_dielectric_coefficient(cfg) * HBAR * d.omega / d.T
    if cfg.fine_tuned:
        kr = cfg.kappa1 / cfg.rho1
        return base * kr**2 * d.v_R**10 / (4.0 * math.pi**4) * 2.0
    return base * cfg.kappa_over_rho_eff**2 * d.v_R**8 / (512.0 * math.pi**4)


def metric_power_coefficient(cfg: BinaryConfig) -> float:
    """64/pi^2 mu^2 (1-mu)^2 v_R^10, the power in units of 2 hbar Omega / T."""
    mu, v = cfg.mu, cfg.derived.v_R
    return 64.0 / math.pi**2 * mu**2 * (1.0 - mu) ** 2 * v**10


def power_binary_metric_closed(cfg: BinaryConfig) -> float:
    d = cfg.derived
    _check_regime(d.v_R)
    return metric_power_coefficient(cfg) * 2.0 * HBAR * d.omega / d.T


def closed_form_rate(source: Source, with_integral: bool = True) -> float:
    """Leading-harmonic pair rate (1/s) from the small-v_R closed forms.

    With ``with_integral`` the computed IE / IM replace the unit placeholder.
    """
    ie, im = dimensionless_integrals() if with_integral else (None, None)
    ie_val = ie.value if ie else 1.0
    im_val = im.value if im else 1.0
    if source.kind is SourceKind.DIELECTRIC_SPHERE:
        cfg = source.config
        return cfg.kappa**2 / (288.0 * math.pi**2 * cfg.T) * (cfg.a / cfg.R) ** 6 * cfg.v_R**8 * ie_val
    cfg = source.config
    d = cfg.derived
    if source.kind is SourceKind.BINARY_DIELECTRIC:
        if cfg.fine_tuned:
            raise InvalidInputError("no m=1 closed form for a fine-tuned binary; use the numeric rate")
        return (_binary_dielectric_coefficient(cfg) * cfg.kappa_over_rho_eff**2 * d.v_R**8
                / (512.0 * math.pi**4 * d.T) * ie_val)
    return 64.0 / (math.pi**2 * d.T) * cfg.mu**2 * (1.0 - cfg.mu) ** 2 * d.v_R**10 * im_val


@dataclass(frozen=True)
class RateBreakdown:
    total: float
    per_harmonic: dict = field(default_factory=dict)
    m_max: int = 1


def harmonic_rate(source: Source, m: int, orders=DEFAULT_ORDER, threads=None) -> float:
    weight = custom_weight(lambda g: total_density(source, g, m))
    return integrate_reduced(weight, orders, threads).value


def total_rate_numeric(source: Source, m_max: int | None = None, orders=DEFAULT_ORDER,
                       threads: int | None = None, tol: float = 1e-6) -> RateBreakdown:
    """Pair rate (1/s) summed over harmonics 1..m_max of the full differential rate."""
    if m_max is None:
        m_max = source.m_max(tol)
    per = {m: harmonic_rate(source, m, orders, threads) for m in range(1, m_max + 1)}
    return RateBreakdown(total=math.fsum(per.values()), per_harmonic=per, m_max=m_max)


@dataclass(frozen=True)
class GravitonPower:
    paper: float
    quadrupole: float


def graviton_power(orbit) -> GravitonPower:
    """Gravitational-wave power (W): 64 pi/5 v^7 M c^2 / T and the quadrupole formula.

    The quadrupole variant, (32/5) mu^2 (1-mu)^2 v^10 c^5 / G, carries the
    mass-ratio dependence the first expression lacks; at mu = 1/2 it is
    exactly 1/16 of it.
    """
    d = orbit.derived if isinstance(orbit, BinaryConfig) else orbit
    paper = 64.0 * math.pi / 5.0 * d.v_R**7 * d.M_total * C**2 / d.T
    quad = 32.0 / 5.0 * d.mu**2 * (1.0 - d.mu) ** 2 * d.v_R**10 * C**5 / G
    return GravitonPower(paper=paper, quadrupole=quad)


def power_ratio_formula(kappa_over_rho: float, M_total: float, omega: float) -> float:
    """6.5e5 (rho/kappa)^2 G^(8/3) M^(2/3) / (c^2 Omega^(10/3)) with the exact prefactor."""
    if kappa_over_rho == 0:
        raise ZeroDivisionError("effective kappa is zero; the dielectric power vanishes")
    return RATIO_PREFACTOR / kappa_over_rho**2 * G ** (8.0 / 3.0) * M_total ** (2.0 / 3.0) / (
        C**2 * omega ** (10.0 / 3.0)
    )


@dataclass(frozen=True)
class PowerRatio:
    formula: float
    recomputed: float


def power_ratio(cfg: BinaryConfig) -> PowerRatio:
    """P_M / P_E from the reduced formula and from the two closed-form powers."""
    kr = cfg.kappa_over_rho_eff
    if kr == 0:
        raise ZeroDivisionError("effective kappa is zero; the dielectric power vanishes")
    d = cfg.derived
    formula = power_ratio_formula(kr, cfg.orbit.M_total, d.omega)
    generic_pe = _binary_dielectric_coefficient(cfg) * kr**2 * d.v_R**8 / (512.0 * math.pi**4) * HBAR * d.omega / d.T
    return PowerRatio(formula=formula, recomputed=power_binary_metric_closed(cfg) / generic_pe)


def waiting_time(P: float, m: int, omega: float) -> float:
    """Mean time (years) to emit one pair of energy m hbar Omega at power P."""
    if not P > 0:
        raise InvalidInputError("power must be positive")
    return m * HBAR * omega / P / SECONDS_PER_YEAR


@dataclass
class PowerReport:
    """Cross-check of closed forms, numeric rates and graviton power.

    Fields that do not apply to the configured system are ``None``.
    """

    P_E: float | None = None
    P_M: float | None = None
    P_G_paper: float | None = None
    P_G_quadrupole: float | None = None
    pair_rate: float | None = None
    waiting_time: float | None = None
    ratio_PM_PE: float | None = None
    metric_coefficient: float | None = None
    integrals: dict = field(default_factory=dict)
    closed_form_vs_numeric: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "P_E": self.P_E,
            "P_M": self.P_M,
            "P_G_paper": self.P_G_paper,
            "P_G_quadrupole": self.P_G_quadrupole,
            "pair_rate": self.pair_rate,
            "waiting_time": self.waiting_time,
            "ratio_PM_PE": self.ratio_PM_PE,
            "metric_coefficient": self.metric_coefficient,
            "integrals": dict(self.integrals),
            "closed_form_vs_numeric": dict(self.closed_form_vs_numeric),
            "flags": list(self.flags),
        }


def crosscheck_report(cfg, orders=DEFAULT_ORDER, threads=None, numeric: bool = True) -> PowerReport:
    """Assemble every closed-form and numeric quantity for a sphere or binary config.

    Discrepancies are recorded as ratios and flags, never reconciled.
    """
    rep = PowerReport()
    ie, im = dimensionless_integrals()
    rep.integrals = {"IE": ie.value, "IM": im.value}

    if isinstance(cfg, SphereConfig):
        rep.P_E = power_sphere_closed(cfg)
        rep.pair_rate = rep.P_E / (HBAR * cfg.omega)
        if numeric:
            src = SphereSource(cfg)
            num = total_rate_numeric(src, orders=orders, threads=threads).total
            rep.closed_form_vs_numeric["sphere"] = _ratio(num, closed_form_rate(src))
        rep.flags.append("metric: not-applicable")
        rep.flags.append("graviton: not-applicable")
    elif isinstance(cfg, BinaryConfig):
        d = cfg.derived
        rep.P_M = power_binary_metric_closed(cfg)
        rep.metric_coefficient = metric_power_coefficient(cfg)
        gp = graviton_power(cfg)
        rep.P_G_paper, rep.P_G_quadrupole = gp.paper, gp.quadrupole
        rep.pair_rate = rep.P_M / (2.0 * HBAR * d.omega)
        rep.flags.append(f"graviton paper/quadrupole = {gp.paper / gp.quadrupole!r}")
        if cfg.kappa1 != 0.0 or cfg.kappa2 != 0.0:
            rep.P_E = power_binary_dielectric_closed(cfg)
            if cfg.fine_tuned:
                rep.flags.append("dielectric: fine-tuned kappa/rho, m=2 branch")
            elif cfg.kappa_over_rho_eff != 0.0:
                rep.ratio_PM_PE = rep.P_M / rep.P_E
        else:
            rep.flags.append("dielectric: not-applicable (kappa1 = kappa2 = 0)")
        if numeric:
            closed = closed_form_rate(BinaryMetricSource(cfg))
            for variant in AlphaVariant:
                src = BinaryMetricSource(cfg, variant)
                num = total_rate_numeric(src, orders=orders, threads=threads).total
                rep.closed_form_vs_numeric[f"metric[{variant.value}]"] = _ratio(num, closed)
            if rep.P_E is not None and not cfg.fine_tuned:
                src = BinaryDielectricSource(cfg)
                num = total_rate_numeric(src, orders=orders, threads=threads).total
                rep.closed_form_vs_numeric["binary_dielectric"] = _ratio(num, closed_form_rate(src))
    else:
        raise InvalidInputError(f"unsupported configuration type {type(cfg).__name__}")

    rep.waiting_time = 1.0 / (rep.pair_rate * SECONDS_PER_YEAR) if rep.pair_rate else math.inf
    for key, val in rep.closed_form_vs_numeric.items():
        if abs(val["ratio"] - 1.0) > 0.02:
            rep.flags.append(f"{key}: numeric/closed = {val['ratio']:.6g}")
    return rep


def _ratio(numeric, closed):
    return {"numeric": numeric, "closed": closed, "ratio": numeric / closed if closed else math.nan}

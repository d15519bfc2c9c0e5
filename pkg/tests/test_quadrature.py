import math

import numpy as np
import pytest
import sympy
from scipy import integrate

from pair_radiance.errors import InvalidInputError, NumericalFailure
from pair_radiance.phase_space import geometry_from_angles, one_plus_cos_theta, reduce_pair
from pair_radiance.quadrature import (
    IE,
    IM,
    OMEGA_PRODUCT,
    UNIT,
    IntegralEstimate,
    Method,
    custom_weight,
    dimensionless_integrals,
    integrate_reduced,
    mc_estimate,
)

UNIT_EXACT = 8 * math.pi**2 / 15
OMEGA_EXACT = 16 * math.pi**2 / 140


def rotational_average_oracle():
    """IE and IM by averaging the pair direction over the sphere.

    <Lperp^2> = 2 L^2 / 3 and <(Lperp/L)^4> = 8/15; the two direction
    integrals then reduce to 8 pi^2 times one integral over cos(theta).
    """
    l, c = sympy.symbols("l c")
    L2 = l**2 + (1 - l) ** 2 + 2 * l * (1 - l) * c
    shell = l**3 * (1 - l) ** 3
    ie = 8 * sympy.pi**2 * sympy.integrate(shell * (1 + c**2) * sympy.Rational(2, 3) * L2, (c, -1, 1), (l, 0, 1))
    im = 8 * sympy.pi**2 * sympy.Rational(8, 15) * sympy.integrate(shell * (1 + c) ** 2, (c, -1, 1), (l, 0, 1))
    return sympy.nsimplify(ie), sympy.nsimplify(im)


# frozen from rotational_average_oracle()
IE_EXACT = 32 * math.pi**2 / 567
IM_EXACT = 128 * math.pi**2 / 1575


def test_oracle_values_are_frozen_correctly():
    ie, im = rotational_average_oracle()
    assert sympy.simplify(ie - 32 * sympy.pi**2 / 567) == 0
    assert sympy.simplify(im - 128 * sympy.pi**2 / 1575) == 0


def test_beta_function_weights():
    assert integrate_reduced(UNIT).value == pytest.approx(UNIT_EXACT, rel=1e-13)
    assert integrate_reduced(OMEGA_PRODUCT).value == pytest.approx(OMEGA_EXACT, rel=1e-13)


def test_named_integrals_match_oracle():
    ie, im = dimensionless_integrals()
    assert ie.value == pytest.approx(IE_EXACT, rel=1e-12)
    assert im.value == pytest.approx(IM_EXACT, rel=1e-9)
    assert 0.1 < ie.value < 100 and 0.1 < im.value < 100
    assert ie.std_error == 0.0 and ie.method is Method.NESTED_GAUSS


def test_dimensionless_integrals_deterministic():
    dimensionless_integrals.cache_clear()
    a = dimensionless_integrals()
    dimensionless_integrals.cache_clear()
    b = dimensionless_integrals()
    assert a[0].value == b[0].value and a[1].value == b[1].value


@pytest.mark.parametrize("w", [IE, IM])
def test_order_doubling_converged(w):
    lo = integrate_reduced(w, 32).value
    hi = integrate_reduced(w, 64).value
    assert abs(hi / lo - 1) < 1e-6


def test_separable_weight_factorizes():
    w = custom_weight(lambda g: np.exp(g.l) * (1 + g.n1[..., 2]) ** 3)
    got = integrate_reduced(w, (24, 8, 4, 4)).value
    fl = integrate.quad(lambda l: l**2 * (1 - l) ** 2 * math.exp(l), 0, 1, epsabs=0, epsrel=1e-13)[0]
    fc = integrate.quad(lambda c: (1 + c) ** 3, -1, 1)[0]
    assert got == pytest.approx(2 * math.pi * fl * fc * 2 * 2 * math.pi, rel=1e-9)


@pytest.mark.parametrize("w", [IE, IM])
def test_photon_exchange_symmetry(w):
    rng = np.random.default_rng(9)
    l, c1, c2, p = rng.uniform(0, 1, 1000), rng.uniform(-1, 1, 1000), rng.uniform(-1, 1, 1000), rng.uniform(0, 2 * math.pi, 1000)
    a = w.integrand(geometry_from_angles(l, c1, c2, p))
    b = w.integrand(geometry_from_angles(1 - l, c2, c1, -p))
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)
    swapped = custom_weight(lambda g: w.integrand(geometry_from_angles(1 - g.l, g.n2[..., 2], g.n1[..., 2], -np.arctan2(
        g.n2[..., 1], g.n2[..., 0]))))
    assert integrate_reduced(swapped).value == pytest.approx(integrate_reduced(w).value, rel=1e-9)


def test_im_back_to_back_branch():
    # a pair with L = 1e-4: compare the expansion with the direct formula
    l = 0.5 + 2e-5
    n1 = np.array([0.0, 0.0, 1.0])
    ang = 1.2e-4
    n2 = np.array([math.sin(ang), 0.0, -math.cos(ang)])
    g = reduce_pair(l, n1, n2)
    assert 1e-5 < g.L < 1e-3
    near = (g.L**2 - (2 * l - 1) ** 2) / (2 * l * (1 - l))
    assert near == pytest.approx(1 + g.cos_theta, rel=1e-6)
    g_tiny = reduce_pair(0.5, n1, -n1)
    assert one_plus_cos_theta(g_tiny) == 0.0
    assert np.isfinite(IM.integrand(g_tiny)) and IM.integrand(g_tiny) == 0.0


def test_im_integrand_finite_on_many_points():
    rng = np.random.default_rng(123)
    worst = 0.0
    for _ in range(10):
        u = rng.random((1_000_000, 4))
        g = geometry_from_angles(u[:, 0], 2 * u[:, 1] - 1, 2 * u[:, 2] - 1, 2 * math.pi * u[:, 3])
        vals = IM.integrand(g)
        assert np.all(np.isfinite(vals))
        worst = max(worst, float(np.max(vals)))
    assert worst <= 1.0


def test_mc_unit_weight_within_three_sigma():
    est = mc_estimate(UNIT, 1_000_000, seed=5)
    assert abs(est.value - UNIT_EXACT) < 3 * est.std_error
    assert est.method is Method.MONTE_CARLO and est.n_evals == 1_000_000


@pytest.mark.parametrize("w,exact", [(IE, IE_EXACT), (IM, IM_EXACT)])
def test_mc_agrees_with_deterministic(w, exact):
    est = mc_estimate(w, 1_000_000, seed=17)
    det = integrate_reduced(w).value
    assert abs(est.value - det) < max(3 * est.std_error, 1e-3 * det)
    assert det == pytest.approx(exact, rel=1e-9)


def test_mc_error_scales_as_inverse_sqrt_n():
    small = mc_estimate(IE, 10_000, seed=1)
    large = mc_estimate(IE, 1_000_000, seed=1)
    assert small.std_error / large.std_error == pytest.approx(10.0, rel=0.2)


def test_results_independent_of_threads():
    assert mc_estimate(IE, 200_000, seed=3, threads=1).value == mc_estimate(IE, 200_000, seed=3, threads=4).value
    assert integrate_reduced(IM, 16, threads=1).value == integrate_reduced(IM, 16, threads=3).value


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("PAIR_RADIANCE_THREADS", "3")
    a = mc_estimate(IE, 100_000, seed=8)
    monkeypatch.delenv("PAIR_RADIANCE_THREADS")
    assert a.value == mc_estimate(IE, 100_000, seed=8).value


def test_seed_changes_mc_stream():
    assert mc_estimate(IE, 10_000, seed=1).value != mc_estimate(IE, 10_000, seed=2).value


def test_non_finite_integrand_reports_coordinates():
    w = custom_weight(lambda g: np.where(g.l > 0.5, np.nan, 1.0))
    with pytest.raises(NumericalFailure, match="cos_theta1"):
        integrate_reduced(w, 8)
    with pytest.raises(NumericalFailure, match="l"):
        mc_estimate(w, 1000, seed=0)


def test_estimate_invariants():
    with pytest.raises(InvalidInputError):
        IntegralEstimate(1.0, 0.1, Method.NESTED_GAUSS, 10)
    with pytest.raises(InvalidInputError):
        IntegralEstimate(1.0, 0.0, Method.MONTE_CARLO, 0)
    with pytest.raises(InvalidInputError):
        mc_estimate(UNIT, 999, seed=0)
    with pytest.raises(InvalidInputError):
        integrate_reduced(UNIT, (8, 8, 8))

import math

import numpy as np
import pytest
from builders import chi2_per_dof, expected_chi_counts, expected_l_counts, metric_binary_at, sphere_at

from pair_radiance.errors import InvalidInputError
from pair_radiance.phase_space import allowed_channels
from pair_radiance.rates import harmonic_rate
from pair_radiance.sampler import (
    CSV_HEADER,
    Envelope,
    EnvelopeViolation,
    _target,
    build_envelope,
    read_events_csv,
    sample_pairs,
)
from pair_radiance.sources import BinaryMetricSource, SphereSource


@pytest.fixture(scope="module")
def sphere_source():
    return SphereSource(sphere_at(1e-2))


@pytest.fixture(scope="module")
def metric_source():
    return BinaryMetricSource(metric_binary_at(1e-2))


@pytest.fixture(scope="module")
def sphere_sample(sphere_source):
    return sample_pairs(sphere_source, 1, 30_000, seed=11)


def test_vacuum_source_gives_empty_stream():
    src = SphereSource(sphere_at(1e-2, kappa=0.0))
    env = build_envelope(src, 1)
    assert env.bound == 0.0
    s = sample_pairs(src, 1, 10, seed=0)
    assert len(s) == 0 and s.rate_estimate == 0.0


@pytest.mark.parametrize("which", ["sphere_source", "metric_source"])
def test_envelope_bounds_random_probes(which, request):
    src = request.getfixturevalue(which)
    m = src.leading_harmonic
    env = build_envelope(src, m)
    rng = np.random.default_rng(99)
    chans = env.channels
    worst = 0.0
    for _ in range(4):
        u = rng.random((250_000, 5))
        ch = rng.integers(0, len(chans), 250_000)
        f = _target(src, m, ch, chans, u[:, 0], 2 * u[:, 1] - 1, 2 * u[:, 2] - 1, 2 * math.pi * u[:, 3])
        worst = max(worst, float(f.max()))
    assert env.bound >= worst


def test_envelope_scales_with_kappa_squared():
    a = build_envelope(SphereSource(sphere_at(1e-2, kappa=-0.2)), 1).bound
    b = build_envelope(SphereSource(sphere_at(1e-2, kappa=-0.4)), 1).bound
    assert b / a == pytest.approx(4, rel=1e-12)


def test_event_invariants(sphere_sample):
    s = sphere_sample
    assert len(s) == 30_000
    e = np.linalg.norm(s.l1_vec, axis=1) + np.linalg.norm(s.l2_vec, axis=1)
    assert np.max(np.abs(e - 1)) < 1e-12
    first = next(s.events())
    assert first.weight == 1.0 and first.m == 1


def test_metric_events_have_opposite_helicities(metric_source):
    s = sample_pairs(metric_source, 2, 5000, seed=4)
    assert all(a is not b for a, b in zip(s.hel1, s.hel2))
    e = np.linalg.norm(s.l1_vec, axis=1) + np.linalg.norm(s.l2_vec, axis=1)
    assert np.max(np.abs(e - 2)) < 1e-12


def test_stream_independent_of_threads(sphere_source):
    a = sample_pairs(sphere_source, 1, 3000, seed=5, threads=1)
    b = sample_pairs(sphere_source, 1, 3000, seed=5, threads=4)
    assert np.array_equal(a.l1_vec, b.l1_vec) and np.array_equal(a.l2_vec, b.l2_vec)
    assert a.hel1 == b.hel1 and a.n_proposed == b.n_proposed
    c = sample_pairs(sphere_source, 1, 3000, seed=6, threads=1)
    assert not np.array_equal(a.l1_vec, c.l1_vec)


def test_chi_histogram_matches_angular_marginal(sphere_source, sphere_sample):
    edges = np.linspace(-math.pi / 2, math.pi / 2, 21)
    counts, _ = np.histogram(sphere_sample.chi, edges)
    expected = expected_chi_counts(sphere_source, 1, edges, len(sphere_sample))
    assert chi2_per_dof(counts, expected) < 2


def test_energy_fraction_histogram(sphere_source, sphere_sample):
    edges = np.linspace(0, 1, 21)
    counts, _ = np.histogram(sphere_sample.l_fraction, edges)
    expected = expected_l_counts(sphere_source, 1, edges, len(sphere_sample))
    assert chi2_per_dof(counts, expected) < 2
    # symmetric about 1/2: mirrored bins differ by Poisson noise only
    a, b = counts[:10], counts[::-1][:10]
    assert np.sum((a - b) ** 2 / (a + b)) / 10 < 2
    assert np.argmax(expected) in (9, 10)


def test_opening_angle_by_helicity(sphere_sample):
    s = sphere_sample
    theta = np.arccos(s.cos_theta)
    same = np.array([a is b for a, b in zip(s.hel1, s.hel2)])
    for mask, forward_suppressed in ((same, True), (~same, False)):
        near = np.sum(theta[mask] < math.pi / 4)
        far = np.sum(theta[mask] > 3 * math.pi / 4)
        assert (near < far) == forward_suppressed


def test_rate_estimator_matches_quadrature(sphere_source, sphere_sample):
    rate = harmonic_rate(sphere_source, 1)
    assert abs(sphere_sample.rate_estimate - rate) < 3 * sphere_sample.rate_std_error


def test_csv_round_trip(tmp_path, metric_source):
    s = sample_pairs(metric_source, 2, 200, seed=1)
    path = tmp_path / "events.csv"
    s.write_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    events = read_events_csv(path)
    assert len(events) == 200
    for i, ev in enumerate(events):
        assert np.array_equal(ev.l1_vec, s.l1_vec[i]) and np.array_equal(ev.l2_vec, s.l2_vec[i])
        assert ev.helicities == (s.hel1[i], s.hel2[i])
        assert ev.helicities in allowed_channels(metric_source)


def test_envelope_violation_is_fatal(sphere_source):
    tight = Envelope(bound=1e-60, m=1, channels=tuple(allowed_channels(sphere_source)))
    with pytest.raises(EnvelopeViolation):
        sample_pairs(sphere_source, 1, 10, seed=0, envelope=tight)


def test_needs_positive_event_count(sphere_source):
    with pytest.raises(InvalidInputError):
        sample_pairs(sphere_source, 1, 0, seed=0)

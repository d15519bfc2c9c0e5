"""Unweighted photon-pair events by rejection sampling.

Proposals are uniform in (l, cos theta1, cos theta2, phi1, dphi, channel).
The target density is l^2 (1-l)^2 times the differential rate of the
channel, and the envelope is a grid-scanned maximum times a safety
factor. Each block of proposals draws from its own stream keyed by
(seed, block index), so the accepted stream does not depend on how many
threads evaluate the blocks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailure
from .phase_space import allowed_channels, density_from_invariants, geometry_from_angles, one_plus_cos_theta
from .quadrature import block_rng, resolve_threads, _map_ordered
from .rules import gauss_legendre
from .sources import Source
from .special import Helicity

SAFETY = 1.5
SAMPLER_BLOCK = 1 << 15
CSV_HEADER = ["event", "m", "l1x", "l1y", "l1z", "l2x", "l2y", "l2z", "hel1", "hel2"]


class EnvelopeViolation(NumericalFailure):
    """A proposal's density exceeded the envelope bound."""


@dataclass(frozen=True)
class PairEvent:
    l1_vec: np.ndarray
    l2_vec: np.ndarray
    helicities: tuple
    m: int
    weight: float = 1.0


@dataclass(frozen=True)
class Envelope:
    bound: float
    m: int
    channels: tuple

    @property
    def volume(self) -> float:
        # l * cos1 * cos2 * phi1 * dphi, times the number of channels
        return 1.0 * 2.0 * 2.0 * (2.0 * math.pi) ** 2 * len(self.channels)


def _target(source, m, channel_idx, channels, l, c1, c2, dphi):
    g = geometry_from_angles(l, c1, c2, dphi)
    opc = one_plus_cos_theta(g)
    out = np.zeros_like(l)
    for i, ch in enumerate(channels):
        sel = channel_idx == i
        if np.any(sel):
            out[sel] = density_from_invariants(
                source, m, ch, g.l[sel], g.cos_theta[sel], opc[sel], g.L[sel], g.Lperp[sel]
            )
    return l**2 * (1.0 - l) ** 2 * out


def build_envelope(source: Source, m: int, grid: int = 24) -> Envelope:
    """Upper bound of the target density from a grid scan times ``SAFETY``."""
    channels = tuple(allowed_channels(source))
    l, _ = gauss_legendre(grid, 0.0, 1.0)
    l = np.concatenate([l, [0.5]])
    c = np.concatenate([gauss_legendre(grid, -1.0, 1.0)[0], [-1.0, 0.0, 1.0]])
    p = np.concatenate([np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False), [math.pi]])
    Lg, C1, C2, P = np.meshgrid(l, c, c, p, indexing="ij")
    best = 0.0
    for i in range(len(channels)):
        vals = _target(source, m, np.full(Lg.shape, i), channels, Lg, C1, C2, P)
        if not np.all(np.isfinite(vals)):
            raise NumericalFailure("non-finite density while scanning the envelope")
        best = max(best, float(np.max(vals)))
    return Envelope(bound=SAFETY * best, m=m, channels=channels)


@dataclass
class PairSample:
    """Accepted events (in proposal order) plus acceptance statistics."""

    m: int
    l1_vec: np.ndarray
    l2_vec: np.ndarray
    hel1: list
    hel2: list
    n_proposed: int
    n_accepted: int
    envelope: Envelope

    def __len__(self):
        return len(self.hel1)

    @property
    def acceptance(self) -> float:
        return self.n_accepted / self.n_proposed if self.n_proposed else 0.0

    @property
    def rate_estimate(self) -> float:
        """Pair rate (1/s) at this harmonic from the acceptance fraction."""
        return self.acceptance * self.envelope.bound * self.envelope.volume

    @property
    def rate_std_error(self) -> float:
        p = self.acceptance
        if not self.n_proposed:
            return 0.0
        return math.sqrt(p * (1.0 - p) / self.n_proposed) * self.envelope.bound * self.envelope.volume

    @property
    def l_fraction(self):
        e1 = np.linalg.norm(self.l1_vec, axis=1)
        return e1 / self.m

    @property
    def chi(self):
        K = self.l1_vec + self.l2_vec
        return np.arctan2(K[:, 2], np.hypot(K[:, 0], K[:, 1]))

    @property
    def cos_theta(self):
        n1 = self.l1_vec / np.linalg.norm(self.l1_vec, axis=1)[:, None]
        n2 = self.l2_vec / np.linalg.norm(self.l2_vec, axis=1)[:, None]
        return np.clip(np.sum(n1 * n2, axis=1), -1.0, 1.0)

    def events(self):
        for i in range(len(self)):
            yield PairEvent(self.l1_vec[i], self.l2_vec[i], (self.hel1[i], self.hel2[i]), self.m)

    def write_csv(self, path_or_file):
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for i in range(len(self)):
                w.writerow([i, self.m, *map(repr, map(float, self.l1_vec[i])),
                            *map(repr, map(float, self.l2_vec[i])), self.hel1[i].value, self.hel2[i].value])
        finally:
            if own:
                fh.close()


def _run_block(source, m, env, seed, b, block_size):
    rng = block_rng(seed, b)
    u = rng.random((block_size, 6))
    l = u[:, 0]
    c1 = 2.0 * u[:, 1] - 1.0
    c2 = 2.0 * u[:, 2] - 1.0
    phi1 = 2.0 * math.pi * u[:, 3]
    dphi = 2.0 * math.pi * u[:, 4]
    ch = rng.integers(0, len(env.channels), size=block_size)
    f = _target(source, m, ch, env.channels, l, c1, c2, dphi)
    if not np.all(np.isfinite(f)):
        raise NumericalFailure("non-finite density during sampling")
    if np.any(f > env.bound):
        i = int(np.argmax(f - env.bound))
        raise EnvelopeViolation(
            f"density {f[i]!r} exceeds envelope {env.bound!r} at l={l[i]!r}, "
            f"cos1={c1[i]!r}, cos2={c2[i]!r}, dphi={dphi[i]!r}"
        )
    keep = u[:, 5] * env.bound < f
    g = geometry_from_angles(l[keep], c1[keep], c2[keep], dphi[keep], phi1[keep])
    lk = l[keep][:, None]
    return m * lk * g.n1, m * (1.0 - lk) * g.n2, ch[keep]


def sample_pairs(source: Source, m: int, n_events: int, seed: int, envelope: Envelope | None = None,
                 threads: int | None = None, block_size: int = SAMPLER_BLOCK,
                 max_blocks: int = 100_000) -> PairSample:
    """Draw ``n_events`` unweighted pair events at harmonic ``m``.

    Rate statistics use every proposal in the blocks needed to reach
    ``n_events`` acceptances; events are the first ``n_events`` accepted
    in proposal order.
    """
    if n_events < 1:
        raise InvalidInputError("n_events must be at least 1")
    env = envelope if envelope is not None else build_envelope(source, m)
    empty = np.zeros((0, 3))
    if env.bound == 0.0:
        return PairSample(m, empty, empty, [], [], 0, 0, env)

    threads = resolve_threads(threads)
    v1, v2, chs = [], [], []
    accepted = 0
    n_blocks = 0
    while accepted < n_events:
        if n_blocks >= max_blocks:
            raise NumericalFailure("sampling did not reach the requested number of events")
        batch = range(n_blocks, n_blocks + threads)
        results = _map_ordered(lambda b: _run_block(source, m, env, seed, b, block_size), batch, threads)
        for res in results:
            if accepted >= n_events:
                break
            v1.append(res[0])
            v2.append(res[1])
            chs.append(res[2])
            accepted += len(res[2])
            n_blocks += 1

    l1 = np.concatenate(v1)
    l2 = np.concatenate(v2)
    ch = np.concatenate(chs)
    hel = [env.channels[i] for i in ch[:n_events]]
    return PairSample(
        m=m, l1_vec=l1[:n_events], l2_vec=l2[:n_events],
        hel1=[h[0] for h in hel], hel2=[h[1] for h in hel],
        n_proposed=n_blocks * block_size, n_accepted=accepted, envelope=env,
    )


def read_events_csv(path):
    """Parse an event file written by :meth:`PairSample.write_csv`."""
    rows = []
    with open(path, newline="") as fh:
        r = csv.DictReader(row for row in fh if not row.startswith("#"))
        if r.fieldnames != CSV_HEADER:
            raise InvalidInputError(f"unexpected event header {r.fieldnames}")
        for row in r:
            rows.append(PairEvent(
                np.array([float(row["l1x"]), float(row["l1y"]), float(row["l1z"])]),
                np.array([float(row["l2x"]), float(row["l2y"]), float(row["l2z"])]),
                (Helicity(row["hel1"]), Helicity(row["hel2"])),
                int(row["m"]),
            ))
    return rows

"""Integration over the two-photon energy shell.

The six-dimensional integral over (l1_vec, l2_vec) with delta(l1 + l2 - 1)
is written in coordinates (l, cos theta1, cos theta2, dphi); the overall
azimuth about the orbital axis integrates to 2 pi:

    I[w] = 2 pi int_0^1 dl l^2 (1-l)^2 int dc1 dc2 ddphi  w(geometry)

Two independent evaluators are provided: a tensor Gauss-Legendre rule
(l and dphi split into two panels at 1/2 and pi, where the pair can be
exactly back-to-back) and plain Monte Carlo with per-block seeded streams.
Both are bit-reproducible for a fixed configuration, whatever the number
of worker threads.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import InvalidInputError, NumericalFailure
from .phase_space import PairGeometry, geometry_from_angles, one_plus_cos_theta
from .rules import gauss_legendre, split_gauss_legendre

DEFAULT_ORDER = 32
MC_BLOCK = 1 << 16
THREADS_ENV = "PAIR_RADIANCE_THREADS"


class Method(enum.Enum):
    NESTED_GAUSS = "NestedGauss"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    std_error: float
    method: Method
    n_evals: int

    def __post_init__(self):
        if self.n_evals <= 0:
            raise InvalidInputError("an estimate needs at least one evaluation")
        if self.std_error < 0:
            raise InvalidInputError("std_error must be nonnegative")
        if self.method is Method.NESTED_GAUSS and self.std_error != 0.0:
            raise InvalidInputError("deterministic estimates carry no statistical error")


class WeightName(enum.Enum):
    IE = "IE"
    IM = "IM"
    UNIT = "Unit"
    OMEGA_PRODUCT = "OmegaProduct"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class WeightSpec:
    name: WeightName
    integrand: Callable[[PairGeometry], np.ndarray]


def _unit(g):
    return np.ones_like(g.l)


def _omega_product(g):
    return g.l * (1.0 - g.l)


def _ie(g):
    return (1.0 + g.cos_theta**2) * g.l * (1.0 - g.l) * g.Lperp**2


def _im(g):
    # L_perp/L is the cosine of the pair elevation; at L = 0 the factor
    # (1 + cos theta)^2 already vanishes.
    safe = np.where(g.L > 0, g.L, 1.0)
    ratio = np.where(g.L > 0, g.Lperp / safe, 0.0)
    return one_plus_cos_theta(g) ** 2 * g.l * (1.0 - g.l) * ratio**4


UNIT = WeightSpec(WeightName.UNIT, _unit)
OMEGA_PRODUCT = WeightSpec(WeightName.OMEGA_PRODUCT, _omega_product)
IE = WeightSpec(WeightName.IE, _ie)
IM = WeightSpec(WeightName.IM, _im)


def custom_weight(fn: Callable[[PairGeometry], np.ndarray]) -> WeightSpec:
    return WeightSpec(WeightName.CUSTOM, fn)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, int(threads))


def _map_ordered(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _check_finite(vals, coords: dict):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), vals.shape)
        where = {k: float(np.broadcast_to(v, vals.shape)[idx]) for k, v in coords.items()}
        raise NumericalFailure(f"non-finite integrand value {vals[idx]!r} at {where}")


@lru_cache(maxsize=8)
def _angle_grid(nc1, nc2, nphi):
    c1, w1 = gauss_legendre(nc1, -1.0, 1.0)
    c2, w2 = gauss_legendre(nc2, -1.0, 1.0)
    p, wp = split_gauss_legendre(nphi, 0.0, 2.0 * math.pi, math.pi)
    C1, C2, P = np.meshgrid(c1, c2, p, indexing="ij")
    W = w1[:, None, None] * w2[None, :, None] * wp[None, None, :]
    return C1, C2, P, W


def _orders(orders):
    if np.ndim(orders) == 0:
        return (int(orders),) * 4
    orders = tuple(int(o) for o in orders)
    if len(orders) != 4:
        raise InvalidInputError("orders must be an int or a 4-tuple (l, cos1, cos2, dphi)")
    return orders


def integrate_reduced(w: WeightSpec, orders=DEFAULT_ORDER, threads: int | None = None) -> IntegralEstimate:
    """Deterministic tensor Gauss-Legendre estimate of the shell integral of ``w``."""
    nl, nc1, nc2, nphi = _orders(orders)
    if min(nl, nc1, nc2, nphi) < 2:
        raise InvalidInputError("quadrature orders must be at least 2")
    l_nodes, l_weights = split_gauss_legendre(nl, 0.0, 1.0, 0.5)
    C1, C2, P, W = _angle_grid(nc1, nc2, nphi)

    def slab(i):
        l = l_nodes[i]
        g = geometry_from_angles(l, C1, C2, P)
        vals = np.asarray(w.integrand(g), dtype=float)
        vals = np.broadcast_to(vals, W.shape)
        _check_finite(vals, {"l": l, "cos_theta1": C1, "cos_theta2": C2, "dphi": P})
        return l_weights[i] * l**2 * (1.0 - l) ** 2 * float(np.sum(W * vals))

    parts = _map_ordered(slab, range(len(l_nodes)), resolve_threads(threads))
    value = 2.0 * math.pi * math.fsum(parts)
    return IntegralEstimate(value, 0.0, Method.NESTED_GAUSS, len(l_nodes) * W.size)


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent stream for block ``block`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block),)))


_BOX_VOLUME = 1.0 * 2.0 * 2.0 * 2.0 * math.pi


def mc_estimate(w: WeightSpec, n_samples: int, seed: int, threads: int | None = None,
                block_size: int = MC_BLOCK) -> IntegralEstimate:
    """Plain Monte Carlo estimate with uniform (l, cos theta1, cos theta2, dphi)."""
    n_samples = int(n_samples)
    if n_samples < 1000:
        raise InvalidInputError("Monte Carlo needs at least 1000 samples")
    n_blocks = -(-n_samples // block_size)

    def run(b):
        size = min(block_size, n_samples - b * block_size)
        u = block_rng(seed, b).random((size, 4))
        l, c1, c2, p = u[:, 0], 2.0 * u[:, 1] - 1.0, 2.0 * u[:, 2] - 1.0, 2.0 * math.pi * u[:, 3]
        g = geometry_from_angles(l, c1, c2, p)
        vals = np.asarray(w.integrand(g), dtype=float) * l**2 * (1.0 - l) ** 2
        _check_finite(vals, {"l": l, "cos_theta1": c1, "cos_theta2": c2, "dphi": p})
        f = 2.0 * math.pi * _BOX_VOLUME * vals
        return float(np.sum(f)), float(np.sum(f * f))

    sums = _map_ordered(run, range(n_blocks), resolve_threads(threads))
    s1 = math.fsum(s for s, _ in sums)
    s2 = math.fsum(q for _, q in sums)
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return IntegralEstimate(mean, math.sqrt(var / n_samples), Method.MONTE_CARLO, n_samples)


@lru_cache(maxsize=4)
def dimensionless_integrals(orders: int = DEFAULT_ORDER) -> tuple[IntegralEstimate, IntegralEstimate]:
    """The pure numbers entering the dielectric (IE) and metric (IM) rates."""
    return integrate_reduced(IE, orders), integrate_reduced(IM, orders)

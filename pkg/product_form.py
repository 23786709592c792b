# product_form.py
"""
Saturated product-form analysis of a contention graph or one of its
sub-networks.

    P_s  = prod_{i in s} rho_i / Z          over the independent sets s of the active links
    th_i = sum_{s containing i} P_s          (zero for links outside the sub-network)

Public API
----------
stationary_distribution(g, active=None) -> StationaryDistribution
saturated_throughputs(g, active=None)   -> np.ndarray  (length n, read-only)
isolated_throughput(rho)                -> float       rho / (1 + rho)

Results are memoised per (graph, mask); the cache is the thread-safe
functools.lru_cache and the returned arrays are read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from graph import ContentionGraph, enumerate_independent_sets

LOG_SPACE_LINKS = 16
LOG_SPACE_RHO = 100.0
CACHE_SIZE = 8192

ThroughputVector = np.ndarray


@dataclass(frozen=True)
class StationaryDistribution:
    states: Tuple[int, ...]
    probs: np.ndarray
    log_partition: float

    @property
    def partition(self) -> float:
        """Z itself, or inf once it leaves float range (log_partition stays exact)."""
        try:
            return math.exp(self.log_partition)
        except OverflowError:
            return math.inf

    def __len__(self) -> int:
        return len(self.states)


def isolated_throughput(rho: float) -> float:
    return rho / (1.0 + rho)


def _use_log_space(g: ContentionGraph) -> bool:
    return g.n > LOG_SPACE_LINKS or max(g.rho) > LOG_SPACE_RHO


def _state_bits(states: np.ndarray, n: int) -> np.ndarray:
    return ((states[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(float)


@lru_cache(maxsize=CACHE_SIZE)
def _distribution(g: ContentionGraph, active: int) -> StationaryDistribution:
    states = enumerate_independent_sets(g, active)
    bits = _state_bits(np.asarray(states, dtype=np.int64), g.n)

    if _use_log_space(g):
        logw = bits @ np.log(np.asarray(g.rho))
        top = float(logw.max())
        w = np.exp(logw - top)
        z = math.fsum(w)
        probs = w / z
        log_z = top + math.log(z)
    else:
        w = np.prod(np.where(bits > 0, np.asarray(g.rho), 1.0), axis=1)
        z = math.fsum(w)
        probs = w / z
        log_z = math.log(z)

    probs.flags.writeable = False
    return StationaryDistribution(states=tuple(states), probs=probs, log_partition=log_z)


def stationary_distribution(g: ContentionGraph, active: Optional[int] = None) -> StationaryDistribution:
    active = g.full_mask if active is None else int(active)
    return _distribution(g, active)


@lru_cache(maxsize=CACHE_SIZE)
def _throughputs(g: ContentionGraph, active: int) -> np.ndarray:
    dist = _distribution(g, active)
    bits = _state_bits(np.asarray(dist.states, dtype=np.int64), g.n)
    th = dist.probs @ bits
    th.flags.writeable = False
    return th


def saturated_throughputs(g: ContentionGraph, active: Optional[int] = None) -> ThroughputVector:
    active = g.full_mask if active is None else int(active)
    return _throughputs(g, active)


def clear_cache() -> None:
    _distribution.cache_clear()
    _throughputs.cache_clear()

# simulator.py
"""
Event-driven simulation of an idealised CSMA network with finite offered load.

Protocol per link
-----------------
- A link competes only while its buffer is non-empty (always, in saturated mode).
- A competing link counts down a backoff timer (mean mean_tx_time / rho_i)
  while no neighbour transmits. When a neighbour starts transmitting the timer
  freezes and the remaining time is recorded; it resumes from that remainder
  once every neighbour is silent again.
- At expiry the link transmits for an exponential time (mean mean_tx_time).
- After a transmission it draws a fresh backoff if packets remain, otherwise
  it leaves competition until the next Poisson arrival.

Events sharing a timestamp are ordered tx_end < backoff_expiry < arrival, then
by link index. Throughput is transmit airtime over the measured window
[warmup_fraction * duration, duration].

Public API
----------
SimConfig(...)
simulate(g, cfg, trace=None)                  -> SimResult
simulate_saturated(g, active, cfg, trace=None) -> SimResult
run_seeds(g, cfg, seeds, workers=1, active=None) -> PooledResult
audit_trace(g, trace)                          raises MutualExclusionError
write_trace_csv(trace, path_or_buf)
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from graph import ContentionGraph

DEFAULT_DURATION = 1e6
DEFAULT_WARMUP = 0.10
MEAN_TX_TIME = 1.0
SATURATION_EMPTY_FRACTION = 1e-3

BACKOFF_DISTS = ("exponential", "uniform", "deterministic")

# event ranks for simultaneous timestamps
TX_END, BACKOFF_EXPIRY, ARRIVAL = 0, 1, 2
EVENT_NAMES = {TX_END: "tx_end", BACKOFF_EXPIRY: "backoff_expiry", ARRIVAL: "arrival"}
TX_START = "tx_start"

_BLOCK = 8192


class SimConfigError(ValueError):
    """Invalid simulation configuration."""


class MutualExclusionError(RuntimeError):
    """Two neighbouring links transmitted at the same time."""


# ---------------------- config / results ----------------------

@dataclass(frozen=True)
class SimConfig:
    offered_load: Tuple[float, ...] = ()
    duration: float = DEFAULT_DURATION
    warmup_fraction: float = DEFAULT_WARMUP
    rng_seed: int = 0
    saturated_mode: bool = False
    mean_tx_time: float = MEAN_TX_TIME
    backoff_dist: str = "exponential"

    def validate(self, n: int) -> "SimConfig":
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise SimConfigError(f"duration must be positive, got {self.duration!r}")
        if not 0.0 <= self.warmup_fraction <= 0.5:
            raise SimConfigError(f"warmup_fraction {self.warmup_fraction!r} out of range. Allowed: [0, 0.5]")
        if not (math.isfinite(self.mean_tx_time) and self.mean_tx_time > 0.0):
            raise SimConfigError(f"mean_tx_time must be positive, got {self.mean_tx_time!r}")
        if self.backoff_dist not in BACKOFF_DISTS:
            raise SimConfigError(f"Invalid backoff_dist '{self.backoff_dist}'. Allowed: {list(BACKOFF_DISTS)}")
        if not self.saturated_mode:
            if len(self.offered_load) != n:
                raise SimConfigError(f"offered_load has {len(self.offered_load)} entries, expected {n}")
            for i, f in enumerate(self.offered_load):
                if not (math.isfinite(f) and 0.0 <= f < 1.0):
                    raise SimConfigError(f"offered load of link {i + 1} is {f!r}; allowed range is [0, 1)")
        return self

    def backoff_means(self, g: ContentionGraph) -> List[float]:
        return [self.mean_tx_time / r for r in g.rho]


def make_config(offered_load=(), **kw) -> SimConfig:
    return SimConfig(offered_load=tuple(float(f) for f in offered_load), **kw)


@dataclass
class SimResult:
    th_hat: np.ndarray
    queue_mean: np.ndarray
    empty_fraction: np.ndarray
    events_processed: int
    seed: int
    measured_time: float
    saturated_links: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "th_hat": [float(v) for v in self.th_hat],
            # saturated links have an unbounded backlog
            "queue_mean": [float(v) if math.isfinite(v) else None for v in self.queue_mean],
            "empty_fraction": [float(v) for v in self.empty_fraction],
            "events_processed": self.events_processed,
            "measured_time": self.measured_time,
            "saturated_links": [i + 1 for i in self.saturated_links],
        }


@dataclass
class PooledResult:
    runs: List[SimResult]
    th_mean: np.ndarray
    th_stderr: np.ndarray

    @property
    def aggregate(self) -> float:
        return float(self.th_mean.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "th_mean": [float(v) for v in self.th_mean],
            "th_stderr": [float(v) for v in self.th_stderr],
            "aggregate": self.aggregate,
            "runs": [r.to_dict() for r in self.runs],
        }


# ---------------------- random variates ----------------------

class _Variates:
    """Unit-mean variates drawn from a numpy Generator in blocks."""

    def __init__(self, rng: np.random.Generator, kind: str = "exponential"):
        self.rng = rng
        self.kind = kind
        self.buf: List[float] = []
        self.pos = 0

    def _refill(self) -> None:
        if self.kind == "exponential":
            block = self.rng.standard_exponential(_BLOCK)
        elif self.kind == "uniform":
            block = 2.0 * self.rng.random(_BLOCK)
        else:
            block = np.ones(_BLOCK)
        self.buf = block.tolist()
        self.pos = 0

    def next(self) -> float:
        if self.pos >= len(self.buf):
            self._refill()
        v = self.buf[self.pos]
        self.pos += 1
        return v


# ---------------------- the event loop ----------------------

def _run(
    g: ContentionGraph,
    cfg: SimConfig,
    competing: int,
    trace: Optional[list],
) -> SimResult:
    n = g.n
    nbrs = g.neighbors
    saturated = cfg.saturated_mode
    duration = float(cfg.duration)
    start = cfg.warmup_fraction * duration
    tx_mean = cfg.mean_tx_time
    backoff_mean = cfg.backoff_means(g)
    rates = [0.0] * n if saturated else [f / tx_mean for f in cfg.offered_load]

    rng = np.random.default_rng(cfg.rng_seed)
    expo = _Variates(rng)
    backoff = expo if cfg.backoff_dist == "exponential" else _Variates(rng, cfg.backoff_dist)

    queue = [0] * n
    busy = [0] * n                 # transmitting neighbours
    transmitting = [False] * n
    pending = [False] * n          # holds a backoff timer (running or frozen)
    running = [False] * n
    remaining = [0.0] * n
    resumed_at = [0.0] * n
    version = [0] * n
    tx_started = [0.0] * n

    airtime = [0.0] * n
    queue_area = [0.0] * n
    empty_time = [0.0] * n
    queue_mark = [start] * n

    fel: List[tuple] = []
    push = heapq.heappush
    pop = heapq.heappop
    events = 0

    def window(a: float, b: float) -> float:
        lo = a if a > start else start
        hi = b if b < duration else duration
        return hi - lo if hi > lo else 0.0

    def account_queue(i: int, now: float) -> None:
        if now > queue_mark[i]:
            dt = now - queue_mark[i]
            queue_area[i] += queue[i] * dt
            if queue[i] == 0:
                empty_time[i] += dt
            queue_mark[i] = now

    def begin_backoff(i: int, now: float) -> None:
        remaining[i] = backoff_mean[i] * backoff.next()
        pending[i] = True
        running[i] = False
        if busy[i] == 0:
            running[i] = True
            resumed_at[i] = now
            version[i] += 1
            push(fel, (now + remaining[i], BACKOFF_EXPIRY, i, version[i]))

    def freeze(j: int, now: float) -> None:
        if running[j]:
            remaining[j] -= now - resumed_at[j]
            if remaining[j] < 0.0:
                remaining[j] = 0.0
            running[j] = False
            version[j] += 1

    def resume(j: int, now: float) -> None:
        if pending[j] and not running[j]:
            running[j] = True
            resumed_at[j] = now
            version[j] += 1
            push(fel, (now + remaining[j], BACKOFF_EXPIRY, j, version[j]))

    for i in range(n):
        if not competing >> i & 1:
            continue
        if saturated:
            begin_backoff(i, 0.0)
        elif rates[i] > 0.0:
            push(fel, (expo.next() / rates[i], ARRIVAL, i, 0))

    while fel:
        now, kind, i, ver = pop(fel)
        if now > duration:
            break

        if kind == BACKOFF_EXPIRY:
            if ver != version[i]:
                continue
            events += 1
            for j in nbrs[i]:
                if transmitting[j]:
                    raise MutualExclusionError(f"link {i + 1} started while neighbour {j + 1} transmits at t={now}")
            pending[i] = False
            running[i] = False
            transmitting[i] = True
            tx_started[i] = now
            for j in nbrs[i]:
                busy[j] += 1
                if busy[j] == 1:
                    freeze(j, now)
            push(fel, (now + tx_mean * expo.next(), TX_END, i, 0))
            if trace is not None:
                trace.append((now, i, "backoff_expiry"))
                trace.append((now, i, TX_START))

        elif kind == TX_END:
            events += 1
            transmitting[i] = False
            airtime[i] += window(tx_started[i], now)
            for j in nbrs[i]:
                busy[j] -= 1
                if busy[j] == 0:
                    resume(j, now)
            if saturated:
                begin_backoff(i, now)
            else:
                account_queue(i, now)
                queue[i] -= 1
                if queue[i] > 0:
                    begin_backoff(i, now)
            if trace is not None:
                trace.append((now, i, "tx_end"))

        else:
            events += 1
            account_queue(i, now)
            queue[i] += 1
            push(fel, (now + expo.next() / rates[i], ARRIVAL, i, 0))
            if queue[i] == 1 and not transmitting[i] and not pending[i]:
                begin_backoff(i, now)
            if trace is not None:
                trace.append((now, i, "arrival"))

    for i in range(n):
        if transmitting[i]:
            airtime[i] += window(tx_started[i], duration)
        if not saturated:
            account_queue(i, duration)

    measured = duration - start
    th = np.array(airtime) / measured if measured > 0 else np.zeros(n)
    if saturated:
        active = np.array([competing >> i & 1 for i in range(n)], dtype=bool)
        q_mean = np.where(active, np.inf, 0.0)
        empty = np.where(active, 0.0, 1.0)
        flagged: Tuple[int, ...] = ()
    else:
        q_mean = np.array(queue_area) / measured if measured > 0 else np.zeros(n)
        empty = np.array(empty_time) / measured if measured > 0 else np.ones(n)
        flagged = tuple(
            i for i in range(n)
            if rates[i] > 0.0 and empty[i] < SATURATION_EMPTY_FRACTION
        )

    return SimResult(
        th_hat=th,
        queue_mean=q_mean,
        empty_fraction=empty,
        events_processed=events,
        seed=cfg.rng_seed,
        measured_time=measured,
        saturated_links=flagged,
    )


def simulate(g: ContentionGraph, cfg: SimConfig, trace: Optional[list] = None) -> SimResult:
    cfg.validate(g.n)
    return _run(g, cfg, g.full_mask, trace)


def simulate_saturated(
    g: ContentionGraph,
    active: int,
    cfg: SimConfig,
    trace: Optional[list] = None,
) -> SimResult:
    """Every link in `active` always has packets; the others never compete."""
    active = int(active)
    if active < 0 or active > g.full_mask:
        raise SimConfigError(f"Mask {active:#x} has bits outside links 0..{g.n - 1}")
    cfg = replace(cfg, saturated_mode=True).validate(g.n)
    return _run(g, cfg, active, trace)


# ---------------------- multiple seeds ----------------------

def _one_seed(args) -> SimResult:
    g, cfg, seed, active = args
    cfg = replace(cfg, rng_seed=int(seed))
    if active is None:
        return simulate(g, cfg)
    return simulate_saturated(g, active, cfg)


def pool_results(runs: Sequence[SimResult]) -> PooledResult:
    ths = np.vstack([r.th_hat for r in runs])
    mean = ths.mean(axis=0)
    if len(runs) > 1:
        stderr = ths.std(axis=0, ddof=1) / math.sqrt(len(runs))
    else:
        stderr = np.full(ths.shape[1], np.nan)
    return PooledResult(runs=list(runs), th_mean=mean, th_stderr=stderr)


def run_seeds(
    g: ContentionGraph,
    cfg: SimConfig,
    seeds: Sequence[int],
    workers: int = 1,
    active: Optional[int] = None,
) -> PooledResult:
    """
    Independent runs, one per seed, pooled in seed order. `active` switches
    to saturated runs of that sub-network.
    """
    if not seeds:
        raise SimConfigError("At least one seed is required")
    jobs = [(g, cfg, s, active) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            runs = list(ex.map(_one_seed, jobs))
    else:
        runs = [_one_seed(j) for j in jobs]
    return pool_results(runs)


# ---------------------- traces ----------------------

def audit_trace(g: ContentionGraph, trace: Sequence[Tuple[float, int, str]]) -> int:
    """
    Replay tx_start / tx_end events and check that no two neighbours are on
    air together. Returns the number of transmissions seen.
    """
    on_air = [False] * g.n
    nbrs = g.neighbors
    starts = 0
    for t, i, event in trace:
        if event == TX_START:
            for j in nbrs[i]:
                if on_air[j]:
                    raise MutualExclusionError(f"links {i + 1} and {j + 1} overlap at t={t}")
            if on_air[i]:
                raise MutualExclusionError(f"link {i + 1} started twice at t={t}")
            on_air[i] = True
            starts += 1
        elif event == "tx_end":
            on_air[i] = False
    return starts


def trace_frame(trace: Sequence[Tuple[float, int, str]]) -> pd.DataFrame:
    df = pd.DataFrame(trace, columns=["time", "link", "event"])
    df["link"] = df["link"] + 1
    return df


def write_trace_csv(trace: Sequence[Tuple[float, int, str]], path_or_buf) -> None:
    trace_frame(trace).to_csv(path_or_buf, index=False)

# experiments.py
"""
Evaluation pipeline: optimise the offered load of a network, pump that load
into the simulator and measure how closely the simulated throughputs track
the optimum.

Settings
--------
table1_ring        the 4-link ring with its published requirement vector
degree_sweep       random 10-link networks, mean degree 2 / 3 / 4
intensity_sweep    the degree-2 networks with rho scaled by 1 / 2 / 3
requirement_sweep  the degree-2 networks with requirements relaxed by 0 / 0.1 / 0.2

Public API
----------
default_spec(setting, **overrides) -> ExperimentSpec
derive_requirements(th0)           -> np.ndarray
evaluate_network(g, r, ...)        -> NetworkRecord
run_setting(spec)                  -> List[ErrorReport]
run_table1_ring(r=None, ...)       -> RingComparison
reports_to_frame / records_to_frame / render_table / write_reports
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from graph import DEFAULT_RHO, ContentionGraph, four_link_ring, random_graph
from lp import LpSolution, optimal_offered_load
from product_form import saturated_throughputs
from simulator import DEFAULT_DURATION, DEFAULT_WARMUP, make_config, run_seeds

SETTINGS = ("table1_ring", "degree_sweep", "intensity_sweep", "requirement_sweep")

ODD_LINK_MARGIN = 0.2     # links 1, 3, 5, ...
EVEN_LINK_MARGIN = 0.1    # links 2, 4, 6, ...

RING_REQUIREMENTS = (0.1994, 0.3779, 0.4263, 0.4271)
RING_OBJECTIVE = 1.7064
RING_SIM_AGGREGATE = 1.705
RING_OBJECTIVE_TOL = 1e-3
RING_LINK_TOL = 0.01
RING_AGGREGATE_TOL = 0.01


class ExperimentError(RuntimeError):
    """Pipeline failure that should not happen with derived requirements."""


# ---------------------- experiment spec ----------------------

@dataclass(frozen=True)
class ExperimentSpec:
    setting: str
    n_networks: int = 10
    n_links: int = 10
    mean_degrees: Tuple[float, ...] = (2.0, 3.0, 4.0)
    intensity_multipliers: Tuple[float, ...] = (1.0, 2.0, 3.0)
    requirement_offsets: Tuple[float, ...] = (0.0, -0.1, -0.2)
    base_rho: float = DEFAULT_RHO
    seeds: Tuple[int, ...] = tuple(range(1, 11))
    master_seed: int = 2024
    duration: float = DEFAULT_DURATION
    warmup_fraction: float = DEFAULT_WARMUP
    workers: int = 1

    def validate(self) -> "ExperimentSpec":
        if self.setting not in SETTINGS:
            raise ValueError(f"Unknown setting '{self.setting}'. Allowed: {list(SETTINGS)}")
        if self.n_networks < 1 or self.n_links < 1:
            raise ValueError("n_networks and n_links must be positive")
        for name in ("mean_degrees", "intensity_multipliers", "requirement_offsets", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if not (math.isfinite(self.base_rho) and self.base_rho > 0):
            raise ValueError(f"base_rho must be positive, got {self.base_rho!r}")
        return self

    def parameters(self) -> Tuple[float, ...]:
        if self.setting == "degree_sweep":
            return tuple(self.mean_degrees)
        if self.setting == "intensity_sweep":
            return tuple(self.intensity_multipliers)
        if self.setting == "requirement_sweep":
            return tuple(self.requirement_offsets)
        return (0.0,)


def default_spec(setting: str, **overrides) -> ExperimentSpec:
    spec = ExperimentSpec(setting=setting)
    if overrides:
        spec = replace(spec, **overrides)
    return spec.validate()


# ---------------------- records ----------------------

@dataclass(frozen=True)
class NetworkRecord:
    setting: str
    parameter: float
    network: int
    n_links: int
    mean_degree: float
    objective: float
    sim_aggregate: float
    link_error_abs: float
    link_error_pct: float
    aggregate_error_abs: float
    aggregate_error_pct: float
    th_star: Tuple[float, ...] = ()
    th_hat: Tuple[float, ...] = ()
    th_stderr: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ErrorReport:
    setting: str
    parameter: float
    n_networks: int
    mean_link_error_abs: float
    mean_link_error: float          # percent of the mean optimal link throughput
    mean_aggregate_error_abs: float
    mean_aggregate_error: float     # percent of the optimal aggregate
    records: Tuple[NetworkRecord, ...] = field(default=(), repr=False)

    def summary(self) -> Dict[str, Any]:
        d = asdict(self)
        d.pop("records")
        return d


def derive_requirements(th0) -> np.ndarray:
    """
    r_i = max(th0_i - 0.2, 0) on odd links and max(th0_i - 0.1, 0) on even
    links, counting links from 1.
    """
    th0 = np.asarray(th0, dtype=float)
    margin = np.where(np.arange(th0.size) % 2 == 0, ODD_LINK_MARGIN, EVEN_LINK_MARGIN)
    return np.maximum(th0 - margin, 0.0)


def relax_requirements(r, offset: float) -> np.ndarray:
    return np.maximum(np.asarray(r, dtype=float) + offset, 0.0)


def _seed(*parts: float) -> int:
    entropy = [int(round(abs(p) * 1000)) for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def network_seed(master_seed: int, mean_degree: float, k: int) -> int:
    return _seed(master_seed, mean_degree, k)


def simulation_seeds(seeds: Sequence[int], k: int) -> List[int]:
    return [_seed(s, k) for s in seeds]


def link_errors(th_star, th_hat) -> Dict[str, float]:
    th_star = np.asarray(th_star, dtype=float)
    th_hat = np.asarray(th_hat, dtype=float)
    link_abs = float(np.mean(np.abs(th_star - th_hat)))
    agg_star = float(th_star.sum())
    agg_abs = abs(agg_star - float(th_hat.sum()))
    return {
        "link_error_abs": link_abs,
        # throughput is already a share of airtime
        "link_error_pct": 100.0 * link_abs,
        "aggregate_error_abs": agg_abs,
        "aggregate_error_pct": 100.0 * agg_abs / agg_star if agg_star > 0 else 0.0,
    }


def evaluate_network(
    g: ContentionGraph,
    r,
    *,
    setting: str,
    parameter: float,
    network: int,
    seeds: Sequence[int],
    duration: float = DEFAULT_DURATION,
    warmup_fraction: float = DEFAULT_WARMUP,
    workers: int = 1,
) -> NetworkRecord:
    sol = optimal_offered_load(g, r)
    if not sol.optimal:
        raise ExperimentError(f"{setting} network {network}: LP returned '{sol.status}' ({sol.message})")

    cfg = make_config(sol.f_star, duration=duration, warmup_fraction=warmup_fraction)
    pooled = run_seeds(g, cfg, seeds, workers=workers)
    errs = link_errors(sol.th_star, pooled.th_mean)
    return NetworkRecord(
        setting=setting,
        parameter=float(parameter),
        network=network,
        n_links=g.n,
        mean_degree=g.mean_degree(),
        objective=sol.objective,
        sim_aggregate=pooled.aggregate,
        th_star=tuple(float(v) for v in sol.th_star),
        th_hat=tuple(float(v) for v in pooled.th_mean),
        th_stderr=tuple(float(v) for v in pooled.th_stderr),
        **errs,
    )


# ---------------------- settings ----------------------

def _jobs(spec: ExperimentSpec) -> List[Tuple[float, int, ContentionGraph, np.ndarray]]:
    jobs = []
    for parameter in spec.parameters():
        degree = parameter if spec.setting == "degree_sweep" else spec.mean_degrees[0]
        rho = spec.base_rho * (parameter if spec.setting == "intensity_sweep" else 1.0)
        for k in range(spec.n_networks):
            g = random_graph(spec.n_links, degree, network_seed(spec.master_seed, degree, k), rho=rho)
            r = derive_requirements(saturated_throughputs(g))
            if spec.setting == "requirement_sweep":
                r = relax_requirements(r, parameter)
            jobs.append((parameter, k, g, r))
    return jobs


def _evaluate_job(args) -> NetworkRecord:
    spec, parameter, k, g, r = args
    return evaluate_network(
        g,
        r,
        setting=spec.setting,
        parameter=parameter,
        network=k,
        seeds=simulation_seeds(spec.seeds, k),
        duration=spec.duration,
        warmup_fraction=spec.warmup_fraction,
    )


def summarise(setting: str, parameter: float, records: Sequence[NetworkRecord]) -> ErrorReport:
    return ErrorReport(
        setting=setting,
        parameter=float(parameter),
        n_networks=len(records),
        mean_link_error_abs=float(np.mean([x.link_error_abs for x in records])),
        mean_link_error=float(np.mean([x.link_error_pct for x in records])),
        mean_aggregate_error_abs=float(np.mean([x.aggregate_error_abs for x in records])),
        mean_aggregate_error=float(np.mean([x.aggregate_error_pct for x in records])),
        records=tuple(records),
    )


def run_setting(spec: ExperimentSpec, progress=None) -> List[ErrorReport]:
    """
    One ErrorReport per parameter point. Networks are independent jobs; with
    spec.workers > 1 they run in a process pool. `progress(report)` is
    called after each point.
    """
    spec.validate()
    if spec.setting == "table1_ring":
        ring = run_table1_ring(duration=spec.duration, seeds=spec.seeds, workers=spec.workers)
        if not ring.passed:
            raise ExperimentError("table1_ring check failed: " + "; ".join(ring.failures))
        report = summarise(spec.setting, 0.0, [ring.record])
        if progress:
            progress(report)
        return [report]

    jobs = [(spec, p, k, g, r) for p, k, g, r in _jobs(spec)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            records = list(ex.map(_evaluate_job, jobs))
    else:
        records = [_evaluate_job(j) for j in jobs]

    reports = []
    for parameter in spec.parameters():
        report = summarise(spec.setting, parameter, [x for x in records if x.parameter == float(parameter)])
        reports.append(report)
        if progress:
            progress(report)
    return reports


# ---------------------- the ring case ----------------------

@dataclass
class RingComparison:
    requirements: Tuple[float, ...]
    solution: LpSolution
    record: Optional[NetworkRecord] = None
    th_hat: Optional[Tuple[float, ...]] = None
    th_stderr: Optional[Tuple[float, ...]] = None
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {
            "requirements": list(self.requirements),
            "lp": self.solution.to_dict(),
            "th_hat": None if self.th_hat is None else list(self.th_hat),
            "th_stderr": None if self.th_stderr is None else list(self.th_stderr),
            "sim_aggregate": None if self.th_hat is None else float(sum(self.th_hat)),
            "passed": self.passed,
            "failures": list(self.failures),
        }


def run_table1_ring(
    r=None,
    *,
    rho: float = DEFAULT_RHO,
    duration: float = DEFAULT_DURATION,
    seeds: Sequence[int] = tuple(range(1, 11)),
    workers: int = 1,
    simulate: bool = True,
) -> RingComparison:
    g = four_link_ring(rho)
    r = np.asarray(RING_REQUIREMENTS if r is None else r, dtype=float)
    sol = optimal_offered_load(g, r)
    cmp = RingComparison(requirements=tuple(float(v) for v in r), solution=sol)

    if not sol.optimal:
        cmp.failures.append(f"LP {sol.status}: {sol.message}")
        return cmp
    if abs(sol.objective - RING_OBJECTIVE) > RING_OBJECTIVE_TOL:
        cmp.failures.append(f"objective {sol.objective:.4f} differs from {RING_OBJECTIVE} by more than {RING_OBJECTIVE_TOL}")
    if not simulate:
        return cmp

    record = evaluate_network(
        g, r, setting="table1_ring", parameter=0.0, network=0,
        seeds=list(seeds), duration=duration, workers=workers,
    )
    cmp.record = record
    cmp.th_hat = record.th_hat
    cmp.th_stderr = record.th_stderr
    pooled_err = np.abs(np.asarray(record.th_hat) - sol.f_star)
    for i in np.flatnonzero(pooled_err >= RING_LINK_TOL):
        cmp.failures.append(
            f"link {i + 1}: simulated {record.th_hat[i]:.4f} vs f* {sol.f_star[i]:.4f} (>= {RING_LINK_TOL})"
        )
    if abs(record.sim_aggregate - RING_SIM_AGGREGATE) > RING_AGGREGATE_TOL:
        cmp.failures.append(
            f"simulated aggregate {record.sim_aggregate:.4f} outside {RING_SIM_AGGREGATE}±{RING_AGGREGATE_TOL}"
        )
    return cmp


# ---------------------- output ----------------------

def parameter_label(setting: str, parameter: float) -> str:
    if setting == "degree_sweep":
        return f"{parameter:g}"
    if setting == "intensity_sweep":
        return "rho0" if parameter == 1 else f"{parameter:g}rho0"
    if setting == "requirement_sweep":
        return "r" if parameter == 0 else f"max(r{parameter:+g},0)"
    return "ring"


def reports_to_frame(reports: Sequence[ErrorReport]) -> pd.DataFrame:
    rows = []
    for rep in reports:
        d = rep.summary()
        d["label"] = parameter_label(rep.setting, rep.parameter)
        rows.append(d)
    return pd.DataFrame(rows)


def records_to_frame(reports: Sequence[ErrorReport]) -> pd.DataFrame:
    rows = []
    for rep in reports:
        for rec in rep.records:
            d = rec.to_dict()
            d["th_star"] = json.dumps(d["th_star"])
            d["th_hat"] = json.dumps(d["th_hat"])
            d["th_stderr"] = json.dumps(d["th_stderr"])
            rows.append(d)
    return pd.DataFrame(rows)


TABLE_TITLES = {
    "table1_ring": "4-link ring",
    "degree_sweep": "Mean Link Degree",
    "intensity_sweep": "Access Intensity",
    "requirement_sweep": "Minimum Required Throughput",
}


def render_table(reports: Sequence[ErrorReport]) -> str:
    """Text table: one column per parameter point, errors in percent."""
    if not reports:
        return ""
    setting = reports[0].setting
    df = pd.DataFrame(
        {
            parameter_label(rep.setting, rep.parameter): [
                f"{rep.mean_link_error:.4f}%",
                f"{rep.mean_aggregate_error:.4f}%",
                f"{rep.mean_link_error_abs:.4f}",
                f"{rep.mean_aggregate_error_abs:.4f}",
            ]
            for rep in reports
        },
        index=[
            "Mean Link Throughput Errors",
            "Mean Aggregate Throughput Errors",
            "Mean Link Error (abs)",
            "Mean Aggregate Gap (abs)",
        ],
    )
    df.columns.name = TABLE_TITLES.get(setting, setting)
    return df.to_string()


def write_reports(reports: Sequence[ErrorReport], out_dir: str, stem: str, manifest_header: str = "",
                  manifest: Optional[Dict[str, Any]] = None) -> List[str]:
    """Writes <stem>_points.csv, <stem>_networks.csv and <stem>.json; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    for suffix, frame in (("points", reports_to_frame(reports)), ("networks", records_to_frame(reports))):
        path = os.path.join(out_dir, f"{stem}_{suffix}.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(manifest_header)
            frame.to_csv(f, index=False)
        paths.append(path)

    path = os.path.join(out_dir, f"{stem}.json")
    payload = {
        "manifest": manifest or {},
        "points": [rep.summary() for rep in reports],
        "networks": [rec.to_dict() for rep in reports for rec in rep.records],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    paths.append(path)
    return paths

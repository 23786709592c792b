# cli.py
"""
Command-line front end.

    python cli.py analyze    TOPOLOGY [--active MASK] [--format text|json] [--matrix-csv PATH]
    python cli.py optimize   TOPOLOGY REQUIREMENTS [--emit-q] [--out PATH]
    python cli.py simulate   TOPOLOGY [OFFERED_LOAD] [--active MASK] [--duration T] [--seeds K] [--seed S]
                             [--format json|csv] [--trace PATH] [--out PATH] [--workers W]
    python cli.py experiment --setting NAME [--seed S] [--networks N] [--links N] [--duration T]
                             [--sim-seeds K] [--workers W] [--out-dir DIR]

Vectors are given inline ("0.1,0.2,0.3") or as a file of numbers separated by
commas/whitespace (# comments allowed). Masks accept 0b..., 0x... or decimal.
Every run is stored in the run store (db.py) unless --no-record is given,
and every artifact embeds its RunManifest.

Exit codes: 0 ok, 2 usage, 3 parse error, 4 infeasible, 5 size cap exceeded,
6 numerical failure, 7 acceptance check failed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

import audit
import runs
from cgc import subnetwork_throughput_matrix, write_matrix_csv
from db import out_dir
from experiments import (
    SETTINGS,
    ExperimentError,
    default_spec,
    render_table,
    run_setting,
    run_table1_ring,
    summarise,
    write_reports,
)
from graph import SizeCapError, TopologyError, load_topology, mask_links
from lp import check_feasibility, optimal_offered_load, validate_requirements
from product_form import saturated_throughputs, stationary_distribution
from simplex import SimplexNumericalError
from simulator import (
    MutualExclusionError,
    SimConfigError,
    audit_trace,
    make_config,
    run_seeds,
    simulate,
    simulate_saturated,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_CAP = 5
EXIT_NUMERIC = 6
EXIT_CHECK_FAILED = 7


class InputError(ValueError):
    """Unreadable vector / mask argument."""


# ---------------------- argument helpers ----------------------

def parse_mask(text: str) -> int:
    s = (text or "").strip().lower()
    try:
        value = int(s, 0)
    except ValueError:
        try:
            value = int(s, 10)  # "0011" style decimal
        except ValueError:
            raise InputError(f"Cannot read mask {text!r}; use 0b..., 0x... or decimal")
    if value < 0:
        raise InputError(f"Mask must be non-negative, got {text!r}")
    return value


def parse_vector(text: str, n: int, what: str = "vector") -> np.ndarray:
    """Inline comma-separated values, or a path to a file holding them."""
    source = text
    if os.path.exists(text):
        with open(text, "r", encoding="utf-8") as f:
            source = "\n".join(line.split("#", 1)[0] for line in f)
    tokens = source.replace(",", " ").split()
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise InputError(f"Cannot read {what} from {text!r}")
    if len(values) != n:
        raise InputError(f"{what} has {len(values)} entries, the topology has {n} links")
    return np.asarray(values)


def _fmt(v) -> str:
    return "[" + ", ".join(f"{x:.4f}" for x in v) + "]"


def _emit(payload: dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")


class _Recorder:
    """Run-store bookkeeping; a no-op when recording is disabled."""

    def __init__(self, manifest: runs.RunManifest, args):
        self.manifest = manifest
        self.run_id = None if args.no_record else runs.start_run(manifest)
        args.recorder = self

    def event(self, fn, *args, **kwargs) -> None:
        if self.run_id is not None:
            fn(self.run_id, *args, **kwargs)

    def finish(self, status: str, code: int, result: Optional[dict] = None) -> int:
        if self.run_id is not None:
            runs.finish_run(self.run_id, status, code, result)
        return code


def _manifest(args, command: str, overrides: dict, seed=None, output=None, fmt="json") -> runs.RunManifest:
    return runs.RunManifest(
        command=command,
        topology=getattr(args, "topology", None),
        overrides=overrides,
        seed=seed,
        output=output,
        fmt=fmt,
    )


# ---------------------- commands ----------------------

def cmd_analyze(args) -> int:
    manifest = _manifest(args, "analyze", {"active": args.active, "matrix_csv": args.matrix_csv},
                         output=args.matrix_csv, fmt=args.format)
    rec = _Recorder(manifest, args)

    g = load_topology(args.topology)
    active = g.full_mask if args.active is None else parse_mask(args.active)
    if active > g.full_mask:
        raise InputError(f"Mask {args.active} has bits beyond link {g.n}")

    dist = stationary_distribution(g, active)
    th = saturated_throughputs(g, active)
    result = {
        "manifest": manifest.to_dict(),
        "n_links": g.n,
        "active": [i + 1 for i in mask_links(active)],
        "partition": dist.partition if math.isfinite(dist.partition) else None,
        "log_partition": dist.log_partition,
        "n_states": len(dist),
        "th": [float(v) for v in th],
        "aggregate": float(th.sum()),
    }

    if args.matrix_csv:
        m = subnetwork_throughput_matrix(g)
        write_matrix_csv(m, args.matrix_csv, header=manifest.header_line())
        rec.event(audit.log_artifact_written, args.matrix_csv, "csv")

    if args.format == "json":
        _emit(result, None)
    else:
        print(f"links        : {g.n}  (active: {', '.join(str(i) for i in result['active']) or 'none'})")
        z_text = f"{dist.partition:.4f}" if math.isfinite(dist.partition) else "beyond float range"
        print(f"Z            : {z_text}   (ln Z = {dist.log_partition:.4f})")
        print(f"states       : {len(dist)}")
        print(f"throughputs  : {_fmt(th)}")
        print(f"aggregate    : {th.sum():.4f}")
    return rec.finish("ok", EXIT_OK, {k: result[k] for k in ("n_states", "th", "aggregate")})


def cmd_optimize(args) -> int:
    manifest = _manifest(args, "optimize", {"requirements": args.requirements, "emit_q": args.emit_q},
                         output=args.out)
    rec = _Recorder(manifest, args)

    g = load_topology(args.topology)
    r = validate_requirements(parse_vector(args.requirements, g.n, "requirement vector"), g.n)

    report = check_feasibility(g, r)
    sol = optimal_offered_load(g, r)
    payload = {"manifest": manifest.to_dict(), **sol.to_dict(emit_q=args.emit_q)}
    if not report.ok:
        payload["necessary_condition"] = report.describe()

    if sol.status == "size_cap_exceeded":
        rec.event(audit.log_cap_exceeded, sol.message)
        _emit(payload, args.out)
        return rec.finish(sol.status, EXIT_CAP)
    if not sol.optimal:
        rec.event(audit.log_infeasible, {"certificate": payload.get("certificate", [])})
        _emit(payload, args.out)
        print(f"infeasible: {sol.message}", file=sys.stderr)
        return rec.finish(sol.status, EXIT_INFEASIBLE)

    rec.event(audit.log_solved, {"objective": sol.objective, "support": sol.nonzero_count})
    _emit(payload, args.out)
    print(f"objective {sol.objective:.4f}  f* {_fmt(sol.f_star)}  support {sol.nonzero_count}", file=sys.stderr)
    return rec.finish("optimal", EXIT_OK, {"objective": sol.objective})


def _seed_list(args) -> List[int]:
    if args.seeds < 1:
        raise InputError("--seeds must be at least 1")
    return list(range(args.seed, args.seed + args.seeds))


def cmd_simulate(args) -> int:
    seeds = _seed_list(args)
    overrides = {
        "offered_load": args.offered_load, "active": args.active, "duration": args.duration,
        "warmup": args.warmup, "seeds": seeds, "backoff": args.backoff,
    }
    manifest = _manifest(args, "simulate", overrides, seed=args.seed, output=args.out, fmt=args.format)
    rec = _Recorder(manifest, args)

    g = load_topology(args.topology)
    if args.active is not None:
        active = parse_mask(args.active)
        cfg = make_config(duration=args.duration, warmup_fraction=args.warmup, backoff_dist=args.backoff)
    elif args.offered_load is not None:
        active = None
        f = parse_vector(args.offered_load, g.n, "offered-load vector")
        cfg = make_config(f, duration=args.duration, warmup_fraction=args.warmup, backoff_dist=args.backoff)
    else:
        raise InputError("simulate needs an offered-load vector or --active MASK")

    pooled = run_seeds(g, cfg, seeds, workers=args.workers, active=active)
    rec.event(audit.log_simulated, {"seeds": seeds, "aggregate": pooled.aggregate})

    if args.trace:
        trace: list = []
        traced_cfg = make_config(cfg.offered_load, duration=args.duration, warmup_fraction=args.warmup,
                                 rng_seed=seeds[0], backoff_dist=args.backoff)
        if active is None:
            simulate(g, traced_cfg, trace=trace)
        else:
            simulate_saturated(g, active, traced_cfg, trace=trace)
        audit_trace(g, trace)
        write_trace_csv(trace, args.trace)
        rec.event(audit.log_artifact_written, args.trace, "csv")

    if args.format == "csv":
        rows = []
        for run in pooled.runs:
            rows += [{"seed": run.seed, "link": i + 1, "th_hat": v} for i, v in enumerate(run.th_hat)]
        rows += [{"seed": "pooled", "link": i + 1, "th_hat": m, "stderr": s}
                 for i, (m, s) in enumerate(zip(pooled.th_mean, pooled.th_stderr))]
        buf = io.StringIO()
        buf.write(manifest.header_line())
        pd.DataFrame(rows).to_csv(buf, index=False)
        print(buf.getvalue(), end="")
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
    else:
        _emit({"manifest": manifest.to_dict(), **pooled.to_dict()}, args.out)

    print(f"pooled th_hat {_fmt(pooled.th_mean)}  aggregate {pooled.aggregate:.4f}", file=sys.stderr)
    return rec.finish("ok", EXIT_OK, {"th_mean": [float(v) for v in pooled.th_mean]})


def cmd_experiment(args) -> int:
    overrides = {
        "setting": args.setting, "networks": args.networks, "links": args.links,
        "duration": args.duration, "sim_seeds": args.sim_seeds, "workers": args.workers,
    }
    target = args.out_dir or out_dir()
    manifest = _manifest(args, "experiment", overrides, seed=args.seed, output=target, fmt="csv+json")
    rec = _Recorder(manifest, args)
    stem = f"{args.setting}_{time.strftime('%Y%m%d-%H%M%S')}"
    sim_seeds = tuple(range(1, args.sim_seeds + 1))

    if args.setting == "table1_ring":
        ring = run_table1_ring(duration=args.duration, seeds=sim_seeds, workers=args.workers)
        payload = {"manifest": manifest.to_dict(), **ring.to_dict()}
        path = os.path.join(target, f"{stem}.json")
        os.makedirs(target, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
        rec.event(audit.log_artifact_written, path, "json")
        if ring.record is not None:
            print(render_table([summarise("table1_ring", 0.0, [ring.record])]))
        print("PASS" if ring.passed else "FAIL: " + "; ".join(ring.failures))
        if not ring.passed:
            rec.event(audit.log_check_failed, ring.failures)
            return rec.finish("failed", EXIT_CHECK_FAILED, ring.to_dict())
        return rec.finish("ok", EXIT_OK, ring.to_dict())

    spec = default_spec(
        args.setting,
        n_networks=args.networks,
        n_links=args.links,
        duration=args.duration,
        seeds=sim_seeds,
        master_seed=args.seed,
        workers=args.workers,
    )
    reports = run_setting(spec, progress=lambda rep: rec.event(audit.log_point_done, rep.summary()))
    for path in write_reports(reports, target, stem, manifest.header_line(), manifest.to_dict()):
        rec.event(audit.log_artifact_written, path, path.rsplit(".", 1)[-1])
    if rec.run_id is not None:
        runs.add_experiment_records(rec.run_id, [x.to_dict() for rep in reports for x in rep.records])

    print(render_table(reports))
    return rec.finish("ok", EXIT_OK, {"points": [rep.summary() for rep in reports]})


# ---------------------- parser ----------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csma-cgc", description="CSMA offered-load optimisation toolkit")
    p.add_argument("--no-record", action="store_true", help="do not write to the run store")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="product-form throughputs of a (sub-)network")
    a.add_argument("topology")
    a.add_argument("--active", help="sub-network mask (default: all links)")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--matrix-csv", help="export the 2^n sub-network throughput matrix")
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("optimize", help="solve the offered-load LP")
    o.add_argument("topology")
    o.add_argument("requirements", help="minimum throughput per link (inline or file)")
    o.add_argument("--emit-q", action="store_true", help="include the full q* vector")
    o.add_argument("--out")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", help="event-driven CSMA simulation")
    s.add_argument("topology")
    s.add_argument("offered_load", nargs="?", help="offered load per link (inline or file)")
    s.add_argument("--active", help="saturated run of this sub-network mask instead")
    s.add_argument("--duration", type=float, default=1e6)
    s.add_argument("--warmup", type=float, default=0.10)
    s.add_argument("--seeds", type=int, default=10, help="number of independent runs")
    s.add_argument("--seed", type=int, default=1, help="first seed")
    s.add_argument("--backoff", choices=("exponential", "uniform", "deterministic"), default="exponential")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--trace", help="write the first seed's event trace as CSV")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="reproduce an evaluation setting")
    e.add_argument("--setting", choices=SETTINGS, required=True)
    e.add_argument("--seed", type=int, default=2024, help="master seed for network generation")
    e.add_argument("--networks", type=int, default=10)
    e.add_argument("--links", type=int, default=10)
    e.add_argument("--duration", type=float, default=1e6)
    e.add_argument("--sim-seeds", type=int, default=10)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out-dir", help="default: $CSMA_OUT_DIR or ./out")
    e.set_defaults(func=cmd_experiment)
    return p


def _fail(args, label: str, status: str, code: int, error: Exception, log_fn=None) -> int:
    print(f"{label}: {error}", file=sys.stderr)
    rec = getattr(args, "recorder", None)
    if rec is None:
        return code
    if log_fn is not None:
        rec.event(log_fn, str(error))
    return rec.finish(status, code, {"error": str(error)})


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.recorder = None
    try:
        return args.func(args)
    # LinkCapError is also a TopologyError; the cap check comes first
    except SizeCapError as e:
        return _fail(args, "size cap exceeded", "size_cap_exceeded", EXIT_CAP, e, audit.log_cap_exceeded)
    except (TopologyError, InputError, SimConfigError, OSError) as e:
        return _fail(args, "input error", "parse_error", EXIT_PARSE, e, audit.log_parse_failed)
    except SimplexNumericalError as e:
        return _fail(args, "numerical failure", "numerical_failure", EXIT_NUMERIC, e, audit.log_numerical_failure)
    except MutualExclusionError as e:
        return _fail(args, "check failed", "failed", EXIT_CHECK_FAILED, e, lambda rid, msg: audit.log_check_failed(rid, [msg]))
    except ExperimentError as e:
        return _fail(args, "experiment failed", "failed", EXIT_NUMERIC, e)
    except ValueError as e:
        return _fail(args, "input error", "parse_error", EXIT_PARSE, e, audit.log_parse_failed)


if __name__ == "__main__":
    sys.exit(main())

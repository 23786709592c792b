# runs.py
"""
Run manifests and the run store.

Public API
----------
RunManifest(command, topology, overrides, seed, output, fmt, timestamp, tool_version)
start_run(manifest) -> run_id
finish_run(run_id, status, exit_code, result=None)
add_experiment_records(run_id, records)
list_runs(limit=50) -> List[(id, command, status, created_at, finished_at)]
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from audit import log_run_finished, log_run_started
from db import get_conn
from db_init import init_schema

TOOL_VERSION = "0.3.0"
ALLOWED_COMMANDS = {"analyze", "optimize", "simulate", "experiment"}

NOW = lambda: time.strftime("%Y-%m-%d %H:%M:%S")


@dataclass(frozen=True)
class RunManifest:
    command: str
    topology: Optional[str] = None
    overrides: Mapping[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    output: Optional[str] = None
    fmt: str = "json"
    timestamp: str = field(default_factory=NOW)
    tool_version: str = TOOL_VERSION

    def __post_init__(self):
        if self.command not in ALLOWED_COMMANDS:
            raise ValueError(f"Invalid command '{self.command}'. Allowed: {sorted(ALLOWED_COMMANDS)}")

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["overrides"] = dict(self.overrides)
        return d

    def header_line(self) -> str:
        """Manifest as a CSV comment line."""
        return "# manifest: " + json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=str) + "\n"


def start_run(manifest: RunManifest) -> int:
    init_schema()
    payload = json.dumps(manifest.to_dict(), sort_keys=True, default=str)
    with get_conn() as conn:
        cur = conn.execute(
            "INSERT INTO runs(command, status, manifest, created_at, tool_version) VALUES(?,?,?,?,?)",
            (manifest.command, "running", payload, NOW(), manifest.tool_version),
        )
        run_id = int(cur.lastrowid)
        log_run_started(run_id, {"command": manifest.command, "topology": manifest.topology}, conn=conn)
    return run_id


def finish_run(run_id: int, status: str, exit_code: int, result: Optional[Mapping[str, Any]] = None) -> None:
    payload = None if result is None else json.dumps(result, default=str)
    with get_conn() as conn:
        conn.execute(
            "UPDATE runs SET status=?, result=?, finished_at=? WHERE id=?",
            (status, payload, NOW(), run_id),
        )
        log_run_finished(run_id, status, exit_code, conn=conn)


RECORD_FIELDS = (
    "setting", "parameter", "network", "n_links", "mean_degree", "objective", "sim_aggregate",
    "link_error_abs", "link_error_pct", "aggregate_error_abs", "aggregate_error_pct",
)


def add_experiment_records(run_id: int, records: Iterable[Mapping[str, Any]]) -> int:
    rows = [(run_id, *(r[k] for k in RECORD_FIELDS)) for r in records]
    if not rows:
        return 0
    placeholders = ",".join("?" * (len(RECORD_FIELDS) + 1))
    with get_conn() as conn:
        conn.executemany(
            f"INSERT INTO experiment_records(run_id, {', '.join(RECORD_FIELDS)}) VALUES({placeholders})",
            rows,
        )
    return len(rows)


def list_runs(limit: int = 50) -> List[Tuple[int, str, str, str, Optional[str]]]:
    init_schema()
    with get_conn() as conn:
        return conn.execute(
            "SELECT id, command, status, created_at, finished_at FROM runs ORDER BY id DESC LIMIT ?",
            (limit,),
        ).fetchall()

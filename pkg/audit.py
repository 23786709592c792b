"""
audit.py: run event log, stored in the run_events table.

Features
--------
- log_event(...) inserts into run_events with a validated action
- Convenience wrappers for the pipeline stages:
    log_run_started, log_run_finished, log_parse_failed, log_cap_exceeded,
    log_infeasible, log_solved, log_simulated, log_point_done,
    log_check_failed, log_artifact_written
"""

import json
import sqlite3
import time
from typing import Any, Mapping, Optional

from db import get_conn

NOW = lambda: time.strftime("%Y-%m-%d %H:%M:%S")

# -------------------------------------------------------------------
# Allowed values for validation
# -------------------------------------------------------------------
ALLOWED_ACTIONS = {
    "run_started",
    "run_finished",
    "parse_failed",
    "cap_exceeded",
    "infeasible",
    "numerical_failure",
    "solved",
    "simulated",
    "point_done",
    "check_failed",
    "artifact_written",
}

# -------------------------------------------------------------------
# Core function
# -------------------------------------------------------------------
def log_event(
    run_id: int,
    action: str,
    meta: Optional[Mapping[str, Any]] = None,
    conn: Optional[sqlite3.Connection] = None,
) -> None:
    """
    Insert a row into run_events.
    If `conn` is provided, reuse it (avoids 'database is locked').
    """
    action = (action or "").strip()
    if action not in ALLOWED_ACTIONS:
        raise ValueError(f"Invalid action '{action}'. Allowed: {sorted(ALLOWED_ACTIONS)}")

    payload = json.dumps(dict(meta or {}), separators=(",", ":"), default=str)
    sql = "INSERT INTO run_events(run_id, action, meta, at) VALUES(?,?,?,?)"
    params = (run_id, action, payload, NOW())

    if conn is not None:
        conn.execute(sql, params)
    else:
        with get_conn() as c:
            c.execute(sql, params)

# -------------------------------------------------------------------
# Convenience wrappers
# -------------------------------------------------------------------
def log_run_started(run_id: int, meta: Mapping[str, Any], conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "run_started", meta=meta, conn=conn)

def log_run_finished(run_id: int, status: str, exit_code: int,
                     conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "run_finished", meta={"status": status, "exit_code": exit_code}, conn=conn)

def log_parse_failed(run_id: int, error: str, conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "parse_failed", meta={"error": error}, conn=conn)

def log_cap_exceeded(run_id: int, error: str, conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "cap_exceeded", meta={"error": error}, conn=conn)

def log_infeasible(run_id: int, meta: Mapping[str, Any], conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "infeasible", meta=meta, conn=conn)

def log_numerical_failure(run_id: int, error: str, conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "numerical_failure", meta={"error": error}, conn=conn)

def log_solved(run_id: int, meta: Mapping[str, Any], conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "solved", meta=meta, conn=conn)

def log_simulated(run_id: int, meta: Mapping[str, Any], conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "simulated", meta=meta, conn=conn)

def log_point_done(run_id: int, meta: Mapping[str, Any], conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "point_done", meta=meta, conn=conn)

def log_check_failed(run_id: int, failures, conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "check_failed", meta={"failures": list(failures)}, conn=conn)

def log_artifact_written(run_id: int, path: str, fmt: str,
                         conn: Optional[sqlite3.Connection] = None) -> None:
    log_event(run_id, "artifact_written", meta={"path": path, "format": fmt}, conn=conn)

# db_init.py
import sqlite3
import sys
from typing import Iterable

from db import db_path, get_conn

# -------------------------
# Console-safe helpers
# -------------------------

def ok_mark() -> str:
    """Return a check mark only if the console supports UTF-8; otherwise [OK]."""
    enc = (getattr(sys.stdout, "encoding", "") or "").lower()
    return "✅" if "utf" in enc else "[OK]"

def table_columns(conn: sqlite3.Connection, table: str) -> set[str]:
    rows = conn.execute(f"PRAGMA table_info({table})").fetchall()
    return {r[1] for r in rows}

def ensure_column(conn: sqlite3.Connection, table: str, col: str, col_type: str) -> None:
    if col not in table_columns(conn, table):
        conn.execute(f"ALTER TABLE {table} ADD COLUMN {col} {col_type};")

def exec_many(conn: sqlite3.Connection, statements: Iterable[str]) -> None:
    """Execute a list of SQL statements in a single transaction, skipping blanks."""
    with conn:
        cur = conn.cursor()
        try:
            for s in statements:
                if s and s.strip():
                    cur.execute(s)
        finally:
            cur.close()

# -------------------------
# Schema (idempotent)
# -------------------------

RUNS_SQL = """
CREATE TABLE IF NOT EXISTS runs(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  command TEXT NOT NULL CHECK(command IN ('analyze','optimize','simulate','experiment')),
  status TEXT NOT NULL DEFAULT 'running',
  manifest TEXT NOT NULL,
  result TEXT,
  created_at TEXT NOT NULL,
  finished_at TEXT
);
"""

RUN_EVENTS_SQL = """
CREATE TABLE IF NOT EXISTS run_events(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  run_id INTEGER NOT NULL,
  action TEXT NOT NULL,
  meta TEXT,
  at TEXT NOT NULL,
  FOREIGN KEY(run_id) REFERENCES runs(id) ON DELETE CASCADE
);
"""

EXPERIMENT_RECORDS_SQL = """
CREATE TABLE IF NOT EXISTS experiment_records(
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  run_id INTEGER NOT NULL,
  setting TEXT NOT NULL,
  parameter REAL NOT NULL,
  network INTEGER NOT NULL,
  n_links INTEGER NOT NULL,
  mean_degree REAL,
  objective REAL,
  sim_aggregate REAL,
  link_error_abs REAL,
  link_error_pct REAL,
  aggregate_error_abs REAL,
  aggregate_error_pct REAL,
  FOREIGN KEY(run_id) REFERENCES runs(id) ON DELETE CASCADE
);
"""

INDEXES_SQL = [
    "CREATE INDEX IF NOT EXISTS idx_runs_command     ON runs(command, created_at);",
    "CREATE INDEX IF NOT EXISTS idx_events_run_time  ON run_events(run_id, at);",
    "CREATE INDEX IF NOT EXISTS idx_records_run      ON experiment_records(run_id, setting, parameter);",
]

# -------------------------
# Initialization
# -------------------------

def init_schema() -> None:
    with get_conn() as conn:
        exec_many(conn, [RUNS_SQL, RUN_EVENTS_SQL, EXPERIMENT_RECORDS_SQL])
        ensure_column(conn, "runs", "tool_version", "TEXT")
        exec_many(conn, INDEXES_SQL)

def sanity_check() -> None:
    with get_conn() as conn:
        objs = conn.execute(
            "SELECT name, type FROM sqlite_master "
            "WHERE type IN ('table','view') ORDER BY type, name;"
        ).fetchall()

        print(f"Schema objects in {db_path()}:")
        for name, typ in objs:
            print(f" - {typ:<5} {name}")

        n_runs = conn.execute("SELECT COUNT(*) FROM runs").fetchone()[0]
        print(f"\n{ok_mark()} run store ready ({n_runs} runs).")

if __name__ == "__main__":
    init_schema()
    sanity_check()

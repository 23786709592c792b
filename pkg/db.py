# db.py
import os
import sqlite3
from contextlib import contextmanager

OUT_DIR_ENV = "CSMA_OUT_DIR"
DEFAULT_OUT_DIR = "out"
DB_FILE = "csma_runs.db"

PRAGMAS = [
    ("journal_mode", "WAL"),     # readers (the explorer) while a batch writes
    ("synchronous", "NORMAL"),
    ("foreign_keys", "ON"),
    ("busy_timeout", "5000"),
    ("temp_store", "MEMORY"),
]


def out_dir() -> str:
    """Default directory for artifacts; created on demand."""
    path = os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR
    os.makedirs(path, exist_ok=True)
    return path


def db_path() -> str:
    return os.path.join(out_dir(), DB_FILE)


def _apply_pragmas(conn: sqlite3.Connection) -> None:
    cur = conn.cursor()
    for k, v in PRAGMAS:
        cur.execute(f"PRAGMA {k}={v};")
    cur.close()


@contextmanager
def get_conn():
    # check_same_thread=False so Streamlit threads can use it
    conn = sqlite3.connect(db_path(), check_same_thread=False)
    _apply_pragmas(conn)
    try:
        yield conn
        conn.commit()
    finally:
        conn.close()

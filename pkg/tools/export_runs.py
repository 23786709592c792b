# tools/export_runs.py
import sys, pathlib
ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

import pandas as pd

from db import get_conn
from db_init import init_schema

target = (sys.argv[1] if len(sys.argv) > 1 else input("Export runs to CSV file: ")).strip() or "runs.csv"

init_schema()
with get_conn() as conn:
    df = pd.read_sql_query(
        "SELECT r.id, r.command, r.status, r.created_at, r.finished_at, r.tool_version, r.manifest, r.result, "
        "COUNT(e.id) AS events "
        "FROM runs r LEFT JOIN run_events e ON e.run_id = r.id "
        "GROUP BY r.id ORDER BY r.id",
        conn,
    )

df.to_csv(target, index=False)
print(f"{len(df)} runs written to {target}.")

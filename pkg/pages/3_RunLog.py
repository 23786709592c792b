# pages/3_RunLog.py
"""
Run Log
- runs joined with their run_events
- Filters: date range, command, action, free text over manifest/meta
- Pagination, CSV export
- Experiment records for a selected run
"""

# --- import shim (allow importing from project root) ---
import sys, pathlib
ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
# -------------------------------------------------------

import json
from datetime import date, datetime, timedelta

import pandas as pd
import streamlit as st

from db import get_conn
from db_init import init_schema
from runs import ALLOWED_COMMANDS

st.set_page_config(page_title="Run log", page_icon="📜", layout="wide")
st.markdown(
    """
    <style>
        [data-testid="stSidebar"] { background-color: #0D2847; color: white; }
        [data-testid="stSidebar"] * { color: white !important; }
    </style>
    """,
    unsafe_allow_html=True
)

st.title("Run Log")
init_schema()

# ---------------- Helpers ----------------

@st.cache_data(ttl=60)
def _distinct_actions() -> list[str]:
    with get_conn() as conn:
        rows = conn.execute("SELECT DISTINCT action FROM run_events ORDER BY action ASC").fetchall()
    return [r[0] for r in rows if r and r[0]]

def _safe_json_compact(s: str | None) -> str:
    if not s:
        return ""
    try:
        return json.dumps(json.loads(s), separators=(",", ":"))
    except Exception:
        return s

@st.cache_data(ttl=30, show_spinner=False)
def _query_events(
    start_d: date,
    end_d: date,
    commands: list[str],
    actions: list[str],
    q_text: str | None,
    limit: int,
    offset: int,
):
    where = ["DATE(e.at) >= DATE(?)", "DATE(e.at) <= DATE(?)"]
    params: list = [start_d.isoformat(), end_d.isoformat()]

    if commands:
        where.append(f"r.command IN ({','.join('?' for _ in commands)})")
        params.extend(commands)
    if actions:
        where.append(f"e.action IN ({','.join('?' for _ in actions)})")
        params.extend(actions)
    if q_text:
        like = f"%{q_text}%"
        where.append("(COALESCE(r.manifest,'') LIKE ? OR COALESCE(e.meta,'') LIKE ?)")
        params.extend([like, like])

    sql_base = f"""
    FROM run_events e
    JOIN runs r ON r.id = e.run_id
    WHERE {' AND '.join(where)}
    """
    sql = f"""
    SELECT e.at, r.id, r.command, r.status, e.action, e.meta
    {sql_base}
    ORDER BY e.at DESC, e.id DESC
    LIMIT ? OFFSET ?
    """
    with get_conn() as conn:
        rows = conn.execute(sql, params + [int(limit), int(offset)]).fetchall()
        total = conn.execute(f"SELECT COUNT(1) {sql_base}", params).fetchone()[0]

    df = pd.DataFrame(rows, columns=["timestamp", "run_id", "command", "status", "action", "meta_raw"])
    return df, int(total)

@st.cache_data(ttl=30)
def _experiment_records(run_id: int) -> pd.DataFrame:
    with get_conn() as conn:
        return pd.read_sql_query(
            "SELECT setting, parameter, network, n_links, mean_degree, objective, sim_aggregate, "
            "link_error_abs, link_error_pct, aggregate_error_abs, aggregate_error_pct "
            "FROM experiment_records WHERE run_id=? ORDER BY parameter, network",
            conn,
            params=(int(run_id),),
        )

# ---------------- Filter controls ----------------
with st.container(border=True):
    c1, c2, c3 = st.columns([1.2, 1.2, 0.6])
    with c1:
        start_d = st.date_input("From", value=date.today() - timedelta(days=30), format="YYYY-MM-DD", key="rl_from")
    with c2:
        end_d = st.date_input("To", value=date.today(), format="YYYY-MM-DD", key="rl_to")
    with c3:
        limit = st.selectbox("Rows/page", options=[100, 200, 500, 1000], index=0)

    c4, c5 = st.columns(2)
    with c4:
        commands_sel = st.multiselect("Commands", options=sorted(ALLOWED_COMMANDS), default=sorted(ALLOWED_COMMANDS))
    with c5:
        actions_all = _distinct_actions()
        actions_sel = st.multiselect("Actions", options=actions_all, default=actions_all)

    q_text = st.text_input("Search manifest / meta", placeholder="e.g. ring.topo, degree_sweep, infeasible")

    if st.button("Refresh", type="primary"):
        st.cache_data.clear()
        st.rerun()

if start_d > end_d:
    st.error("From date must be earlier than or equal to To date.")
    st.stop()

if "rl_page" not in st.session_state:
    st.session_state["rl_page"] = 1
offset = (st.session_state["rl_page"] - 1) * int(limit)

df, total_rows = _query_events(start_d, end_d, commands_sel, actions_sel, q_text, int(limit), int(offset))

if df.empty:
    st.info("No run events match your filters. Runs are recorded by `python cli.py ...`.")
    st.stop()

df["meta"] = df["meta_raw"].map(_safe_json_compact)
df.drop(columns=["meta_raw"], inplace=True)

# ---------------- Metrics ----------------
with st.container(border=True):
    c1, c2, c3, c4 = st.columns(4)
    c1.metric("Rows (this page)", len(df))
    c2.metric("Total rows (all pages)", total_rows)
    c3.metric("Runs", df["run_id"].nunique())
    c4.metric("Top action", df["action"].value_counts().idxmax())

st.dataframe(df, use_container_width=True, hide_index=True)

csv = df.to_csv(index=False).encode("utf-8")
st.download_button(
    "⬇️ Download this page as CSV",
    data=csv,
    file_name=f"run_log_page_{int(st.session_state['rl_page'])}_{datetime.now().strftime('%Y%m%d_%H%M%S')}.csv",
    mime="text/csv",
)

# ---------------- Pagination controls ----------------
total_pages = max(1, (total_rows + int(limit) - 1) // int(limit))
st.caption(f"Page {int(st.session_state['rl_page'])} of {total_pages}")

prev_col, next_col, spacer = st.columns([1, 1, 8], gap="small")
with prev_col:
    if st.button("◀ Prev", disabled=st.session_state["rl_page"] <= 1):
        st.session_state["rl_page"] -= 1
        st.rerun()
with next_col:
    if st.button("Next ▶", disabled=st.session_state["rl_page"] >= total_pages):
        st.session_state["rl_page"] += 1
        st.rerun()

# ---------------- Experiment records ----------------
experiment_runs = sorted(df.loc[df["command"] == "experiment", "run_id"].unique().tolist(), reverse=True)
if experiment_runs:
    with st.expander("Experiment records"):
        run_id = st.selectbox("Run", experiment_runs)
        records = _experiment_records(int(run_id))
        if records.empty:
            st.info("This run stored no per-network records.")
        else:
            st.dataframe(records, use_container_width=True, hide_index=True)
            summary = records.groupby("parameter")[["link_error_pct", "aggregate_error_pct"]].mean()
            st.bar_chart(summary)

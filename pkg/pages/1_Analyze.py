# pages/1_Analyze.py
"""
Analyze
- Topology text (or the 4-link ring) -> product-form throughputs
- Optional sub-network mask
- Full sub-network throughput matrix with CSV export
"""

# --- import shim (allow importing from project root) ---
import sys, pathlib
ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
# -------------------------------------------------------

import pandas as pd
import streamlit as st

from cgc import matrix_frame, subnetwork_throughput_matrix
from graph import SizeCapError, TopologyError, format_topology, four_link_ring, mask_links, parse_topology
from product_form import saturated_throughputs, stationary_distribution

MATRIX_VIEW_LINKS = 12

st.set_page_config(page_title="Analyze", page_icon="📶", layout="wide")
st.markdown(
    """
    <style>
        [data-testid="stSidebar"] { background-color: #0D2847; color: white; }
        [data-testid="stSidebar"] * { color: white !important; }
    </style>
    """,
    unsafe_allow_html=True
)

st.title("Analyze a contention graph")

if "topology_text" not in st.session_state:
    st.session_state["topology_text"] = format_topology(four_link_ring())

with st.container(border=True):
    left, right = st.columns([3, 2])
    with left:
        text = st.text_area("Topology", key="topology_text", height=220,
                            help="links N / rho * V / rho I V / edge I J, links counted from 1")
    with right:
        if st.button("Load the 4-link ring"):
            st.session_state["topology_text"] = format_topology(four_link_ring())
            st.rerun()
        mask_text = st.text_input("Sub-network mask (blank = all links)", placeholder="e.g. 0b1100")

try:
    g = parse_topology(text)
except (TopologyError, SizeCapError) as e:
    st.error(f"Topology error: {e}")
    st.stop()

active = g.full_mask
if mask_text.strip():
    try:
        active = int(mask_text.strip(), 0)
    except ValueError:
        st.error(f"Cannot read mask {mask_text!r}")
        st.stop()
    if not 0 <= active <= g.full_mask:
        st.error(f"Mask has bits outside links 1..{g.n}")
        st.stop()

dist = stationary_distribution(g, active)
th = saturated_throughputs(g, active)

# ---------------- Metrics ----------------
with st.container(border=True):
    c1, c2, c3, c4 = st.columns(4)
    c1.metric("Links", g.n)
    c2.metric("Feasible states", len(dist))
    c3.metric("ln Z", f"{dist.log_partition:.4f}")
    c4.metric("Aggregate throughput", f"{th.sum():.4f}")

df = pd.DataFrame({
    "link": range(1, g.n + 1),
    "rho": g.rho,
    "degree": g.degrees(),
    "active": [i in set(mask_links(active)) for i in range(g.n)],
    "throughput": th,
})
st.dataframe(df, use_container_width=True, hide_index=True)
st.bar_chart(df.set_index("link")["throughput"])

# ---------------- Sub-network matrix ----------------
with st.expander("Sub-network throughput matrix"):
    if g.n > MATRIX_VIEW_LINKS:
        st.info(f"{2 ** g.n} rows; use `cli.py analyze --matrix-csv` for networks above {MATRIX_VIEW_LINKS} links.")
    else:
        frame = matrix_frame(subnetwork_throughput_matrix(g))
        frame.insert(1, "on_links", [",".join(str(i + 1) for i in mask_links(j)) for j in frame["subnet"]])
        st.dataframe(frame, use_container_width=True, hide_index=True)
        st.download_button(
            "⬇️ Download matrix as CSV",
            data=frame.to_csv(index=False).encode("utf-8"),
            file_name=f"subnetwork_matrix_{g.n}links.csv",
            mime="text/csv",
        )

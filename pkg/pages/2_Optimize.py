# pages/2_Optimize.py
"""
Optimize
- Requirement vector per link -> optimal sub-network mixture and offered load
- Necessary-condition warning before solving
- Infeasibility certificate
"""

# --- import shim (allow importing from project root) ---
import sys, pathlib
ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
# -------------------------------------------------------

import json

import pandas as pd
import streamlit as st

from experiments import RING_REQUIREMENTS, derive_requirements
from graph import SizeCapError, TopologyError, format_topology, four_link_ring, mask_links, parse_topology
from lp import check_feasibility, optimal_offered_load
from product_form import saturated_throughputs

st.set_page_config(page_title="Optimize", page_icon="🎯", layout="wide")
st.markdown(
    """
    <style>
        [data-testid="stSidebar"] { background-color: #0D2847; color: white; }
        [data-testid="stSidebar"] * { color: white !important; }
    </style>
    """,
    unsafe_allow_html=True
)

st.title("Optimal offered load")

if "topology_text" not in st.session_state:
    st.session_state["topology_text"] = format_topology(four_link_ring())

text = st.text_area("Topology", key="topology_text", height=180)
try:
    g = parse_topology(text)
except (TopologyError, SizeCapError) as e:
    st.error(f"Topology error: {e}")
    st.stop()

th0 = saturated_throughputs(g)
preset = st.radio("Requirements", ["derived from saturated throughputs", "4-link ring example", "custom"],
                  horizontal=True)
if preset == "4-link ring example" and g.n == len(RING_REQUIREMENTS):
    default = list(RING_REQUIREMENTS)
else:
    default = [round(float(v), 4) for v in derive_requirements(th0)]

editor = st.data_editor(
    pd.DataFrame({"link": range(1, g.n + 1), "saturated": th0, "requirement": default}),
    disabled=["link", "saturated"] if preset == "custom" else ["link", "saturated", "requirement"],
    hide_index=True,
    use_container_width=True,
)

try:
    r = editor["requirement"].astype(float).to_numpy()
    report = check_feasibility(g, r)
except ValueError as e:
    st.error(str(e))
    st.stop()

if not report.ok:
    st.warning(f"Above the isolated maximum rho/(1+rho): {report.describe()}")

if not st.button("Solve", type="primary"):
    st.stop()

with st.spinner(f"Solving over {2 ** g.n} sub-networks..."):
    sol = optimal_offered_load(g, r)

if sol.status == "size_cap_exceeded":
    st.error(sol.message)
    st.stop()
if not sol.optimal:
    st.error(sol.message)
    st.dataframe(pd.DataFrame(sol.to_dict()["certificate"]), hide_index=True)
    st.stop()

with st.container(border=True):
    c1, c2, c3 = st.columns(3)
    c1.metric("Optimal aggregate", f"{sol.objective:.4f}")
    c2.metric("Saturated aggregate", f"{th0.sum():.4f}")
    c3.metric("Sub-networks used", sol.nonzero_count)

st.subheader("Offered load per link")
st.dataframe(
    pd.DataFrame({"link": range(1, g.n + 1), "requirement": r, "th*": sol.th_star, "f*": sol.f_star}),
    hide_index=True,
    use_container_width=True,
)

st.subheader("Sub-network mixture")
st.dataframe(
    pd.DataFrame(
        [{"subnet": j, "on_links": ",".join(str(i + 1) for i in mask_links(j)), "q": q} for j, q in sol.support]
    ),
    hide_index=True,
    use_container_width=True,
)

st.download_button(
    "⬇️ Download solution as JSON",
    data=json.dumps(sol.to_dict(emit_q=g.n <= 12), indent=2).encode("utf-8"),
    file_name="offered_load.json",
    mime="application/json",
)
st.caption("Check it in simulation: `python cli.py simulate TOPOLOGY f1,f2,...`")

# Home.py

# --- Initialize the run store before anything else ---
from db_init import init_schema
try:
    init_schema()
except Exception as e:
    import streamlit as st
    st.error(f"Run store init failed: {e}")

import streamlit as st

from db import db_path, out_dir
from graph import DEFAULT_RHO, MAX_LINKS

st.set_page_config(page_title="CSMA Offered-Load Explorer", page_icon="📡", layout="wide")

# ---------- CSS ----------
st.markdown(
    """
<style>
:root{ --brand:#0D55FF; --brand-dark:#0D2847; --ink:#0F1F2E; }

[data-testid="stSidebar"]{ background: var(--brand-dark); color:#fff; }
[data-testid="stSidebar"] *{ color:#fff !important; }

.hero{ margin: 10px auto 8px auto; text-align:center; }
.title{ font-weight:800; font-size:38px; color:var(--ink); }
.subtitle{ margin-top:10px; color:#223041; font-size:16px; font-weight:600; }

.grid{ max-width:980px; margin:12px auto 0; display:grid; grid-template-columns:1fr 1fr; gap:16px; }
@media (max-width:900px){ .grid{ grid-template-columns:1fr; } }
.card{
  background:#fff; border:1px solid #E4ECF7; border-radius:16px; padding:20px; min-height:170px;
  box-shadow: 0 8px 24px rgba(13,85,255,0.06);
}
.card h3{ margin:0 0 8px 0; font-size:18px; color:#132339; }
.card p{ color:#415268; font-size:14px; line-height:1.55; }
.muted{ color:#5B6B7D; font-size:12px; margin-top:8px; }
</style>
    """,
    unsafe_allow_html=True
)

# ---------- HERO ----------
st.markdown(
    """
<div class="hero">
  <div class="title">CSMA Offered-Load Explorer</div>
  <div class="subtitle">Saturated sub-networks · mixture LP · event-driven check</div>
</div>
""",
    unsafe_allow_html=True
)

st.markdown('<div class="grid">', unsafe_allow_html=True)

st.markdown(
    f"""
    <div class="card">
      <h3>1 · Analyze</h3>
      <p>Paste a topology and read the product-form throughput of every link, for the whole
      network or for any sub-network of links that are "on".</p>
      <p class="muted">Up to {MAX_LINKS} links; default access intensity {DEFAULT_RHO}.</p>
    </div>
    """,
    unsafe_allow_html=True
)

st.markdown(
    """
    <div class="card">
      <h3>2 · Optimize</h3>
      <p>Give a minimum throughput per link. The LP picks how often each sub-network should be
      on so that aggregate throughput is maximal, and returns the offered load to pump in.</p>
      <p class="muted">An infeasible requirement vector comes back with the violated rows.</p>
    </div>
    """,
    unsafe_allow_html=True
)

st.markdown(
    """
    <div class="card">
      <h3>3 · Run log</h3>
      <p>Every CLI run (analyze, optimize, simulate, experiment) is recorded with its manifest
      and event trail. Browse, filter and export them.</p>
      <p class="muted">Simulations and experiments run from the CLI.</p>
    </div>
    """,
    unsafe_allow_html=True
)

st.markdown(
    f"""
    <div class="card">
      <h3>Store</h3>
      <p>Run store: <code>{db_path()}</code></p>
      <p>Artifacts: <code>{out_dir()}</code></p>
      <p class="muted">Override with CSMA_OUT_DIR.</p>
    </div>
    """,
    unsafe_allow_html=True
)

st.markdown('</div>', unsafe_allow_html=True)

mid = st.columns([1, 3, 1])[1]
with mid:
    if st.button("Start with a topology", use_container_width=True):
        try:
            st.switch_page("pages/1_Analyze.py")
        except Exception:
            st.toast("Go to: pages/1_Analyze.py")

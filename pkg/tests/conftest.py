# tests/conftest.py

# --- import shim (allow importing from project root) ---
import sys, pathlib
ROOT = pathlib.Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
# -------------------------------------------------------

import os

import pytest

from graph import four_link_ring, make_graph
from product_form import clear_cache

RING_TOPOLOGY = """\
# 4-link ring: 1,2 sense 3,4
links 4
rho * 5.3548
edge 1 3
edge 1 4
edge 2 3
edge 2 4
"""


@pytest.fixture(autouse=True)
def store(tmp_path, monkeypatch):
    """Every test gets its own run store and artifact directory."""
    out = tmp_path / "out"
    monkeypatch.setenv("CSMA_OUT_DIR", str(out))
    yield out
    clear_cache()


@pytest.fixture
def workers():
    """Process-pool size for the acceptance-scale runs."""
    return max(1, min(10, os.cpu_count() or 1))


@pytest.fixture
def ring():
    return four_link_ring()


@pytest.fixture
def chain3():
    return make_graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def ring_file(tmp_path):
    path = tmp_path / "ring.topo"
    path.write_text(RING_TOPOLOGY, encoding="utf-8")
    return str(path)

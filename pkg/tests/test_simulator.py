# tests/test_simulator.py
import io
import math

import networkx as nx
import numpy as np
import pytest

from experiments import RING_REQUIREMENTS
from graph import DEFAULT_RHO, four_link_ring, from_networkx, make_graph, random_graph
from lp import optimal_offered_load
from product_form import isolated_throughput, saturated_throughputs
from simulator import (
    ARRIVAL,
    BACKOFF_EXPIRY,
    TX_END,
    MutualExclusionError,
    SimConfigError,
    audit_trace,
    make_config,
    run_seeds,
    simulate,
    simulate_saturated,
    write_trace_csv,
)

ISO = isolated_throughput(DEFAULT_RHO)


@pytest.mark.parametrize(
    "kw",
    [
        dict(offered_load=(0.1,)),                          # wrong length for 2 links
        dict(offered_load=(0.1, 1.0)),
        dict(offered_load=(0.1, -0.1)),
        dict(offered_load=(0.1, 0.1), duration=0.0),
        dict(offered_load=(0.1, 0.1), warmup_fraction=0.6),
        dict(offered_load=(0.1, 0.1), backoff_dist="pareto"),
    ],
)
def test_config_validation(kw):
    g = make_graph(2, [(0, 1)])
    with pytest.raises(SimConfigError):
        simulate(g, make_config(**kw))


def test_event_ranks():
    assert TX_END < BACKOFF_EXPIRY < ARRIVAL


def test_saturated_single_link():
    g = make_graph(1, [])
    res = simulate_saturated(g, 1, make_config(duration=2e4, rng_seed=3))
    assert res.th_hat[0] == pytest.approx(ISO, abs=0.02)
    assert res.to_dict()["queue_mean"] == [None]


def test_saturated_ring_matches_product_form(ring):
    res = simulate_saturated(ring, ring.full_mask, make_config(duration=5e4, rng_seed=11))
    assert res.th_hat == pytest.approx(list(saturated_throughputs(ring)), abs=0.03)


def test_saturated_subnetwork_silences_other_links(ring):
    res = simulate_saturated(ring, 0b0011, make_config(duration=2e4, rng_seed=5))
    assert res.th_hat[2] == 0.0 and res.th_hat[3] == 0.0
    assert res.th_hat[:2] == pytest.approx([ISO, ISO], abs=0.02)


def test_uniform_backoff_single_link():
    g = make_graph(1, [])
    res = simulate_saturated(g, 1, make_config(duration=2e4, rng_seed=3, backoff_dist="uniform"))
    assert res.th_hat[0] == pytest.approx(ISO, abs=0.02)


def test_light_load_is_carried():
    g = make_graph(2, [(0, 1)])
    res = simulate(g, make_config((0.3, 0.0), duration=2e4, rng_seed=2))
    assert res.th_hat[0] == pytest.approx(0.3, abs=0.03)
    assert res.th_hat[1] == 0.0
    assert res.saturated_links == ()
    assert 0.0 < res.empty_fraction[0] < 1.0
    assert res.empty_fraction[1] == pytest.approx(1.0)
    assert res.events_processed > 0
    assert res.measured_time == pytest.approx(0.9 * 2e4)


def test_overload_is_flagged():
    g = make_graph(2, [(0, 1)])
    res = simulate(g, make_config((0.6, 0.6), duration=2e4, rng_seed=4))
    assert res.saturated_links == (0, 1)
    assert res.th_hat == pytest.approx([0.4573, 0.4573], abs=0.03)
    assert res.to_dict()["saturated_links"] == [1, 2]


def test_same_seed_same_run(chain3):
    cfg = make_config((0.3, 0.05, 0.3), duration=5e3, rng_seed=9)
    a = simulate(chain3, cfg)
    b = simulate(chain3, cfg)
    assert np.array_equal(a.th_hat, b.th_hat)
    assert a.events_processed == b.events_processed
    c = simulate(chain3, make_config((0.3, 0.05, 0.3), duration=5e3, rng_seed=10))
    assert not np.array_equal(a.th_hat, c.th_hat)


def test_trace_respects_mutual_exclusion(ring):
    trace = []
    simulate_saturated(ring, ring.full_mask, make_config(duration=2e3, rng_seed=1), trace=trace)
    assert audit_trace(ring, trace) > 100
    times = [t for t, _, _ in trace]
    assert times == sorted(times)
    assert {e for _, _, e in trace} == {"backoff_expiry", "tx_start", "tx_end"}


def test_finite_load_trace_has_arrivals(chain3):
    trace = []
    simulate(chain3, make_config((0.2, 0.05, 0.2), duration=2e3, rng_seed=1), trace=trace)
    audit_trace(chain3, trace)
    assert any(e == "arrival" for _, _, e in trace)


def test_audit_trace_catches_overlap(ring):
    bad = [(0.0, 0, "tx_start"), (0.5, 2, "tx_start"), (1.0, 0, "tx_end")]
    with pytest.raises(MutualExclusionError, match="links 3 and 1"):
        audit_trace(ring, bad)


def test_trace_csv(ring):
    trace = []
    simulate_saturated(ring, 0b0001, make_config(duration=50.0, warmup_fraction=0.0, rng_seed=1), trace=trace)
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,link,event"
    assert len(lines) == len(trace) + 1
    assert all(line.split(",")[1] == "1" for line in lines[1:])


def test_run_seeds_pools_in_seed_order(chain3):
    cfg = make_config((0.2, 0.05, 0.2), duration=3e3)
    pooled = run_seeds(chain3, cfg, [1, 2, 3])
    assert [r.seed for r in pooled.runs] == [1, 2, 3]
    stacked = np.vstack([r.th_hat for r in pooled.runs])
    assert pooled.th_mean == pytest.approx(list(stacked.mean(axis=0)))
    assert np.all(np.isfinite(pooled.th_stderr))
    assert pooled.aggregate == pytest.approx(float(stacked.mean(axis=0).sum()))

    single = run_seeds(chain3, cfg, [1])
    assert np.all(np.isnan(single.th_stderr))
    with pytest.raises(SimConfigError):
        run_seeds(chain3, cfg, [])


def test_run_seeds_with_workers_matches_serial(chain3):
    cfg = make_config((0.2, 0.05, 0.2), duration=2e3)
    serial = run_seeds(chain3, cfg, [1, 2])
    parallel = run_seeds(chain3, cfg, [1, 2], workers=2)
    assert np.array_equal(serial.th_mean, parallel.th_mean)


def test_bad_saturated_mask(ring):
    with pytest.raises(SimConfigError):
        simulate_saturated(ring, 1 << 4, make_config(duration=10.0))


@pytest.mark.slow
def test_ring_offered_load_is_delivered(ring, workers):
    sol = optimal_offered_load(ring, RING_REQUIREMENTS)
    pooled = run_seeds(ring, make_config(sol.f_star), range(1, 11), workers=workers)
    assert np.all(np.abs(pooled.th_mean - sol.f_star) < 0.01)
    assert pooled.aggregate == pytest.approx(1.705, abs=0.01)
    assert math.isfinite(pooled.aggregate)


def _oracle_corpus():
    for G in nx.graph_atlas_g()[1:19]:   # every graph on 1 to 4 nodes
        yield from_networkx(G)
    for k in range(10):
        yield random_graph(6, (1.0, 2.0, 3.0)[k % 3], rng_seed=500 + k)


@pytest.mark.slow
@pytest.mark.parametrize("g", list(_oracle_corpus()), ids=lambda g: f"{g.n}links-{len(g.edges)}edges")
def test_saturated_simulation_matches_product_form(g, workers):
    pooled = run_seeds(g, make_config(duration=2e4), range(1, 31), workers=workers, active=g.full_mask)
    th = saturated_throughputs(g)
    assert np.all(pooled.th_stderr > 0.0)
    z = np.abs(pooled.th_mean - th) / pooled.th_stderr
    assert np.all(z <= 3.0), (list(th), list(pooled.th_mean), list(z))


@pytest.mark.slow
@pytest.mark.parametrize(
    "g, expected",
    [
        (make_graph(1, []), ISO),
        (make_graph(2, [(0, 1)]), DEFAULT_RHO / (1 + 2 * DEFAULT_RHO)),
        (four_link_ring(), (DEFAULT_RHO + DEFAULT_RHO ** 2) / (1 + 4 * DEFAULT_RHO + 2 * DEFAULT_RHO ** 2)),
    ],
)
def test_saturated_closed_forms(g, expected, workers):
    pooled = run_seeds(g, make_config(duration=4e5), range(1, 11), workers=workers, active=g.full_mask)
    assert pooled.th_mean == pytest.approx([expected] * g.n, abs=0.004)


@pytest.mark.slow
def test_longer_runs_shrink_cross_seed_spread(ring, chain3, workers):
    graphs = [ring, chain3, make_graph(2, [])]

    def spread(duration):
        total = 0.0
        for g in graphs:
            pooled = run_seeds(g, make_config(duration=duration), range(1, 41), workers=workers, active=g.full_mask)
            total += float(np.var(np.vstack([r.th_hat for r in pooled.runs]), axis=0, ddof=1).sum())
        return total

    assert spread(2e4) < spread(1e4)

# tests/test_graph.py
import networkx as nx
import numpy as np
import pytest

from graph import (
    DEFAULT_RHO,
    ContentionGraph,
    LinkCapError,
    SizeCapError,
    TopologyError,
    enumerate_independent_sets,
    format_topology,
    from_networkx,
    induced_subgraph,
    is_independent,
    lift_mask,
    load_topology,
    make_graph,
    mask_links,
    parse_topology,
    random_graph,
)


def test_parse_ring(ring, ring_file):
    g = load_topology(ring_file)
    assert g == ring
    assert g.edges == ((0, 2), (0, 3), (1, 2), (1, 3))
    assert g.rho == (DEFAULT_RHO,) * 4
    assert g.degrees() == [2, 2, 2, 2]


def test_parse_per_link_rho_and_comments():
    g = parse_topology("links 3  # three\nrho * 2\nrho 2 7.5\n\nedge 3 1\n")
    assert g.rho == (2.0, 7.5, 2.0)
    assert g.edges == ((0, 2),)


def test_format_then_parse_keeps_graph():
    g = make_graph(3, [(0, 1)], rho=(1.0, 2.5, 3.0))
    assert parse_topology(format_topology(g)) == g


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("edge 1 2\n", "header"),
        ("links 3\nedge 2 2\n", "self-loop"),
        ("links 3\nedge 1 4\n", "out of range"),
        ("links 3\nedge 1 3\nedge 3 1\n", "duplicate"),
        ("links 3\nrho * 0\n", "positive"),
        ("links 3\nrho 1 -2\n", "positive"),
        ("links 3\nrho 4 1.0\n", "out of range"),
        ("links 3\nlinks 3\n", "repeated"),
        ("links 3\nnode 1\n", "cannot parse"),
        ("", "missing header"),
        ("links 0\n", "out of range"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(TopologyError, match=fragment):
        parse_topology(text)


def test_link_cap_is_both_topology_and_size_error():
    with pytest.raises(LinkCapError) as info:
        parse_topology("links 25\n")
    assert isinstance(info.value, SizeCapError)
    assert isinstance(info.value, TopologyError)


def test_graph_validation():
    with pytest.raises(TopologyError):
        ContentionGraph(n=2, edges=((0, 1),), rho=(1.0,))
    with pytest.raises(TopologyError):
        make_graph(2, [(0, 1)], rho=float("inf"))
    with pytest.raises(TopologyError):
        make_graph(2, [(0, 1), (1, 0)])


def test_graph_is_hashable_and_value_equal():
    a = make_graph(3, [(1, 0), (2, 1)])
    b = make_graph(3, [(0, 1), (1, 2)])
    assert a == b and hash(a) == hash(b)
    assert a.with_rho(2.0) != a
    assert a.with_rho(2.0).rho == (2.0, 2.0, 2.0)


def test_independent_sets_of_ring(ring):
    # {}, {1}, {2}, {1,2}, {3}, {4}, {3,4}
    assert enumerate_independent_sets(ring) == [0, 1, 2, 3, 4, 8, 12]


def test_independent_sets_small_cases(chain3):
    assert enumerate_independent_sets(chain3) == [0, 1, 2, 4, 5]
    assert enumerate_independent_sets(make_graph(3, [])) == list(range(8))
    assert enumerate_independent_sets(make_graph(3, [(0, 1), (1, 2), (0, 2)])) == [0, 1, 2, 4]


def test_independent_sets_restricted_to_active(ring):
    assert enumerate_independent_sets(ring, 0b0101) == [0, 1, 4]
    assert enumerate_independent_sets(ring, 0) == [0]
    with pytest.raises(ValueError):
        enumerate_independent_sets(ring, 1 << 4)


def test_independent_set_count_matches_networkx():
    for seed in range(5):
        G = nx.gnp_random_graph(9, 0.35, seed=seed)
        g = from_networkx(G)
        # independent sets of G are the cliques of its complement, plus the empty set
        expected = 1 + sum(1 for _ in nx.enumerate_all_cliques(nx.complement(G)))
        states = enumerate_independent_sets(g)
        assert len(states) == expected
        assert states == sorted(states)
        assert all(is_independent(g, s) for s in states)


def test_is_independent(ring):
    assert is_independent(ring, 0b0011)
    assert is_independent(ring, 0b1100)
    assert not is_independent(ring, 0b0101)


def test_induced_subgraph_and_lift(ring):
    sub, links = induced_subgraph(ring, 0b1101)
    assert links == [0, 2, 3]
    assert sub.edges == ((0, 1), (0, 2))
    assert lift_mask(0b110, links) == 0b1100
    assert mask_links(0b1101) == [0, 2, 3]
    with pytest.raises(ValueError):
        induced_subgraph(ring, 0)


def test_random_graph_hits_degree_window():
    for degree in (2.0, 3.0, 4.0):
        g = random_graph(10, degree, rng_seed=7)
        assert abs(g.mean_degree() - degree) <= 0.3 + 1e-12
        assert g.n == 10


def test_random_graph_is_reproducible():
    a = random_graph(10, 3.0, rng_seed=123)
    b = random_graph(10, 3.0, rng_seed=123)
    assert a == b


def test_random_graph_reports_unreachable_degree():
    # 3-link graphs only realise mean degrees 0, 2/3, 4/3 and 2
    with pytest.raises(TopologyError, match="realised degrees"):
        random_graph(3, 1.0, rng_seed=1, retries=20)


def test_random_graph_rejects_bad_degree():
    with pytest.raises(ValueError):
        random_graph(5, 4.5, rng_seed=1)


def test_to_networkx_round_trip_keeps_rho():
    g = make_graph(3, [(0, 2)], rho=(1.0, 2.0, 3.0))
    G = g.to_networkx()
    assert sorted(G.edges()) == [(0, 2)]
    assert [G.nodes[i]["rho"] for i in range(3)] == [1.0, 2.0, 3.0]
    assert np.isclose(g.mean_degree(), 2 / 3)

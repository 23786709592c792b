# graph.py
"""
Contention graphs: representation, topology files, random generation and
feasible-state (independent set) enumeration.

Public API
----------
ContentionGraph(n, edges, rho)
    Immutable, hashable. Links are 0-based; edges are stored once as (i, j), i < j.

parse_topology(text, default_rho=DEFAULT_RHO) -> ContentionGraph
format_topology(g) -> str
load_topology(path) -> ContentionGraph

enumerate_independent_sets(g, active=None) -> List[int]
    Every StateMask inside `active`, ascending as unsigned integers.

is_independent(g, mask) -> bool
induced_subgraph(g, active) -> (ContentionGraph, List[int])
random_graph(n, target_mean_degree, rng_seed) -> ContentionGraph
four_link_ring(rho=DEFAULT_RHO) -> ContentionGraph

Topology file format (1-based link labels)
------------------------------------------
    # comment
    links 4
    rho * 5.3548
    rho 2 3.0
    edge 1 3
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

DEFAULT_RHO = 5.3548
MAX_LINKS = 24

DEGREE_WINDOW = 0.3
DEGREE_RETRIES = 200

StateMask = int
SubnetworkMask = int


class TopologyError(ValueError):
    """Malformed or invalid contention graph / topology file."""


class SizeCapError(ValueError):
    """Network too large for exhaustive sub-network decomposition."""


class LinkCapError(TopologyError, SizeCapError):
    """More links than MAX_LINKS."""


def _check_link_count(n: int, where: str = "") -> None:
    if n > MAX_LINKS:
        raise LinkCapError(f"{where}link count {n} exceeds the cap of {MAX_LINKS}")
    if n < 1:
        raise TopologyError(f"{where}link count {n} out of range. Allowed: 1..{MAX_LINKS}")


# ---------------------- the graph value ----------------------

@dataclass(frozen=True)
class ContentionGraph:
    n: int
    edges: Tuple[Tuple[int, int], ...]
    rho: Tuple[float, ...]
    adjacency: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)):
            raise TopologyError(f"Link count must be an integer, got {self.n!r}")
        _check_link_count(int(self.n))

        rho = tuple(float(r) for r in self.rho)
        if len(rho) != self.n:
            raise TopologyError(f"Expected {self.n} access intensities, got {len(rho)}")
        for i, r in enumerate(rho):
            if not (math.isfinite(r) and r > 0.0):
                raise TopologyError(f"Access intensity of link {i + 1} must be positive and finite, got {r}")

        seen = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise TopologyError(f"Self-loop on link {a + 1}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise TopologyError(f"Edge ({a + 1}, {b + 1}) references a link outside 1..{self.n}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise TopologyError(f"Duplicate edge ({key[0] + 1}, {key[1] + 1})")
            seen.add(key)

        adj = [0] * self.n
        for a, b in seen:
            adj[a] |= 1 << b
            adj[b] |= 1 << a

        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "adjacency", tuple(adj))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def neighbors(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(j for j in range(self.n) if self.adjacency[i] >> j & 1) for i in range(self.n))

    def degrees(self) -> List[int]:
        return [bin(a).count("1") for a in self.adjacency]

    def mean_degree(self) -> float:
        return 2.0 * len(self.edges) / self.n

    def with_rho(self, rho) -> "ContentionGraph":
        """Same topology, new access intensities (scalar or per-link)."""
        if np.isscalar(rho):
            rho = (float(rho),) * self.n
        return replace(self, rho=tuple(rho))

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from((i, {"rho": r}) for i, r in enumerate(self.rho))
        G.add_edges_from(self.edges)
        return G


def make_graph(n: int, edges: Iterable[Tuple[int, int]], rho=DEFAULT_RHO) -> ContentionGraph:
    """0-based convenience constructor; `rho` may be a scalar or a sequence."""
    if np.isscalar(rho):
        rho = (float(rho),) * n
    return ContentionGraph(n=n, edges=tuple(tuple(e) for e in edges), rho=tuple(rho))


def from_networkx(G: nx.Graph, rho=DEFAULT_RHO) -> ContentionGraph:
    nodes = sorted(G.nodes())
    index = {v: k for k, v in enumerate(nodes)}
    return make_graph(len(nodes), [(index[a], index[b]) for a, b in G.edges()], rho)


def four_link_ring(rho=DEFAULT_RHO) -> ContentionGraph:
    """Links 1,2 both sense 3 and 4; 1-2 and 3-4 do not sense each other."""
    return make_graph(4, [(0, 2), (0, 3), (1, 2), (1, 3)], rho)


# ---------------------- topology files ----------------------

_NUM = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan)"
_LINKS_RE = re.compile(r"^links\s+(\d+)$")
_RHO_RE = re.compile(r"^rho\s+(\*|\d+)\s+" + _NUM + r"$", re.IGNORECASE)
_EDGE_RE = re.compile(r"^edge\s+(-?\d+)\s+(-?\d+)$")


def parse_topology(text: str, default_rho: float = DEFAULT_RHO) -> ContentionGraph:
    n: Optional[int] = None
    global_rho = default_rho
    per_link = {}
    edges: List[Tuple[int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if n is None:
            m = _LINKS_RE.match(line)
            if not m:
                raise TopologyError(f"line {lineno}: expected header 'links N', got {raw.strip()!r}")
            n = int(m.group(1))
            _check_link_count(n, f"line {lineno}: ")
            continue

        m = _RHO_RE.match(line)
        if m:
            value = float(m.group(2))
            if not (math.isfinite(value) and value > 0.0):
                raise TopologyError(f"line {lineno}: access intensity must be positive and finite, got {value}")
            if m.group(1) == "*":
                global_rho = value
            else:
                label = int(m.group(1))
                if not 1 <= label <= n:
                    raise TopologyError(f"line {lineno}: link {label} out of range 1..{n}")
                per_link[label - 1] = value
            continue

        m = _EDGE_RE.match(line)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            if a == b:
                raise TopologyError(f"line {lineno}: self-loop on link {a}")
            for label in (a, b):
                if not 1 <= label <= n:
                    raise TopologyError(f"line {lineno}: link {label} out of range 1..{n}")
            key = (min(a, b) - 1, max(a, b) - 1)
            if key in edges:
                raise TopologyError(f"line {lineno}: duplicate edge {a} {b}")
            edges.append(key)
            continue

        if _LINKS_RE.match(line):
            raise TopologyError(f"line {lineno}: repeated 'links' header")
        raise TopologyError(f"line {lineno}: cannot parse {raw.strip()!r}")

    if n is None:
        raise TopologyError("missing header 'links N'")

    rho = tuple(per_link.get(i, global_rho) for i in range(n))
    return ContentionGraph(n=n, edges=tuple(edges), rho=rho)


def load_topology(path, default_rho: float = DEFAULT_RHO) -> ContentionGraph:
    with open(path, "r", encoding="utf-8") as f:
        return parse_topology(f.read(), default_rho=default_rho)


def format_topology(g: ContentionGraph) -> str:
    lines = [f"links {g.n}"]
    if len(set(g.rho)) == 1:
        lines.append(f"rho * {g.rho[0]!r}")
    else:
        lines.extend(f"rho {i + 1} {r!r}" for i, r in enumerate(g.rho))
    lines.extend(f"edge {a + 1} {b + 1}" for a, b in g.edges)
    return "\n".join(lines) + "\n"


# ---------------------- feasible states ----------------------

def _check_mask(g: ContentionGraph, mask: int) -> int:
    mask = int(mask)
    if mask < 0 or mask > g.full_mask:
        raise ValueError(f"Mask {mask:#x} has bits outside links 0..{g.n - 1}")
    return mask


def is_independent(g: ContentionGraph, mask: int) -> bool:
    rest = int(mask)
    while rest:
        low = rest & -rest
        i = low.bit_length() - 1
        if g.adjacency[i] & mask:
            return False
        rest ^= low
    return True


def enumerate_independent_sets(g: ContentionGraph, active: Optional[int] = None) -> List[int]:
    """
    Branch-and-prune over link indices: each branch adds the lowest remaining
    candidate and removes its neighbours from the candidates.
    """
    active = g.full_mask if active is None else _check_mask(g, active)
    adj = g.adjacency
    out: List[int] = []

    def extend(candidates: int, current: int) -> None:
        out.append(current)
        while candidates:
            low = candidates & -candidates
            candidates ^= low
            extend(candidates & ~adj[low.bit_length() - 1], current | low)

    extend(active, 0)
    out.sort()
    return out


def mask_links(mask: int) -> List[int]:
    """Link indices of the set bits, ascending."""
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def induced_subgraph(g: ContentionGraph, active: int) -> Tuple[ContentionGraph, List[int]]:
    """Subgraph on the links of `active` (must be non-empty) and the index map back to g."""
    links = mask_links(_check_mask(g, active))
    if not links:
        raise ValueError("Induced subgraph of an empty link set is undefined")
    pos = {v: k for k, v in enumerate(links)}
    edges = [(pos[a], pos[b]) for a, b in g.edges if a in pos and b in pos]
    return ContentionGraph(n=len(links), edges=tuple(edges), rho=tuple(g.rho[i] for i in links)), links


def lift_mask(mask: int, links: Sequence[int]) -> int:
    """Map a mask over an induced subgraph back to the parent graph's indices."""
    out = 0
    for k, i in enumerate(links):
        if mask >> k & 1:
            out |= 1 << i
    return out


# ---------------------- random graphs ----------------------

def random_graph(
    n: int,
    target_mean_degree: float,
    rng_seed: int,
    *,
    rho=DEFAULT_RHO,
    window: float = DEGREE_WINDOW,
    retries: int = DEGREE_RETRIES,
) -> ContentionGraph:
    """
    Erdos-Renyi G(n, p) with p = d / (n - 1), resampled until the realised
    mean degree 2|E|/n lies within `window` of the target. Connectivity is
    not enforced.
    """
    _check_link_count(n)
    upper = n - 1
    if not 0.0 <= target_mean_degree <= upper:
        raise ValueError(f"Mean degree {target_mean_degree} out of range. Allowed: 0..{upper}")

    p = 0.0 if upper == 0 else target_mean_degree / upper
    seeds = np.random.default_rng(rng_seed)
    realised = []
    for _ in range(retries):
        G = nx.gnp_random_graph(n, p, seed=int(seeds.integers(2**31 - 1)))
        degree = 2.0 * G.number_of_edges() / n
        if abs(degree - target_mean_degree) <= window + 1e-12:
            return make_graph(n, G.edges(), rho)
        realised.append(round(degree, 3))

    raise TopologyError(
        f"No {n}-link graph with mean degree {target_mean_degree}±{window} after {retries} draws; "
        f"realised degrees: {sorted(set(realised))}"
    )

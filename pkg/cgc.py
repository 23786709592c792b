# cgc.py
"""
Contention-graph combination: an unsaturated network as a mixture of its
2^n saturated sub-networks.

Sub-network j is the set of links that currently have packets ("on"); j is
simply the unsigned integer of that on-mask, so row j of the matrix holds
the saturated throughputs of the sub-network induced by mask j.

Public API
----------
subnetwork_throughput_matrix(g, method="auto", max_links=MAX_LINKS) -> SubnetworkThroughputMatrix
matrix_row(g, j)                    -> np.ndarray   (lazy, cached per row)
combine_throughputs(m, q)           -> np.ndarray   th_i = sum_j th[j][i] q_j
offered_load_from_throughput(th)    -> np.ndarray   f = th, range-checked
validate_q(q, n_subnets)            -> np.ndarray
write_matrix_csv(m, path_or_buf)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from graph import MAX_LINKS, ContentionGraph, SizeCapError
from product_form import saturated_throughputs

Q_SUM_TOL = 1e-9

# Dense fill works with raw partition functions; beyond this many decimal
# digits it falls back to the per-row (log-space capable) path.
DENSE_MAX_LOG10_Z = 250.0


@dataclass(frozen=True)
class SubnetworkThroughputMatrix:
    n_links: int
    th: np.ndarray  # shape (2**n_links, n_links)

    @property
    def n_subnets(self) -> int:
        return 1 << self.n_links

    def row(self, j: int) -> np.ndarray:
        return self.th[int(j)]

    def aggregate(self) -> np.ndarray:
        """Sum of link throughputs per sub-network (the LP objective coefficients)."""
        return self.th.sum(axis=1)


def check_size(g: ContentionGraph, max_links: int = MAX_LINKS) -> None:
    if g.n > max_links:
        raise SizeCapError(f"{g.n} links exceeds the decomposition cap of {max_links} (2^{g.n} sub-networks)")


def matrix_row(g: ContentionGraph, j: int) -> np.ndarray:
    return saturated_throughputs(g, int(j))


def _dense_fill(g: ContentionGraph) -> np.ndarray:
    n = g.n
    N = 1 << n
    rho = g.rho
    masks = np.arange(N, dtype=np.int64)

    # w[s] = prod rho over s if s is independent, else 0; built one link at a time
    w = np.zeros(N)
    w[0] = 1.0
    for b in range(n):
        lo = 1 << b
        lower_adj = g.adjacency[b] & (lo - 1)
        ok = (masks[:lo] & lower_adj) == 0
        w[lo:2 * lo] = np.where(ok, w[:lo] * rho[b], 0.0)

    # subset-sum transform: z[j] = sum_{s subset of j} w[s] = Z^j
    z = w.copy()
    for b in range(n):
        v = z.reshape(-1, 2, 1 << b)
        v[:, 1, :] += v[:, 0, :]

    # states of j containing i are {i} plus an independent set of j minus i's closed neighbourhood
    th = np.zeros((N, n))
    full = N - 1
    for i in range(n):
        on = ((masks >> i) & 1) == 1
        outside = full ^ (g.adjacency[i] | (1 << i))
        th[on, i] = rho[i] * z[masks[on] & outside] / z[on]
    return th


def _row_fill(g: ContentionGraph) -> np.ndarray:
    th = np.zeros((1 << g.n, g.n))
    for j in range(1 << g.n):
        th[j] = saturated_throughputs(g, j)
    return th


def subnetwork_throughput_matrix(
    g: ContentionGraph,
    method: str = "auto",
    max_links: int = MAX_LINKS,
) -> SubnetworkThroughputMatrix:
    """
    method: 'dense' (vectorised subset-sum fill), 'rows' (product form per
    sub-network) or 'auto' (dense unless the partition function could overflow).
    """
    check_size(g, max_links)
    if method not in ("auto", "dense", "rows"):
        raise ValueError(f"Invalid method '{method}'. Allowed: ['auto', 'dense', 'rows']")

    if method == "auto":
        log10_z = sum(math.log10(1.0 + r) for r in g.rho)
        method = "dense" if log10_z <= DENSE_MAX_LOG10_Z else "rows"

    th = _dense_fill(g) if method == "dense" else _row_fill(g)
    th.flags.writeable = False
    return SubnetworkThroughputMatrix(n_links=g.n, th=th)


# ---------------------- mixtures ----------------------

def validate_q(q, n_subnets: int) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (n_subnets,):
        raise ValueError(f"q has shape {q.shape}, expected ({n_subnets},)")
    if np.any(q < -Q_SUM_TOL) or np.any(q > 1.0 + Q_SUM_TOL):
        raise ValueError("Every appearance probability must lie in [0, 1]")
    total = math.fsum(q)
    if abs(total - 1.0) > Q_SUM_TOL:
        raise ValueError(f"Appearance probabilities sum to {total!r}, expected 1")
    return q


def combine_throughputs(m: SubnetworkThroughputMatrix, q) -> np.ndarray:
    q = validate_q(q, m.n_subnets)
    return q @ m.th


def indicator(n_links: int, j: int) -> np.ndarray:
    """q concentrated on sub-network j."""
    q = np.zeros(1 << n_links)
    q[int(j)] = 1.0
    return q


def offered_load_from_throughput(th) -> np.ndarray:
    f = np.array(th, dtype=float)
    bad = np.flatnonzero((f < 0.0) | (f >= 1.0) | ~np.isfinite(f))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"Throughput of link {i + 1} is {f[i]!r}; an offered load must lie in [0, 1)")
    return f


def matrix_frame(m: SubnetworkThroughputMatrix) -> pd.DataFrame:
    df = pd.DataFrame(m.th, columns=[f"link_{i + 1}" for i in range(m.n_links)])
    df.insert(0, "subnet", np.arange(m.n_subnets))
    return df


def write_matrix_csv(m: SubnetworkThroughputMatrix, path_or_buf, header: Optional[str] = None) -> None:
    """One row per sub-network: its mask j, then the n link throughputs."""
    df = matrix_frame(m)
    if header is None:
        df.to_csv(path_or_buf, index=False)
        return
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(header)
        df.to_csv(path_or_buf, index=False)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="") as f:
            f.write(header)
            df.to_csv(f, index=False)

# lp.py
"""
Offered-load optimisation over sub-network mixtures.

    maximise   sum_j (sum_i th[j][i]) q_j
    subject to sum_j th[j][i] q_j >= r_i     for every link i
               sum_j q_j == 1,  0 <= q_j <= 1

The optimal mixture q* gives th* = combine(m, q*), and the offered load to
pump into each link is f* = th*.

Public API
----------
validate_requirements(r, n)            -> np.ndarray
check_feasibility(g, r)                -> FeasibilityReport   (necessary condition only)
build_lp(m, r)                         -> LpInstance
solve_lp(lp)                           -> LpSolution
optimal_offered_load(g, r)             -> LpSolution
lp_objective_of(m, q)                  -> float
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

import simplex
from cgc import (
    SizeCapError,
    SubnetworkThroughputMatrix,
    combine_throughputs,
    offered_load_from_throughput,
    subnetwork_throughput_matrix,
    validate_q,
)
from graph import MAX_LINKS, ContentionGraph
from product_form import isolated_throughput

SUPPORT_TOL = 1e-9
RESIDUAL_TOL = 1e-9

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_SIZE_CAP = "size_cap_exceeded"
ALLOWED_STATUS = {STATUS_OPTIMAL, STATUS_INFEASIBLE, STATUS_SIZE_CAP}


# ---------------------- requirements ----------------------

def validate_requirements(r, n: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (n,):
        raise ValueError(f"Requirement vector has {r.size} entries, expected {n}")
    bad = np.flatnonzero(~np.isfinite(r) | (r < 0.0) | (r >= 1.0))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"Requirement of link {i + 1} is {r[i]!r}; allowed range is [0, 1)")
    return r


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    bounds: Tuple[float, ...]
    violations: Tuple[Tuple[int, float, float], ...]  # (1-based link, r_i, rho_i / (1 + rho_i))

    def describe(self) -> str:
        if self.ok:
            return "every requirement is within its link's isolated maximum"
        return "; ".join(f"link {i}: r={r:.4f} > {b:.4f}" for i, r, b in self.violations)


def check_feasibility(g: ContentionGraph, r) -> FeasibilityReport:
    r = validate_requirements(r, g.n)
    bounds = tuple(isolated_throughput(rho) for rho in g.rho)
    violations = tuple((i + 1, float(r[i]), bounds[i]) for i in range(g.n) if r[i] > bounds[i])
    return FeasibilityReport(ok=not violations, bounds=bounds, violations=violations)


# ---------------------- the LP ----------------------

@dataclass(frozen=True)
class LpInstance:
    matrix: SubnetworkThroughputMatrix
    c: np.ndarray            # objective coefficient per sub-network
    A: np.ndarray            # (n_links, n_subnets), A[i, j] = th[j][i]
    r: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0] + 1


def build_lp(m: SubnetworkThroughputMatrix, r) -> LpInstance:
    r = validate_requirements(r, m.n_links)
    return LpInstance(matrix=m, c=m.aggregate(), A=np.ascontiguousarray(m.th.T), r=r)


def lp_objective_of(m: SubnetworkThroughputMatrix, q) -> float:
    q = validate_q(q, m.n_subnets)
    return float(q @ m.aggregate())


@dataclass(frozen=True)
class LpSolution:
    status: str
    n_links: int
    q_star: Optional[np.ndarray] = None
    th_star: Optional[np.ndarray] = None
    f_star: Optional[np.ndarray] = None
    objective: float = float("nan")
    nonzero_count: int = 0
    support: Tuple[Tuple[int, float], ...] = ()
    certificate: Tuple[Tuple[str, float], ...] = ()   # (row label, phase-1 deficit)
    iterations: int = 0
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL

    def to_dict(self, emit_q: bool = False) -> Dict[str, Any]:
        def vec(v):
            return None if v is None else [float(x) for x in v]

        out: Dict[str, Any] = {
            "status": self.status,
            "objective": None if math.isnan(self.objective) else self.objective,
            "f_star": vec(self.f_star),
            "th_star": vec(self.th_star),
            "support": [[int(j), float(q)] for j, q in self.support],
            "support_size": self.nonzero_count,
            "iterations": self.iterations,
        }
        if self.certificate:
            out["certificate"] = [{"row": label, "deficit": d} for label, d in self.certificate]
        if self.message:
            out["message"] = self.message
        if emit_q and self.q_star is not None:
            out["q_star"] = vec(self.q_star)
        return out


def _row_label(k: int, n: int) -> str:
    return f"link {k + 1}" if k < n else "sum(q)=1"


def solve_lp(lp: LpInstance) -> LpSolution:
    """
    Vertex-optimal solution via the bounded revised simplex on
    variables [q, s] with A q - s = r, sum(q) = 1, 0 <= q <= 1, s >= 0.
    """
    n, N = lp.A.shape

    A_eq = np.zeros((n + 1, N + n))
    A_eq[:n, :N] = lp.A
    A_eq[:n, N:] = -np.eye(n)
    A_eq[n, :N] = 1.0
    b_eq = np.concatenate([lp.r, [1.0]])
    lower = np.zeros(N + n)
    upper = np.concatenate([np.ones(N), np.full(n, np.inf)])
    cost = np.concatenate([-lp.c, np.zeros(n)])

    res = simplex.minimize(cost, A_eq, b_eq, lower, upper)

    if res.status == "infeasible":
        cert = tuple((_row_label(k, n), abs(d)) for k, d in zip(res.infeasible_rows, res.row_residuals))
        return LpSolution(
            status=STATUS_INFEASIBLE,
            n_links=n,
            certificate=cert,
            iterations=res.iterations,
            message="requirements cannot be met simultaneously: " + ", ".join(lbl for lbl, _ in cert),
        )
    if res.status != "optimal":
        raise simplex.SimplexNumericalError(f"unexpected simplex status '{res.status}'", iterations=res.iterations)

    q = res.x[:N].copy()
    q[q < SUPPORT_TOL] = 0.0
    q /= math.fsum(q)

    th = combine_throughputs(lp.matrix, q)
    support = tuple((int(j), float(q[j])) for j in np.flatnonzero(q > SUPPORT_TOL))
    return LpSolution(
        status=STATUS_OPTIMAL,
        n_links=n,
        q_star=q,
        th_star=th,
        f_star=offered_load_from_throughput(th),
        objective=float(q @ lp.c),
        nonzero_count=len(support),
        support=support,
        iterations=res.iterations,
    )


def optimal_offered_load(g: ContentionGraph, r, *, max_links: int = MAX_LINKS) -> LpSolution:
    r = validate_requirements(r, g.n)
    try:
        m = subnetwork_throughput_matrix(g, max_links=max_links)
    except SizeCapError as e:
        return LpSolution(status=STATUS_SIZE_CAP, n_links=g.n, message=str(e))
    return solve_lp(build_lp(m, r))


def constraint_residuals(sol: LpSolution, lp: LpInstance) -> List[float]:
    """sum_j th[j][i] q_j - r_i per link, then sum(q) - 1."""
    if sol.q_star is None:
        return []
    slack = lp.A @ sol.q_star - lp.r
    return [float(v) for v in slack] + [math.fsum(sol.q_star) - 1.0]

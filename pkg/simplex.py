# simplex.py
"""
Dense revised simplex for bounded-variable linear programs

    minimise  c @ x   subject to   A @ x == b,   lower <= x <= upper

Lower bounds must be finite; upper bounds may be +inf.

Two phases with one artificial per row. Nonbasic variables rest at one of
their bounds, so the ratio test also considers the entering variable
flipping to its opposite bound. Pricing is Dantzig (largest reduced cost)
until BLAND_AFTER consecutive degenerate pivots, then Bland's rule for the
rest of the solve. Basic values are recomputed from the basis every
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
BLAND_AFTER = 50


class SimplexNumericalError(RuntimeError):
    def __init__(self, message: str, *, condition: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (basis condition {condition:.3e}, {iterations} iterations)")
        self.condition = condition
        self.iterations = iterations


@dataclass
class SimplexResult:
    status: str                      # optimal | infeasible | unbounded
    x: Optional[np.ndarray]
    objective: float
    basis: Tuple[int, ...]
    iterations: int
    duals: Optional[np.ndarray] = None
    infeasible_rows: Tuple[int, ...] = ()
    row_residuals: Tuple[float, ...] = ()
    used_bland: bool = False


@dataclass
class _Tableau:
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    x: np.ndarray
    basis: np.ndarray
    at_upper: np.ndarray
    iterations: int = 0
    bland: bool = False
    degenerate_run: int = 0
    max_iter: int = 0
    is_basic: np.ndarray = field(init=False)

    def __post_init__(self):
        self.is_basic = np.zeros(self.A.shape[1], dtype=bool)
        self.is_basic[self.basis] = True

    def condition(self) -> float:
        try:
            return float(np.linalg.cond(self.A[:, self.basis]))
        except np.linalg.LinAlgError:
            return float("inf")

    def refresh(self) -> np.ndarray:
        """Recompute basic values from the nonbasic ones; returns the basis matrix."""
        B = self.A[:, self.basis]
        nonbasic = ~self.is_basic
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        try:
            self.x[self.basis] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            raise SimplexNumericalError("singular basis", condition=self.condition(), iterations=self.iterations)
        return B


def _iterate(t: _Tableau, c: np.ndarray, eligible: np.ndarray) -> Tuple[str, np.ndarray]:
    """Run simplex pivots for cost vector c; returns (status, duals)."""
    m = t.A.shape[0]
    while True:
        B = t.refresh()
        try:
            y = np.linalg.solve(B.T, c[t.basis])
        except np.linalg.LinAlgError:
            raise SimplexNumericalError("singular basis", condition=t.condition(), iterations=t.iterations)

        d = c - y @ t.A
        nonbasic = eligible & ~t.is_basic
        up = nonbasic & ~t.at_upper & (d < -OPT_TOL) & (t.upper > t.lower)
        down = nonbasic & t.at_upper & (d > OPT_TOL)
        candidates = np.flatnonzero(up | down)
        if candidates.size == 0:
            return "optimal", y

        if t.bland:
            j = int(candidates[0])
        else:
            scores = np.abs(d[candidates])
            j = int(candidates[np.argmax(scores)])  # argmax keeps the first (lowest index) maximum
        direction = -1.0 if t.at_upper[j] else 1.0

        alpha = np.linalg.solve(B, t.A[:, j])
        delta = -direction * alpha          # rate of change of the basic values
        xb = t.x[t.basis]
        lb = t.lower[t.basis]
        ub = t.upper[t.basis]

        step = t.upper[j] - t.lower[j]      # bound flip
        leave = -1
        leave_to_upper = False

        ratios = np.full(m, np.inf)
        falling = delta < -PIVOT_TOL
        rising = (delta > PIVOT_TOL) & np.isfinite(ub)
        ratios[falling] = np.maximum(xb[falling] - lb[falling], 0.0) / -delta[falling]
        ratios[rising] = np.maximum(ub[rising] - xb[rising], 0.0) / delta[rising]

        if np.isfinite(ratios).any():
            best = float(ratios.min())
            if best <= step:
                ties = np.flatnonzero(ratios <= best + 1e-12)
                if t.bland:
                    k = int(ties[np.argmin(t.basis[ties])])
                else:
                    mags = np.abs(delta[ties])
                    k = int(ties[np.lexsort((t.basis[ties], -mags))[0]])
                step = best
                leave = k
                leave_to_upper = bool(rising[k])

        if not np.isfinite(step):
            return "unbounded", y

        t.x[j] += direction * step
        t.x[t.basis] = xb + delta * step

        if leave < 0:
            t.at_upper[j] = not t.at_upper[j]
            t.x[j] = t.upper[j] if t.at_upper[j] else t.lower[j]
        else:
            out = int(t.basis[leave])
            t.x[out] = t.upper[out] if leave_to_upper else t.lower[out]
            t.at_upper[out] = leave_to_upper
            t.is_basic[out] = False
            t.basis[leave] = j
            t.is_basic[j] = True
            t.at_upper[j] = False

        if step <= FEAS_TOL:
            t.degenerate_run += 1
            if t.degenerate_run >= BLAND_AFTER:
                t.bland = True
        else:
            t.degenerate_run = 0

        t.iterations += 1
        if t.iterations > t.max_iter:
            raise SimplexNumericalError("iteration budget exhausted", condition=t.condition(), iterations=t.iterations)


def minimize(
    c,
    A,
    b,
    lower=None,
    upper=None,
    *,
    max_iter: Optional[int] = None,
) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, nv = A.shape
    if c.shape != (nv,) or b.shape != (m,):
        raise ValueError(f"Inconsistent LP dimensions: A {A.shape}, b {b.shape}, c {c.shape}")

    lower = np.zeros(nv) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(nv, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if not np.all(np.isfinite(lower)):
        raise ValueError("Lower bounds must be finite")
    if np.any(upper < lower):
        raise ValueError("Some upper bound lies below its lower bound")

    # artificials absorb the residual of the all-at-lower-bound start
    residual = b - A @ lower
    sign = np.where(residual < 0.0, -1.0, 1.0)
    A_ext = np.hstack([A, np.diag(sign)])
    lo = np.concatenate([lower, np.zeros(m)])
    hi = np.concatenate([upper, np.full(m, np.inf)])
    x = np.concatenate([lower, np.abs(residual)])

    t = _Tableau(
        A=A_ext,
        b=b,
        lower=lo,
        upper=hi,
        x=x,
        basis=np.arange(nv, nv + m),
        at_upper=np.zeros(nv + m, dtype=bool),
        max_iter=max_iter if max_iter is not None else max(1000, 50 * (m + nv)),
    )

    # ---------- phase 1 ----------
    c1 = np.concatenate([np.zeros(nv), np.ones(m)])
    _iterate(t, c1, np.ones(nv + m, dtype=bool))
    t.refresh()

    artificial = t.x[nv:]
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if artificial.sum() > FEAS_TOL * scale:
        rows = np.flatnonzero(artificial > FEAS_TOL * scale)
        if rows.size == 0:
            rows = np.array([int(np.argmax(artificial))])
        return SimplexResult(
            status="infeasible",
            x=None,
            objective=float("nan"),
            basis=tuple(int(k) for k in t.basis),
            iterations=t.iterations,
            infeasible_rows=tuple(int(r) for r in rows),
            row_residuals=tuple(float(artificial[r] * sign[r]) for r in rows),
            used_bland=t.bland,
        )

    # ---------- phase 2: artificials pinned at zero ----------
    t.upper[nv:] = 0.0
    t.x[nv:] = np.where(t.is_basic[nv:], t.x[nv:], 0.0)
    t.at_upper[nv:] = False
    t.degenerate_run = 0
    c2 = np.concatenate([c, np.zeros(m)])
    eligible = np.concatenate([np.ones(nv, dtype=bool), np.zeros(m, dtype=bool)])
    status, duals = _iterate(t, c2, eligible)
    t.refresh()

    xs = t.x[:nv].copy()
    np.clip(xs, lower, upper, out=xs)
    return SimplexResult(
        status=status,
        x=xs,
        objective=float(c @ xs),
        basis=tuple(int(k) for k in t.basis),
        iterations=t.iterations,
        duals=duals,
        used_bland=t.bland,
    )

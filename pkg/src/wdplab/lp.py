"""Dense primal simplex and the winner-determination LP relaxation.

The relaxation of the allocation problem (decisions in [0,1] instead of
{0,1}) provides upper bounds for branch-and-bound and the item shadow
prices consumed by the shadow-surplus heuristic.  The solver is a plain
two-phase tableau simplex: slack variables for every row, variable upper
bounds expressed as extra rows, Dantzig pricing with a switch to Bland's
rule once degenerate pivots accumulate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AuctionInstance

FEAS_TOL = 1e-9
DUALITY_REL_TOL = 1e-6


@dataclass(frozen=True)
class LpSolution:
    """Primal point, objective, and row duals of a solved LP."""

    primal: np.ndarray
    objective: float
    duals: np.ndarray
    status: str  # optimal | infeasible | unbounded | iteration-limit


def simplex(
    c,
    A,
    b,
    upper=None,
    max_iterations: int | None = None,
) -> LpSolution:
    """Maximize c.x subject to A x <= b, x >= 0, and optional x <= upper.

    `upper` entries may be inf.  Returns duals for the rows of A only;
    multipliers of the internal bound rows are not reported.  Pivoting is
    deterministic: Dantzig pricing with lowest-index tie-breaks, Bland's
    rule after 5*(rows+columns) degenerate pivots.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.size == 0:
        A = A.reshape(len(b), len(c))
    if A.ndim != 2:
        raise ValueError("constraint matrix must be two-dimensional")
    m_orig, n = A.shape
    if len(c) != n or len(b) != m_orig:
        raise ValueError("objective, matrix, and rhs dimensions disagree")

    rows = [A]
    rhs = [b]
    if upper is not None:
        upper = np.asarray(upper, dtype=np.float64)
        if len(upper) != n:
            raise ValueError("upper bound vector has wrong length")
        bound_idx = np.flatnonzero(np.isfinite(upper))
        bound_rows = np.zeros((len(bound_idx), n))
        bound_rows[np.arange(len(bound_idx)), bound_idx] = 1.0
        rows.append(bound_rows)
        rhs.append(upper[bound_idx])
    A_ext = np.vstack(rows) if rows else A
    b_ext = np.concatenate(rhs)
    m = len(b_ext)

    # equality form [A_ext | I] with a sign flip on negative-rhs rows;
    # flipped rows get an artificial variable for phase 1
    flip = b_ext < 0
    n_art = int(flip.sum())
    n_cols = n + m + n_art
    body = np.zeros((m, n_cols))
    body[:, :n] = A_ext
    body[np.arange(m), n + np.arange(m)] = 1.0
    body[flip] *= -1.0
    rhs_t = np.where(flip, -b_ext, b_ext)
    art_cols = n + m + np.arange(n_art)
    flip_rows = np.flatnonzero(flip)
    body[flip_rows, art_cols] = 1.0

    basis = np.empty(m, dtype=np.int64)
    basis[~flip] = n + np.flatnonzero(~flip)
    basis[flip] = art_cols

    if max_iterations is None:
        max_iterations = max(2000, 50 * (m + n_cols))
    bland_after = 5 * (m + n_cols)
    state = {"degenerate": 0, "iterations": 0}

    def pivot_loop(obj: np.ndarray) -> str:
        nonlocal body, rhs_t
        red = obj - obj[basis] @ body
        while True:
            if state["iterations"] >= max_iterations:
                return "iteration-limit"
            use_bland = state["degenerate"] > bland_after
            eligible = np.flatnonzero(red > FEAS_TOL)
            if eligible.size == 0:
                return "optimal"
            if use_bland:
                enter = int(eligible[0])
            else:
                enter = int(eligible[np.argmax(red[eligible])])
            col = body[:, enter]
            pos = np.flatnonzero(col > FEAS_TOL)
            if pos.size == 0:
                return "unbounded"
            ratios = rhs_t[pos] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + FEAS_TOL]
            if use_bland:
                leave = int(ties[np.argmin(basis[ties])])
            else:
                leave = int(ties[0])
            if best < FEAS_TOL:
                state["degenerate"] += 1
            state["iterations"] += 1
            piv = body[leave, enter]
            body[leave] /= piv
            rhs_t[leave] /= piv
            other = col.copy()
            other[leave] = 0.0
            body -= np.outer(other, body[leave])
            rhs_t -= other * rhs_t[leave]
            rhs_t[(rhs_t < 0) & (rhs_t > -FEAS_TOL)] = 0.0
            red -= red[enter] * body[leave]
            basis[leave] = enter

    def extract(status: str) -> LpSolution:
        x = np.zeros(n_cols)
        x[basis] = rhs_t
        primal = x[:n].copy()
        objective = float(c @ primal)
        # dual of row i reads off the slack reduced cost; sign follows
        # the slack orientation after any row flip
        full_c = np.zeros(n_cols)
        full_c[:n] = c
        red = full_c - full_c[basis] @ body
        duals_ext = np.where(flip, red[n:n + m], -red[n:n + m])
        duals = duals_ext[:m_orig].copy()
        # optimality guarantees duals >= -FEAS_TOL; snap that noise (and
        # negative zeros) to plain zero
        duals[(duals < 0) & (duals >= -FEAS_TOL)] = 0.0
        duals += 0.0
        if status == "unbounded":
            objective = math.inf
        return LpSolution(primal=primal, objective=objective,
                          duals=duals, status=status)

    if n_art:
        phase1 = np.zeros(n_cols)
        phase1[n + m:] = -1.0
        status = pivot_loop(phase1)
        if status == "iteration-limit":
            return extract(status)
        if float(phase1[basis] @ rhs_t) < -1e-7:
            return extract("infeasible")
        # drive leftover artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= n + m:
                cand = np.flatnonzero(np.abs(body[i, :n + m]) > FEAS_TOL)
                if cand.size:
                    enter = int(cand[0])
                    piv = body[i, enter]
                    body[i] /= piv
                    rhs_t[i] /= piv
                    other = body[:, enter].copy()
                    other[i] = 0.0
                    body -= np.outer(other, body[i])
                    rhs_t -= other * rhs_t[i]
                    basis[i] = enter
        body[:, n + m:] = 0.0

    full_c = np.zeros(n_cols)
    full_c[:n] = c
    status = pivot_loop(full_c)
    return extract(status)


def solve_lp_arrays(prices, demand, units) -> LpSolution:
    """LP relaxation from raw arrays: demand is (M, N), one row per bid."""
    demand = np.asarray(demand, dtype=np.float64)
    prices = np.asarray(prices, dtype=np.float64)
    units = np.asarray(units, dtype=np.float64)
    sol = simplex(prices, demand.T, units, upper=np.ones(len(prices)))
    if sol.status != "optimal":
        raise RuntimeError(
            f"relaxation did not solve to optimality (status {sol.status})"
        )
    return sol


def solve_lp_relaxation(instance: AuctionInstance) -> LpSolution:
    """Relax the allocation problem to 0 <= a_m <= 1 and solve it.

    The objective is an upper bound on the integer optimum; duals are the
    per-item shadow prices of the unit-capacity constraints.
    """
    return solve_lp_arrays(
        instance.price_array(),
        instance.demand_matrix(),
        instance.units_array(),
    )

"""Ground-truth solvers: exhaustive enumeration and branch-and-bound.

Brute force enumerates every subset of bids and serves as the oracle for
everything else; it is guarded to 25 bids.  Branch-and-bound does a
depth-first search over bid decisions (accept branch first) in a fixed
price-density order, pruning with the LP relaxation of the residual
subproblem, and degrades to a time-limited incumbent search on large
instances.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from .heuristics import greedy_density
from .lp import simplex
from .model import Allocation, AuctionInstance

BRUTE_FORCE_MAX_BIDS = 25
_CHUNK_BITS = 16
PRUNE_TOL = 1e-9


@dataclass(frozen=True)
class ExactResult:
    allocation: Allocation
    revenue: float
    proven_optimal: bool
    nodes_explored: int
    elapsed: float


def brute_force(instance: AuctionInstance) -> ExactResult:
    """Evaluate all 2^M allocations; ties go to the lexicographically
    smallest decision vector."""
    m = instance.num_bids
    if m > BRUTE_FORCE_MAX_BIDS:
        raise ValueError(
            f"brute_force is limited to {BRUTE_FORCE_MAX_BIDS} bids, got {m}"
        )
    start = time.perf_counter()
    demand = instance.demand_matrix()
    prices = instance.price_array()
    units = instance.units_array()
    # bit i of the mask is bid i's decision, most significant first, so
    # ascending masks enumerate decision vectors in lexicographic order
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint64)
    total = 1 << m
    best_rev = -math.inf
    best_mask = 0
    for lo in range(0, total, 1 << _CHUNK_BITS):
        hi = min(lo + (1 << _CHUNK_BITS), total)
        masks = np.arange(lo, hi, dtype=np.uint64)
        bits = ((masks[:, None] >> shifts[None, :]) & 1).astype(np.int64)
        feasible = np.all(bits @ demand <= units, axis=1)
        revenue = bits @ prices
        revenue[~feasible] = -math.inf
        idx = int(np.argmax(revenue))
        if revenue[idx] > best_rev:
            best_rev = float(revenue[idx])
            best_mask = lo + idx
    decisions = tuple(int((best_mask >> int(s)) & 1) for s in shifts)
    return ExactResult(
        allocation=Allocation(decisions=decisions),
        revenue=best_rev,
        proven_optimal=True,
        nodes_explored=total,
        elapsed=time.perf_counter() - start,
    )


class _TimeUp(Exception):
    pass


def branch_and_bound(
    instance: AuctionInstance,
    time_limit: float = math.inf,
    lp_stride: int = 1,
) -> ExactResult:
    """Depth-first branch-and-bound with LP-relaxation pruning.

    Bids are sorted once by price density (price per requested unit,
    descending) and branched in that order, accept branch first.  At
    depths that are multiples of `lp_stride` the residual subproblem's LP
    relaxation bounds the subtree; elsewhere only the sum of remaining
    prices is used (`lp_stride=0` disables the LP bound entirely).  On
    expiry of `time_limit` the incumbent is returned with
    proven_optimal=False.
    """
    start = time.perf_counter()
    m = instance.num_bids
    demand = instance.demand_matrix()
    prices = instance.price_array()
    units = instance.units_array()

    density = prices / demand.sum(axis=1)
    order = sorted(range(m), key=lambda i: (-density[i], -prices[i], i))
    dem_o = demand[order]
    pri_o = prices[order]
    # suffix[k] = total price of bids k.. in branching order (trivial bound)
    suffix = np.concatenate([np.cumsum(pri_o[::-1])[::-1], [0.0]])

    incumbent = greedy_density(instance)
    best = [float(prices @ np.asarray(incumbent.decisions))]
    best_dec = np.array(incumbent.decisions, dtype=np.int64)
    state = {"nodes": 0}
    proven = True

    def dfs(k: int, remaining: np.ndarray, fixed_rev: float,
            dec: np.ndarray) -> None:
        state["nodes"] += 1
        if state["nodes"] % 64 == 0:
            if time.perf_counter() - start > time_limit:
                raise _TimeUp
        if fixed_rev > best[0] + PRUNE_TOL:
            best[0] = fixed_rev
            best_dec[:] = 0
            for i in np.flatnonzero(dec[:k]):
                best_dec[order[i]] = 1
        if k == m:
            return
        if fixed_rev + suffix[k] <= best[0] + PRUNE_TOL:
            return
        fits = np.all(dem_o[k:] <= remaining, axis=1)
        live = np.flatnonzero(fits)
        if live.size == 0:
            return
        bound = fixed_rev + float(pri_o[k:][live].sum())
        if bound <= best[0] + PRUNE_TOL:
            return
        if lp_stride and k % lp_stride == 0 and live.size > 1:
            sub = simplex(
                pri_o[k:][live],
                dem_o[k:][live].T,
                remaining.astype(float),
                upper=np.ones(live.size),
            )
            if sub.status == "optimal":
                if fixed_rev + sub.objective <= best[0] + PRUNE_TOL:
                    return
        if fits[0]:
            dec[k] = 1
            dfs(k + 1, remaining - dem_o[k], fixed_rev + pri_o[k], dec)
            dec[k] = 0
        dfs(k + 1, remaining, fixed_rev, dec)

    if time_limit > 0:
        limit = sys.getrecursionlimit()
        if m * 2 + 200 > limit:
            sys.setrecursionlimit(m * 2 + 200)
        try:
            dfs(0, units.copy(), 0.0, np.zeros(m, dtype=np.int64))
        except _TimeUp:
            proven = False
        finally:
            sys.setrecursionlimit(limit)
    else:
        proven = False

    return ExactResult(
        allocation=Allocation(decisions=tuple(int(d) for d in best_dec)),
        revenue=best[0],
        proven_optimal=proven,
        nodes_explored=state["nodes"],
        elapsed=time.perf_counter() - start,
    )

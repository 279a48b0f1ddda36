"""Classical baselines: LP rounding, shadow surplus, and Casanova.

All four heuristics return feasible allocations.  `greedy_density` and
`ss` are deterministic; `rlp` and `casanova` are deterministic given a
generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lp import solve_lp_relaxation
from .model import Allocation, AuctionInstance

SS_ZERO_DENOM = 1e-12


@dataclass(frozen=True)
class CasanovaParams:
    """Stochastic-local-search knobs.

    `step_cap` bounds the steps of one restart; None means 50 * M.
    """

    walk_prob: float = 0.8
    novelty_prob: float = 0.5
    stagnation_steps: int = 5000
    restarts: int = 5
    step_cap: int | None = None

    def validate(self) -> None:
        if not 0 <= self.walk_prob <= 1 or not 0 <= self.novelty_prob <= 1:
            raise ValueError("probabilities must be in [0, 1]")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def _greedy_fill(
    instance: AuctionInstance,
    order: list[int],
    units_left: np.ndarray | None = None,
    decisions: np.ndarray | None = None,
) -> np.ndarray:
    """Accept bids along `order` whenever they still fit."""
    demand = instance.demand_matrix()
    if units_left is None:
        units_left = instance.units_array().copy()
    if decisions is None:
        decisions = np.zeros(instance.num_bids, dtype=np.int64)
    for i in order:
        if np.all(demand[i] <= units_left):
            decisions[i] = 1
            units_left -= demand[i]
    return decisions


def greedy_density(instance: AuctionInstance) -> Allocation:
    """Accept bids in descending price-per-unit order while they fit."""
    prices = instance.price_array()
    density = prices / instance.demand_matrix().sum(axis=1)
    order = sorted(range(instance.num_bids),
                   key=lambda i: (-density[i], -prices[i], i))
    decisions = _greedy_fill(instance, order)
    return Allocation(decisions=tuple(int(d) for d in decisions))


def rlp(instance: AuctionInstance, rng: np.random.Generator) -> Allocation:
    """Relaxed-LP rounding.

    Bids are visited in descending order of their fractional LP value;
    each is provisionally kept with that probability and included when
    still feasible.
    """
    sol = solve_lp_relaxation(instance)
    frac = sol.primal
    order = sorted(range(instance.num_bids), key=lambda i: (-frac[i], i))
    demand = instance.demand_matrix()
    units_left = instance.units_array().copy()
    decisions = np.zeros(instance.num_bids, dtype=np.int64)
    for i in order:
        if rng.random() < frac[i] and np.all(demand[i] <= units_left):
            decisions[i] = 1
            units_left -= demand[i]
    return Allocation(decisions=tuple(int(d) for d in decisions))


def ss(instance: AuctionInstance) -> Allocation:
    """Shadow surplus: greedy in descending price over dual-priced demand.

    A bid whose requested items carry no shadow price at all scores
    infinite and ranks first.
    """
    sol = solve_lp_relaxation(instance)
    demand = instance.demand_matrix()
    prices = instance.price_array()
    denom = demand @ sol.duals
    scores = np.where(denom < SS_ZERO_DENOM, math.inf, prices / np.where(
        denom < SS_ZERO_DENOM, 1.0, denom))
    order = sorted(range(instance.num_bids),
                   key=lambda i: (-scores[i], -prices[i], i))
    decisions = _greedy_fill(instance, order)
    return Allocation(decisions=tuple(int(d) for d in decisions))


def casanova(
    instance: AuctionInstance,
    params: CasanovaParams | None = None,
    rng: np.random.Generator | None = None,
) -> Allocation:
    """Casanova-style stochastic local search.

    Starts from the empty allocation and repeatedly adds an unallocated
    bid: a uniformly random one with `walk_prob`, otherwise the top bid
    by normalized price unless it was added more recently than the
    runner-up, in which case novelty kicks in.  Inserting a bid evicts
    conflicting accepted bids.  The search soft-restarts after
    `stagnation_steps` without revenue improvement and keeps the best
    allocation across all restarts.
    """
    if params is None:
        params = CasanovaParams()
    params.validate()
    if rng is None:
        raise ValueError("casanova requires a random generator")
    m = instance.num_bids
    demand = instance.demand_matrix()
    prices = instance.price_array()
    units = instance.units_array()
    norm_price = prices / demand.sum(axis=1)
    rank_all = sorted(range(m), key=lambda i: (-norm_price[i], i))
    step_cap = params.step_cap if params.step_cap is not None else 50 * m

    best_rev = 0.0
    best_dec = np.zeros(m, dtype=np.int64)

    for run_rng in rng.spawn(params.restarts):
        decisions = np.zeros(m, dtype=np.int64)
        usage = np.zeros_like(units)
        last_added = np.full(m, -math.inf)
        revenue = 0.0
        since_improvement = 0
        for step in range(1, step_cap + 1):
            unalloc = np.flatnonzero(decisions == 0)
            if unalloc.size == 0:
                break
            if run_rng.random() < params.walk_prob or unalloc.size == 1:
                pick = int(unalloc[run_rng.integers(unalloc.size)])
            else:
                ranked = [i for i in rank_all if decisions[i] == 0]
                top, second = ranked[0], ranked[1]
                if step - last_added[top] < step - last_added[second]:
                    pick = top
                elif run_rng.random() < params.novelty_prob:
                    pick = top
                else:
                    pick = second
            decisions[pick] = 1
            last_added[pick] = step
            usage += demand[pick]
            while np.any(usage > units):
                over = usage > units
                accepted = np.flatnonzero(decisions)
                evictable = [i for i in accepted
                             if i != pick and np.any(demand[i][over] > 0)]
                victim = min(evictable, key=lambda i: (norm_price[i], i))
                decisions[victim] = 0
                usage -= demand[victim]
            revenue = float(prices @ decisions)
            if revenue > best_rev + 1e-12:
                best_rev = revenue
                best_dec = decisions.copy()
                since_improvement = 0
            else:
                since_improvement += 1
            if since_improvement >= params.stagnation_steps:
                decisions = np.zeros(m, dtype=np.int64)
                usage = np.zeros_like(units)
                last_added = np.full(m, -math.inf)
                since_improvement = 0

    return Allocation(decisions=tuple(int(d) for d in best_dec))

"""Decode a model's probability map into a feasible allocation.

Two decoders share the same outer loop (predict, sort unlabeled bids by
probability, commit decisions, rebuild the residual graph):

* basic: accept only the top-ranked bid per model call, then drop bids
  that no longer fit; model calls equal the number of accepted bids.
* traversal: walk the whole ranking, accepting every bid that still fits,
  stop at the first that does not, reject it and everything now
  conflicting; usually far fewer model calls.

Ties in probability go to the lower original bid index, which also makes
both decoders deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gnn
from .graph import BidItemGraph, build_graph, normalize_features, residual_graph
from .model import Allocation, AuctionInstance


@dataclass(frozen=True)
class IterationRecord:
    accepted: tuple[int, ...]
    rejected: tuple[int, ...]
    used_model: bool = True


@dataclass(frozen=True)
class SolveTrace:
    allocation: Allocation
    gnn_calls: int
    iterations: tuple[IterationRecord, ...]


def _predict(model, graph: BidItemGraph) -> np.ndarray:
    # callables stand in for a trained model (useful for oracle tests)
    if callable(model):
        return np.asarray(model(graph), dtype=np.float64)
    return gnn.forward(model, graph)


def _ranked(graph: BidItemGraph, probs: np.ndarray) -> list[int]:
    return sorted(range(graph.num_bids),
                  key=lambda i: (-probs[i], graph.bid_index[i]))


def _solve(model, instance: AuctionInstance, mode: str,
           initial_graph: BidItemGraph | None) -> SolveTrace:
    graph = initial_graph if initial_graph is not None else build_graph(instance)
    decisions = np.zeros(instance.num_bids, dtype=np.int64)
    calls = 0
    records: list[IterationRecord] = []

    while graph.num_bids > 0:
        if graph.num_items == 0:
            # nothing left to allocate; remaining bids cannot be satisfied
            records.append(IterationRecord(
                accepted=(), rejected=graph.bid_index, used_model=False))
            break
        probs = _predict(model, normalize_features(graph))
        calls += 1
        order = _ranked(graph, probs)

        if mode == "basic":
            accepted_local = [order[0]]
            rejected_local: list[int] = []
        else:
            units_left = graph.instance.units_array().copy()
            demand = graph.instance.demand_matrix()
            accepted_local = []
            rejected_local = []
            for i in order:
                if np.all(demand[i] <= units_left):
                    accepted_local.append(i)
                    units_left -= demand[i]
                else:
                    rejected_local.append(i)
                    break

        for i in accepted_local:
            decisions[graph.bid_index[i]] = 1
        nxt = residual_graph(graph, accepted_local, rejected_local)
        rejected_orig = tuple(graph.bid_index[i] for i in rejected_local)
        records.append(IterationRecord(
            accepted=tuple(graph.bid_index[i] for i in accepted_local),
            rejected=rejected_orig + nxt.dropped_conflicting,
        ))
        graph = nxt

    return SolveTrace(
        allocation=Allocation(decisions=tuple(int(d) for d in decisions)),
        gnn_calls=calls,
        iterations=tuple(records),
    )


def basic_solve(model, instance: AuctionInstance,
                initial_graph: BidItemGraph | None = None) -> SolveTrace:
    """One accepted bid per model call until every bid is labeled."""
    return _solve(model, instance, "basic", initial_graph)


def traversal_solve(model, instance: AuctionInstance,
                    initial_graph: BidItemGraph | None = None) -> SolveTrace:
    """Greedy sweep of the ranking per model call; needs fewer calls."""
    return _solve(model, instance, "traversal", initial_graph)

"""Single-label training samples from labeled instances.

A labeled instance (instance + good allocation) is unrolled into a chain
of shrinking states: emit one sample per currently-allocated bid (kept
with probability `keep_prob`), then remove one random allocated bid,
deduct its units, drop newly-conflicting bids, and repeat while at least
two allocated bids remain.  With keep_prob=1 this yields exactly
(K - 1)(K + 2) / 2 samples from an instance with K allocated bids.

Mix generation first expands the instance set with near-optimal
allocations found by local search around each optimum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graph import reduce_instance
from .model import (
    Allocation,
    AuctionInstance,
    evaluate_allocation,
    instance_from_json,
    instance_to_json,
)

EXPANSION_MOVE_BUDGET = 200


@dataclass(frozen=True)
class LabeledInstance:
    instance: AuctionInstance
    allocation: Allocation
    optimal_flag: bool = True


@dataclass(frozen=True)
class TrainingSample:
    state: AuctionInstance
    label_index: int
    source: str = "optimal"  # optimal | suboptimal


def one_hot_label_generation(
    instance: AuctionInstance,
    allocation: Allocation,
    keep_prob: float,
    rng: np.random.Generator,
    source: str = "optimal",
) -> list[TrainingSample]:
    """One sample per allocated bid, each kept with `keep_prob`."""
    out = []
    for j, a in enumerate(allocation.decisions):
        if a and rng.random() < keep_prob:
            out.append(TrainingSample(state=instance, label_index=j,
                                      source=source))
    return out


def node_removal(
    instance: AuctionInstance,
    allocation: Allocation,
    rng: np.random.Generator,
) -> tuple[AuctionInstance, Allocation]:
    """Grant one random allocated bid and shrink the state around it.

    The chosen bid's units are deducted and its node removed; exhausted
    items and bids that no longer fit disappear; the allocation vector
    keeps only the surviving bids' bits.  The surviving allocated bids
    are unaffected: together they fit the reduced units by construction.
    """
    allocated = allocation.accepted_indices()
    if not allocated:
        raise ValueError("no allocated bid to remove")
    chosen = allocated[int(rng.integers(len(allocated)))]
    reduced, kept_bids, _, _ = reduce_instance(instance, [chosen], [])
    new_alloc = Allocation(
        decisions=tuple(allocation.decisions[i] for i in kept_bids)
    )
    return reduced, new_alloc


def single_label_sample_generation(
    labeled: list[LabeledInstance],
    keep_prob: float,
    rng: np.random.Generator,
) -> list[TrainingSample]:
    """Unroll every labeled instance into single-label samples."""
    samples: list[TrainingSample] = []
    for li in labeled:
        source = "optimal" if li.optimal_flag else "suboptimal"
        state, alloc = li.instance, li.allocation
        while alloc.num_accepted() >= 2 and state.num_bids >= 2:
            samples.extend(
                one_hot_label_generation(state, alloc, keep_prob, rng, source)
            )
            state, alloc = node_removal(state, alloc, rng)
    return samples


def expected_sample_count(allocated_bids: int) -> int:
    """Per-instance sample count under keep_prob=1."""
    k = allocated_bids
    return (k - 1) * (k + 2) // 2


def _local_search_move(
    instance: AuctionInstance,
    decisions: np.ndarray,
    rng: np.random.Generator,
    density_order: list[int],
) -> np.ndarray:
    """Delete a random accepted bid, then greedily refill (skipping it)."""
    demand = instance.demand_matrix()
    accepted = np.flatnonzero(decisions)
    out = decisions.copy()
    removed = int(accepted[rng.integers(accepted.size)])
    out[removed] = 0
    units_left = instance.units_array() - demand[np.flatnonzero(out)].sum(axis=0)
    for i in density_order:
        if i != removed and out[i] == 0 and np.all(demand[i] <= units_left):
            out[i] = 1
            units_left -= demand[i]
    return out


def expand_instance_set(
    labeled: list[LabeledInstance],
    gap_threshold: float = 0.01,
    copies: int = 7,
    rng: np.random.Generator | None = None,
) -> list[LabeledInstance]:
    """Append near-optimal allocations found by local search.

    For each proven-optimal instance, collects up to `copies` distinct
    feasible allocations within `gap_threshold` of the optimum (and
    different from it), each appended as a non-optimal labeled instance.
    """
    if rng is None:
        raise ValueError("expand_instance_set requires a random generator")
    out = list(labeled)
    for li in labeled:
        if not li.optimal_flag:
            raise ValueError("instance set expansion needs proven-optimal labels")
        instance = li.instance
        prices = instance.price_array()
        density = prices / instance.demand_matrix().sum(axis=1)
        density_order = sorted(range(instance.num_bids),
                               key=lambda i: (-density[i], -prices[i], i))
        optimal = np.asarray(li.allocation.decisions, dtype=np.int64)
        if not optimal.any():
            continue
        opt_rev = float(prices @ optimal)
        threshold = (1.0 - gap_threshold) * opt_rev
        found: list[tuple[int, ...]] = []
        seen = {tuple(int(x) for x in optimal)}
        current = optimal.copy()
        for _ in range(EXPANSION_MOVE_BUDGET * copies):
            if len(found) >= copies:
                break
            if not current.any():
                current = optimal.copy()
            cand = _local_search_move(instance, current, rng, density_order)
            rev = float(prices @ cand)
            key = tuple(int(x) for x in cand)
            if rev >= threshold:
                if key not in seen:
                    seen.add(key)
                    found.append(key)
                current = cand
            else:
                current = optimal.copy()
        for key in found:
            out.append(LabeledInstance(
                instance=instance,
                allocation=Allocation(decisions=key),
                optimal_flag=False,
            ))
    return out


# --- files -------------------------------------------------------------------


def save_dataset(samples: list[TrainingSample], path: str) -> None:
    """One JSON document per line."""
    with open(path, "w") as fh:
        for s in samples:
            fh.write(json.dumps({
                "instance": instance_to_json(s.state),
                "label_index": s.label_index,
                "source": s.source,
            }))
            fh.write("\n")


def load_dataset(path: str) -> list[TrainingSample]:
    samples = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            samples.append(TrainingSample(
                state=instance_from_json(doc["instance"]),
                label_index=int(doc["label_index"]),
                source=str(doc.get("source", "optimal")),
            ))
    return samples


def save_labeled(li: LabeledInstance, path: str) -> None:
    ev = evaluate_allocation(li.instance, li.allocation)
    with open(path, "w") as fh:
        json.dump({
            "instance": instance_to_json(li.instance),
            "decisions": list(li.allocation.decisions),
            "revenue": ev.revenue,
            "proven_optimal": li.optimal_flag,
        }, fh)
        fh.write("\n")


def load_labeled(path: str) -> LabeledInstance:
    with open(path) as fh:
        doc = json.load(fh)
    return LabeledInstance(
        instance=instance_from_json(doc["instance"]),
        allocation=Allocation(decisions=tuple(int(x) for x in doc["decisions"])),
        optimal_flag=bool(doc["proven_optimal"]),
    )

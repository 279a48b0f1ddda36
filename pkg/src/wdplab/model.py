"""Core data types for multi-unit auction winner determination.

An auction offers N item types with a limited number of identical units
each.  Single-minded bidders submit one all-or-nothing bid: a per-item
demand vector plus the price they are willing to pay for the whole bundle.
The winner determination problem picks the revenue-maximizing subset of
bids whose combined demand fits the available units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Item:
    """One item type with `units` identical copies for sale."""

    units: int


@dataclass(frozen=True)
class Bid:
    """A single-minded bid: requested units per item and a bundle price."""

    demand: tuple[int, ...]
    price: float

    def total_units(self) -> int:
        return int(sum(self.demand))


@dataclass(frozen=True)
class AuctionInstance:
    """An auction: items with unit capacities plus the submitted bids."""

    items: tuple[Item, ...]
    bids: tuple[Bid, ...]
    name: str = ""

    @property
    def num_items(self) -> int:
        return len(self.items)

    @property
    def num_bids(self) -> int:
        return len(self.bids)

    def units_array(self) -> np.ndarray:
        return np.array([it.units for it in self.items], dtype=np.int64)

    def demand_matrix(self) -> np.ndarray:
        """(M, N) matrix of requested units."""
        return np.array(
            [b.demand for b in self.bids], dtype=np.int64
        ).reshape(self.num_bids, self.num_items)

    def price_array(self) -> np.ndarray:
        return np.array([b.price for b in self.bids], dtype=np.float64)


@dataclass(frozen=True)
class Allocation:
    """Binary accept/reject decision for every bid of an instance."""

    decisions: tuple[int, ...]

    def accepted_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.decisions) if a)

    def num_accepted(self) -> int:
        return int(sum(self.decisions))


@dataclass(frozen=True)
class AllocationEval:
    revenue: float
    feasible: bool
    used_units: tuple[int, ...]


@dataclass(frozen=True)
class MetricsRow:
    """Report metrics for one (instance, allocation) pair."""

    revenue: float
    gap: float
    utilization: float
    satisfaction: float
    iterations: int = 0
    elapsed: float = 0.0


REVENUE_TOL = 1e-9


def validate_instance(instance: AuctionInstance) -> list[str]:
    """Check all type invariants; returns a list of violations (empty = ok)."""
    violations: list[str] = []
    if instance.num_items < 1:
        violations.append("instance has no items")
    if instance.num_bids < 1:
        violations.append("instance has no bids")
    for n, item in enumerate(instance.items):
        if item.units < 1:
            violations.append(f"item {n}: units < 1")
    n_items = instance.num_items
    for m, bid in enumerate(instance.bids):
        if len(bid.demand) != n_items:
            violations.append(
                f"bid {m}: demand length {len(bid.demand)} != {n_items}"
            )
            continue
        if bid.price <= 0:
            violations.append(f"bid {m}: price must be positive")
        if not any(d > 0 for d in bid.demand):
            violations.append(f"bid {m}: demand is all zero")
        for n, d in enumerate(bid.demand):
            if d < 0:
                violations.append(f"bid {m}: negative demand for item {n}")
            elif n < len(instance.items) and d > instance.items[n].units:
                violations.append(
                    f"bid {m}: demand for item {n} exceeds available units"
                )
    return violations


def evaluate_allocation(
    instance: AuctionInstance, alloc: Allocation
) -> AllocationEval:
    """Revenue, feasibility, and per-item used units of an allocation.

    Feasible iff for every item the summed demand of accepted bids does
    not exceed its available units.
    """
    if len(alloc.decisions) != instance.num_bids:
        raise ValueError(
            f"allocation length {len(alloc.decisions)} != "
            f"number of bids {instance.num_bids}"
        )
    a = np.asarray(alloc.decisions, dtype=np.int64)
    used = instance.demand_matrix().T @ a
    revenue = float(instance.price_array() @ a)
    feasible = bool(np.all(used <= instance.units_array()))
    return AllocationEval(revenue, feasible, tuple(int(u) for u in used))


def metrics(
    instance: AuctionInstance,
    alloc: Allocation,
    reference_revenue: float,
    *,
    iterations: int = 0,
    elapsed: float = 0.0,
) -> MetricsRow:
    """Gap, resource utilization, and bidder satisfaction for an allocation.

    gap = (reference - revenue) / reference; utilization is the fraction
    of all available units that were allocated; satisfaction is the
    fraction of bidders whose bundle was granted.
    """
    if reference_revenue <= 0:
        raise ValueError("reference_revenue must be positive")
    ev = evaluate_allocation(instance, alloc)
    if not ev.feasible:
        raise ValueError("allocation is infeasible")
    gap = (reference_revenue - ev.revenue) / reference_revenue
    utilization = sum(ev.used_units) / int(instance.units_array().sum())
    satisfaction = alloc.num_accepted() / instance.num_bids
    return MetricsRow(
        revenue=ev.revenue,
        gap=gap,
        utilization=utilization,
        satisfaction=satisfaction,
        iterations=iterations,
        elapsed=elapsed,
    )


# --- JSON instance / allocation files ---------------------------------------


def instance_to_json(instance: AuctionInstance) -> dict:
    return {
        "name": instance.name,
        "items": [{"units": it.units} for it in instance.items],
        "bids": [
            {"demand": list(b.demand), "price": b.price} for b in instance.bids
        ],
    }


def instance_from_json(doc: dict) -> AuctionInstance:
    items = tuple(Item(units=int(d["units"])) for d in doc["items"])
    bids = tuple(
        Bid(demand=tuple(int(x) for x in d["demand"]), price=float(d["price"]))
        for d in doc["bids"]
    )
    return AuctionInstance(items=items, bids=bids, name=str(doc.get("name", "")))


def save_instance(instance: AuctionInstance, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_json(instance), fh)
        fh.write("\n")


def load_instance(path: str) -> AuctionInstance:
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def allocation_to_json(alloc: Allocation, revenue: float, **extra) -> dict:
    doc = {"decisions": list(alloc.decisions), "revenue": revenue}
    doc.update(extra)
    return doc


def allocation_from_json(doc: dict) -> tuple[Allocation, float]:
    alloc = Allocation(decisions=tuple(int(x) for x in doc["decisions"]))
    return alloc, float(doc["revenue"])


def save_allocation(path: str, alloc: Allocation, revenue: float, **extra) -> None:
    with open(path, "w") as fh:
        json.dump(allocation_to_json(alloc, revenue, **extra), fh)
        fh.write("\n")


def make_instance(
    units: Sequence[int],
    bids: Sequence[tuple[Sequence[int], float]],
    name: str = "",
) -> AuctionInstance:
    """Convenience constructor from plain sequences."""
    return AuctionInstance(
        items=tuple(Item(units=int(u)) for u in units),
        bids=tuple(
            Bid(demand=tuple(int(d) for d in dem), price=float(p))
            for dem, p in bids
        ),
        name=name,
    )

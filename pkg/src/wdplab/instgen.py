"""Synthetic instance generators.

Two families: decay-distribution instances (bids include each item with a
fixed probability, then accumulate units geometrically) and a cloud
VM-allocation flavor where users of different load types request scaled
copies of a base bundle.  Both regenerate duplicate bids and keep the bid
set free of domination: a bid that requests at least as much of every item
as another while paying no more can never win and is discarded.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import AuctionInstance, Bid, Item
from .rng import make_rng

RETRY_FACTOR = 100


class GenerationExhaustedError(RuntimeError):
    """Raised when the retry budget runs out before M distinct bids exist."""


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the decay-distribution generator."""

    num_bids: int
    num_items: int
    max_units: int
    item_prob: float = 0.8
    unit_prob: float = 0.65
    seed: int = 0
    name: str = ""

    def validate(self) -> None:
        if self.num_bids < 1 or self.num_items < 1 or self.max_units < 1:
            raise ValueError("num_bids, num_items, max_units must be >= 1")
        if not 0 < self.item_prob <= 1:
            raise ValueError("item_prob must be in (0, 1]")
        if not 0 < self.unit_prob < 1:
            raise ValueError("unit_prob must be in (0, 1)")


@dataclass(frozen=True)
class VmConfig:
    """Parameters of the VM-allocation generator.

    Users are split into load types by `type_fractions`; a type's base
    bundle draw is capped at `unit_cap` units per VM type and then scaled
    by the matching entry of `type_factors`.
    """

    num_users: int
    num_vm_types: int = 90
    units_per_type: int = 500
    unit_cap: int = 5
    type_fractions: tuple[float, ...] = (0.10, 0.40, 0.50)
    type_factors: tuple[float, ...] = (2.0, 1.5, 1.0)
    item_prob: float = 0.8
    unit_prob: float = 0.65
    seed: int = 0
    name: str = ""

    def validate(self) -> None:
        if self.num_users < 1 or self.num_vm_types < 1:
            raise ValueError("num_users and num_vm_types must be >= 1")
        if self.units_per_type < 1 or self.unit_cap < 1:
            raise ValueError("units_per_type and unit_cap must be >= 1")
        if len(self.type_fractions) != len(self.type_factors):
            raise ValueError("type_fractions and type_factors lengths differ")
        if abs(sum(self.type_fractions) - 1.0) > 1e-9:
            raise ValueError("type_fractions must sum to 1")
        if any(f <= 0 for f in self.type_factors):
            raise ValueError("type_factors must be positive")
        if not 0 < self.item_prob <= 1:
            raise ValueError("item_prob must be in (0, 1]")
        if not 0 < self.unit_prob < 1:
            raise ValueError("unit_prob must be in (0, 1)")


def dominates(candidate: Bid, other: Bid) -> bool:
    """True iff `candidate` is dominated by `other`.

    That is: `candidate` demands at least as many units of every item and
    pays no more.  Identical bids dominate each other.
    """
    if len(candidate.demand) != len(other.demand):
        raise ValueError("demand vectors have different lengths")
    return candidate.price <= other.price and all(
        c >= o for c, o in zip(candidate.demand, other.demand)
    )


def prune_dominated(bids: list[Bid] | tuple[Bid, ...]) -> list[Bid]:
    """Remove every bid dominated by another retained bid.

    Among identical bids (mutual domination) the earliest one is kept.
    Domination is transitive, so dropping anything dominated by any other
    bid leaves exactly the maximal set.
    """
    kept = []
    for i, bid in enumerate(bids):
        dominated = False
        for j, other in enumerate(bids):
            if i == j:
                continue
            if dominates(bid, other) and (not dominates(other, bid) or j < i):
                dominated = True
                break
        if not dominated:
            kept.append(bid)
    return kept


def _draw_demand(
    rng: np.random.Generator,
    caps: np.ndarray,
    item_prob: float,
    unit_prob: float,
) -> np.ndarray | None:
    """One decay-distribution bundle; None if no item made it in."""
    demand = np.zeros(len(caps), dtype=np.int64)
    for n, cap in enumerate(caps):
        if rng.random() < item_prob:
            k = 1
            while k < cap and rng.random() < unit_prob:
                k += 1
            demand[n] = k
    if demand.sum() == 0:
        return None
    return demand


def _draw_price(rng: np.random.Generator, total_units: int) -> float:
    # uniform on (0, total_units]: keeps prices strictly positive
    return total_units * (1.0 - rng.random())


def _fill_bids(
    rng: np.random.Generator,
    num_bids: int,
    draw_one,
) -> list[Bid]:
    """Collect `num_bids` distinct, mutually non-dominated bids.

    `draw_one(rng, slot)` produces a candidate Bid for a slot.  Duplicates
    and candidates dominated by the current set are redrawn; existing bids
    dominated by a new candidate are evicted and their slots refilled.
    """
    slots: deque[int] = deque(range(num_bids))
    current: dict[int, Bid] = {}
    budget = RETRY_FACTOR * num_bids
    attempts = 0
    while slots:
        attempts += 1
        if attempts > budget:
            raise GenerationExhaustedError(
                f"could not generate {num_bids} non-dominated bids "
                f"within {budget} attempts"
            )
        slot = slots[0]
        bid = draw_one(rng, slot)
        if bid is None:
            continue
        if any(bid.demand == b.demand and bid.price == b.price
               for b in current.values()):
            continue
        if any(dominates(bid, b) for b in current.values()):
            continue
        evicted = [s for s, b in current.items() if dominates(b, bid)]
        for s in evicted:
            del current[s]
            slots.append(s)
        slots.popleft()
        current[slot] = bid
    return [current[s] for s in sorted(current)]


def gen_synthetic(cfg: SynthConfig) -> AuctionInstance:
    """Generate a decay-distribution instance.

    Item units are uniform on {1..max_units}.  Each bid includes each item
    independently with `item_prob`; an included item starts at one unit
    and gains further units with `unit_prob` until a failure or the item's
    full stock is reached.  The price is uniform on (0, total units].
    """
    cfg.validate()
    rng = make_rng(cfg.seed)
    units = rng.integers(1, cfg.max_units + 1, size=cfg.num_items)

    def draw_one(r, _slot):
        demand = _draw_demand(r, units, cfg.item_prob, cfg.unit_prob)
        if demand is None:
            return None
        return Bid(demand=tuple(int(d) for d in demand),
                   price=_draw_price(r, int(demand.sum())))

    bids = _fill_bids(rng, cfg.num_bids, draw_one)
    name = cfg.name or (
        f"synth-m{cfg.num_bids}-n{cfg.num_items}-u{cfg.max_units}-s{cfg.seed}"
    )
    return AuctionInstance(
        items=tuple(Item(units=int(u)) for u in units),
        bids=tuple(bids),
        name=name,
    )


def _type_counts(num_users: int, fractions: tuple[float, ...]) -> list[int]:
    counts = [int(math.floor(num_users * f)) for f in fractions[:-1]]
    counts.append(num_users - sum(counts))
    return counts


def gen_vm(cfg: VmConfig) -> AuctionInstance:
    """Generate a VM-allocation instance.

    Every VM type has `units_per_type` units.  Each user draws a base
    bundle as in `gen_synthetic` with per-type draws capped at
    `unit_cap`, multiplies the counts by its load-type factor (rounded
    up), and prices the bundle uniformly on (0, scaled total units].
    """
    cfg.validate()
    rng = make_rng(cfg.seed)
    units = np.full(cfg.num_vm_types, cfg.units_per_type, dtype=np.int64)
    caps = np.minimum(units, cfg.unit_cap)

    counts = _type_counts(cfg.num_users, cfg.type_fractions)
    slot_factor: list[float] = []
    for count, factor in zip(counts, cfg.type_factors):
        slot_factor.extend([factor] * count)

    def draw_one(r, slot):
        base = _draw_demand(r, caps, cfg.item_prob, cfg.unit_prob)
        if base is None:
            return None
        factor = slot_factor[slot]
        scaled = np.minimum(
            np.ceil(base * factor).astype(np.int64), units
        )
        return Bid(demand=tuple(int(d) for d in scaled),
                   price=_draw_price(r, int(scaled.sum())))

    bids = _fill_bids(rng, cfg.num_users, draw_one)
    name = cfg.name or f"vm-k{cfg.num_users}-s{cfg.seed}"
    return AuctionInstance(
        items=tuple(Item(units=int(u)) for u in units),
        bids=tuple(bids),
        name=name,
    )

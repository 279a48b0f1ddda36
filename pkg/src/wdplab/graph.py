"""Augmented bipartite bid-item graph encoding.

Bid nodes carry [price, total requested units]; item nodes carry
[available units, popularity = number of requesting bids]; an edge exists
exactly where a bid requests an item and carries the requested unit
count.  Residual graphs arise while decisions are being made: accepted
bids consume units, decided bids leave the graph, bids that no longer fit
the remaining units ("conflicting") are dropped, and exhausted items
disappear.  Original bid/item indices ride along so results can be
reported in the source instance's coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import AuctionInstance, Bid, Item, validate_instance

CONST_COLUMN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BidItemGraph:
    bid_features: np.ndarray   # (M, 2): price, total requested units
    item_features: np.ndarray  # (N, 2): units, popularity
    edge_bid: np.ndarray       # (E,) bid index per edge
    edge_item: np.ndarray      # (E,) item index per edge
    edge_features: np.ndarray  # (E, 1): requested units
    bid_index: tuple[int, ...]     # original bid index per bid node
    item_index: tuple[int, ...]    # original item index per item node
    instance: AuctionInstance      # residual instance this graph encodes
    normalized: bool = False
    dropped_conflicting: tuple[int, ...] = field(default=())

    @property
    def num_bids(self) -> int:
        return self.bid_features.shape[0]

    @property
    def num_items(self) -> int:
        return self.item_features.shape[0]

    @property
    def num_edges(self) -> int:
        return self.edge_bid.shape[0]


def _features_from_instance(instance: AuctionInstance):
    demand = instance.demand_matrix()
    prices = instance.price_array()
    units = instance.units_array()
    bid_feat = np.stack([prices, demand.sum(axis=1).astype(float)], axis=1)
    degree = (demand > 0).sum(axis=0).astype(float)
    item_feat = np.stack([units.astype(float), degree], axis=1)
    eb, ei = np.nonzero(demand > 0)
    e_feat = demand[eb, ei].astype(float).reshape(-1, 1)
    return bid_feat, item_feat, eb, ei, e_feat


def build_graph(instance: AuctionInstance) -> BidItemGraph:
    """Encode a valid instance as an augmented bid-item graph."""
    problems = validate_instance(instance)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    bid_feat, item_feat, eb, ei, e_feat = _features_from_instance(instance)
    return BidItemGraph(
        bid_features=bid_feat,
        item_features=item_feat,
        edge_bid=eb,
        edge_item=ei,
        edge_features=e_feat,
        bid_index=tuple(range(instance.num_bids)),
        item_index=tuple(range(instance.num_items)),
        instance=instance,
    )


def _standardize(col: np.ndarray) -> np.ndarray:
    std = col.std()
    if std < CONST_COLUMN_TOL:
        return np.zeros_like(col)
    return (col - col.mean()) / std


def normalize_features(graph: BidItemGraph) -> BidItemGraph:
    """Per-graph standardization of every feature column.

    Each column is shifted by its mean and scaled by its standard
    deviation over this graph; constant columns become all zeros.
    """
    def norm_matrix(mat: np.ndarray) -> np.ndarray:
        if mat.shape[0] == 0:
            return mat.copy()
        return np.stack([_standardize(mat[:, j])
                         for j in range(mat.shape[1])], axis=1)

    return BidItemGraph(
        bid_features=norm_matrix(graph.bid_features),
        item_features=norm_matrix(graph.item_features),
        edge_bid=graph.edge_bid,
        edge_item=graph.edge_item,
        edge_features=norm_matrix(graph.edge_features),
        bid_index=graph.bid_index,
        item_index=graph.item_index,
        instance=graph.instance,
        normalized=True,
        dropped_conflicting=graph.dropped_conflicting,
    )


def reduce_instance(
    instance: AuctionInstance,
    accepted: Iterable[int],
    rejected: Iterable[int],
) -> tuple[AuctionInstance, list[int], list[int], list[int]]:
    """Shrink an instance after deciding some bids.

    Units of accepted bids are deducted; accepted and rejected bids leave;
    surviving bids that no longer fit the remaining units are dropped as
    conflicting; items with no units left disappear.  Returns the reduced
    instance plus the kept bid positions, kept item positions, and the
    conflicting bid positions (all relative to the given instance).
    """
    accepted = sorted(set(accepted))
    rejected = sorted(set(rejected))
    if set(accepted) & set(rejected):
        raise ValueError("a bid cannot be both accepted and rejected")
    demand = instance.demand_matrix()
    units = instance.units_array().copy()
    for i in accepted:
        units -= demand[i]
    if np.any(units < 0):
        raise ValueError("accepted bids exceed available units")

    decided = set(accepted) | set(rejected)
    conflicting = [
        i for i in range(instance.num_bids)
        if i not in decided and bool(np.any(demand[i] > units))
    ]
    removed = decided | set(conflicting)
    kept_bids = [i for i in range(instance.num_bids) if i not in removed]
    kept_items = [n for n in range(instance.num_items) if units[n] > 0]

    new_items = tuple(Item(units=int(units[n])) for n in kept_items)
    new_bids = tuple(
        Bid(demand=tuple(int(demand[i, n]) for n in kept_items),
            price=instance.bids[i].price)
        for i in kept_bids
    )
    reduced = AuctionInstance(items=new_items, bids=new_bids,
                              name=instance.name)
    return reduced, kept_bids, kept_items, conflicting


def residual_graph(
    graph: BidItemGraph,
    accepted: Iterable[int],
    rejected: Iterable[int],
) -> BidItemGraph:
    """Graph after accepting/rejecting bid nodes (local indices).

    Conflicting survivors are dropped too; their original indices are
    reported on the result's `dropped_conflicting`.  Features are
    recomputed raw; normalize again before a model call.
    """
    reduced, kept_bids, kept_items, conflicting = reduce_instance(
        graph.instance, accepted, rejected
    )
    bid_feat, item_feat, eb, ei, e_feat = _features_from_instance(reduced)
    return BidItemGraph(
        bid_features=bid_feat,
        item_features=item_feat,
        edge_bid=eb,
        edge_item=ei,
        edge_features=e_feat,
        bid_index=tuple(graph.bid_index[i] for i in kept_bids),
        item_index=tuple(graph.item_index[n] for n in kept_items),
        instance=reduced,
        dropped_conflicting=tuple(graph.bid_index[i] for i in conflicting),
    )

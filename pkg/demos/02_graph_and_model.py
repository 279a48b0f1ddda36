"""Encode an auction as a bid-item graph and run the network on it.

Shows the feature design on the worked 4-bid example, how residual graphs
shrink after decisions, and what an untrained model's probability map
looks like.
"""

import numpy as np

from wdplab import init_model, forward, make_instance
from wdplab.graph import build_graph, normalize_features, residual_graph

inst = make_instance(
    [6, 3, 4],
    [((2, 0, 0), 1.0), ((2, 2, 1), 5.0), ((0, 1, 1), 2.0), ((0, 1, 4), 3.0)],
    name="worked-example",
)
graph = build_graph(inst)

print("bid features [price, total units]:")
for m, feat in enumerate(graph.bid_features):
    print(f"  bid {m}: {feat.tolist()}")
print("item features [units, popularity]:")
for n, feat in enumerate(graph.item_features):
    print(f"  item {n}: {feat.tolist()}")
print(f"{graph.num_edges} edges, e.g. bid 1 -> item 2 carries "
      f"{graph.edge_features[graph.num_edges - 5][0]:.0f} unit(s)")

print()
print("accepting bid 1 (demand (2,2,1), price 5):")
res = residual_graph(graph, accepted={1}, rejected=set())
print(f"  remaining units {[it.units for it in res.instance.items]}")
print(f"  surviving bids (original ids): {res.bid_index}")
print(f"  dropped as conflicting: {res.dropped_conflicting}")

print()
model = init_model(q=16, seed=0)
probs = forward(model, normalize_features(graph))
print("untrained probability map over bids:",
      np.round(probs, 4).tolist(), f"(sums to {probs.sum():.6f})")

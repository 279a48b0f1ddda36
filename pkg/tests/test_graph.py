import numpy as np
import pytest

from wdplab.graph import build_graph, normalize_features, residual_graph
from wdplab.instgen import SynthConfig, gen_synthetic
from wdplab.model import make_instance


class TestBuild:
    def test_fig1_features(self, fig1):
        g = build_graph(fig1)
        assert g.bid_features[1].tolist() == [5.0, 5.0]
        assert g.item_features[0].tolist() == [6.0, 2.0]
        assert g.item_features[1].tolist() == [3.0, 3.0]
        edge = {(int(b), int(i)): float(f)
                for b, i, f in zip(g.edge_bid, g.edge_item, g.edge_features[:, 0])}
        assert edge[(1, 2)] == 1.0

    def test_edges_iff_positive_demand(self, fig1):
        g = build_graph(fig1)
        demand = fig1.demand_matrix()
        assert g.num_edges == int((demand > 0).sum())
        for b, i in zip(g.edge_bid, g.edge_item):
            assert demand[b, i] > 0

    def test_single_bid_single_item(self):
        inst = make_instance([2, 3, 1], [((0, 2, 0), 1.0)])
        g = build_graph(inst)
        assert g.num_bids == 1 and g.num_items == 3 and g.num_edges == 1
        assert g.item_features[:, 1].tolist() == [0.0, 1.0, 0.0]

    def test_degree_matches_edges(self):
        inst = gen_synthetic(SynthConfig(20, 5, 4, seed=3))
        g = build_graph(inst)
        for n in range(g.num_items):
            assert g.item_features[n, 1] == np.sum(g.edge_item == n)

    def test_bid_total_matches_edge_sum(self):
        inst = gen_synthetic(SynthConfig(20, 5, 4, seed=4))
        g = build_graph(inst)
        for m in range(g.num_bids):
            assert g.bid_features[m, 1] == pytest.approx(
                g.edge_features[g.edge_bid == m].sum()
            )

    def test_lossless_round_trip(self, fig1):
        g = build_graph(fig1)
        demand = np.zeros((g.num_bids, g.num_items), dtype=int)
        for b, i, f in zip(g.edge_bid, g.edge_item, g.edge_features[:, 0]):
            demand[b, i] = int(f)
        assert np.array_equal(demand, fig1.demand_matrix())
        assert g.bid_features[:, 0].tolist() == [b.price for b in fig1.bids]

    def test_invalid_instance_rejected(self, fig1):
        from wdplab.model import AuctionInstance, Bid
        bad = AuctionInstance(items=fig1.items,
                              bids=(Bid((0, 0, 0), 1.0),))
        with pytest.raises(ValueError):
            build_graph(bad)

    def test_permutation_of_bids_permutes_nodes(self, fig1):
        from wdplab.model import AuctionInstance
        perm = [2, 0, 3, 1]
        shuffled = AuctionInstance(
            items=fig1.items,
            bids=tuple(fig1.bids[i] for i in perm),
            name="fig1-perm",
        )
        g0 = build_graph(fig1)
        g1 = build_graph(shuffled)
        for new_pos, old_pos in enumerate(perm):
            assert g1.bid_features[new_pos].tolist() == \
                g0.bid_features[old_pos].tolist()
        assert np.array_equal(g1.item_features, g0.item_features)


class TestNormalize:
    def test_columns_standardized(self, fig1):
        gn = normalize_features(build_graph(fig1))
        for mat in (gn.bid_features, gn.item_features, gn.edge_features):
            for j in range(mat.shape[1]):
                col = mat[:, j]
                assert abs(col.mean()) < 1e-9
                if col.std() > 0:
                    assert col.std() == pytest.approx(1.0, abs=1e-6)

    def test_constant_column_zeroed(self):
        inst = make_instance([5, 5], [((1, 0), 1.0), ((0, 1), 2.0)])
        gn = normalize_features(build_graph(inst))
        assert np.all(gn.item_features[:, 0] == 0.0)

    def test_fig1_price_column_values(self, fig1):
        prices = np.array([1.0, 5.0, 2.0, 3.0])
        expected = (prices - prices.mean()) / prices.std()
        gn = normalize_features(build_graph(fig1))
        assert np.allclose(gn.bid_features[:, 0], expected)

    def test_flag_set(self, fig1):
        g = build_graph(fig1)
        assert not g.normalized
        assert normalize_features(g).normalized


class TestResidual:
    def test_accept_b2(self, fig1):
        g = build_graph(fig1)
        r = residual_graph(g, accepted={1}, rejected=set())
        assert [it.units for it in r.instance.items] == [4, 1, 3]
        assert r.bid_index == (0, 2)
        assert r.dropped_conflicting == (3,)

    def test_then_accept_b3(self, fig1):
        g = build_graph(fig1)
        r = residual_graph(g, accepted={1}, rejected=set())
        r2 = residual_graph(r, accepted={r.bid_index.index(2)}, rejected=set())
        assert r2.item_index == (0, 2)  # item 1 exhausted and removed
        assert [it.units for it in r2.instance.items] == [4, 2]
        assert r2.bid_index == (0,)

    def test_identity(self, fig1):
        g = build_graph(fig1)
        r = residual_graph(g, accepted=set(), rejected=set())
        assert r.bid_index == g.bid_index
        assert np.array_equal(r.bid_features, g.bid_features)
        assert np.array_equal(r.item_features, g.item_features)

    def test_infeasible_accept_rejected(self, fig1):
        g = build_graph(fig1)
        with pytest.raises(ValueError, match="exceed"):
            residual_graph(g, accepted={1, 3}, rejected=set())

    def test_never_grows(self):
        inst = gen_synthetic(SynthConfig(15, 4, 4, seed=8))
        g = build_graph(inst)
        r = residual_graph(g, accepted={0}, rejected={1})
        assert r.num_bids <= g.num_bids - 2
        assert r.num_items <= g.num_items
        assert np.all(r.instance.units_array()
                      <= g.instance.units_array().max())

    def test_survivors_fit_remaining_units(self):
        for seed in range(8):
            inst = gen_synthetic(SynthConfig(15, 4, 4, seed=20 + seed))
            g = build_graph(inst)
            r = residual_graph(g, accepted={0}, rejected=set())
            demand = r.instance.demand_matrix()
            assert np.all(demand <= r.instance.units_array())

    def test_rejected_only_removes_nodes(self, fig1):
        g = build_graph(fig1)
        r = residual_graph(g, accepted=set(), rejected={0})
        assert r.bid_index == (1, 2, 3)
        assert [it.units for it in r.instance.items] == [6, 3, 4]
        assert r.dropped_conflicting == ()

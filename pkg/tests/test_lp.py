import numpy as np
import pytest

from wdplab.exact import brute_force
from wdplab.instgen import SynthConfig, gen_synthetic
from wdplab.lp import simplex, solve_lp_relaxation

FIG1_OBJECTIVE = 26 / 3
FIG1_PRIMAL = [1.0, 1.0, 1 / 3, 2 / 3]
FIG1_DUALS = [0.0, 5 / 3, 1 / 3]


class TestSimplex:
    def test_single_binding_constraint(self):
        sol = simplex([1.0, 1.0], [[1.0, 1.0]], [1.0], upper=[1.0, 1.0])
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(1.0)

    def test_infeasible(self):
        sol = simplex([1.0], [[1.0]], [-1.0])
        assert sol.status == "infeasible"

    def test_unbounded(self):
        sol = simplex([1.0], np.zeros((0, 1)), np.zeros(0))
        assert sol.status == "unbounded"

    def test_iteration_limit_status(self):
        rng = np.random.default_rng(0)
        A = rng.random((10, 12))
        sol = simplex(rng.random(12), A, rng.random(10) + 1,
                      max_iterations=1)
        assert sol.status == "iteration-limit"

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            simplex([1.0, 2.0], [[1.0]], [1.0])
        with pytest.raises(ValueError):
            simplex([1.0], [[1.0]], [1.0], upper=[1.0, 2.0])

    def test_negative_rhs_feasible(self):
        # x1 >= 1 expressed as -x1 <= -1 exercises phase 1
        sol = simplex([-1.0], [[-1.0]], [-1.0], upper=[5.0])
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(-1.0)


class TestRelaxation:
    def test_fig1_objective_and_primal(self, fig1):
        sol = solve_lp_relaxation(fig1)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(FIG1_OBJECTIVE, abs=1e-6)
        assert np.allclose(sol.primal, FIG1_PRIMAL, atol=1e-6)

    def test_fig1_duals(self, fig1):
        sol = solve_lp_relaxation(fig1)
        assert np.allclose(sol.duals, FIG1_DUALS, atol=1e-6)

    def test_deterministic_resolve(self, fig1):
        a = solve_lp_relaxation(fig1)
        b = solve_lp_relaxation(fig1)
        assert abs(a.objective - b.objective) <= 1e-9
        assert np.array_equal(a.primal, b.primal)

    def _random_instances(self, count):
        made = 0
        seed = 0
        while made < count:
            seed += 1
            cfg = SynthConfig(
                num_bids=5 + seed % 12,
                num_items=2 + seed % 5,
                max_units=2 + seed % 4,
                seed=seed,
            )
            try:
                yield gen_synthetic(cfg)
            except Exception:
                continue
            made += 1

    def test_upper_bounds_integer_optimum(self):
        for inst in self._random_instances(40):
            sol = solve_lp_relaxation(inst)
            opt = brute_force(inst).revenue
            assert sol.objective >= opt - 1e-6 * max(1.0, abs(opt))

    def test_duals_nonnegative_and_complementary(self):
        for inst in self._random_instances(40):
            sol = solve_lp_relaxation(inst)
            assert np.all(sol.duals >= -1e-9)
            usage = inst.demand_matrix().T @ sol.primal
            units = inst.units_array()
            # a priced constraint must be tight
            for n in range(inst.num_items):
                if sol.duals[n] > 1e-7:
                    assert abs(usage[n] - units[n]) <= 1e-7

    def test_weak_duality_vs_feasible_allocations(self):
        rng = np.random.default_rng(1)
        for inst in self._random_instances(15):
            sol = solve_lp_relaxation(inst)
            demand = inst.demand_matrix()
            units = inst.units_array()
            prices = inst.price_array()
            for _ in range(20):
                dec = rng.integers(0, 2, inst.num_bids)
                if np.all(demand.T @ dec <= units):
                    assert prices @ dec <= sol.objective + 1e-6

    def test_strong_duality_with_bound_multipliers(self, fig1):
        sol = solve_lp_relaxation(fig1)
        prices = fig1.price_array()
        demand = fig1.demand_matrix()
        mu = np.maximum(0.0, prices - demand @ sol.duals)
        dual_value = sol.duals @ fig1.units_array() + mu.sum()
        assert dual_value == pytest.approx(sol.objective, rel=1e-6)

import math

import mpmath as mp
import numpy as np
import pytest

from polarium.dynamics import ConvergenceSpec, run_until_convergence
from polarium.graph import BiasProfile, OpinionState, is_connected
from polarium.metrics import ndi
from polarium.two_island import (
    REGIME_CONSENSUS,
    REGIME_DISAGREEMENT,
    REGIME_POLARIZATION,
    TwoIslandParams,
    build_two_island,
    classify_regime,
    critical_homophily,
    homophily_degree,
    island_update_map,
    solve_fixed_point,
)

mp.mp.dps = 50


def reference_critical_homophily(y, b):
    """High-precision evaluation of the original piecewise form; independent
    of the library's reformulation."""
    y, b = mp.mpf(y), mp.mpf(b)
    if b == 1:
        return mp.mpf(1)
    if b == 2:
        return mp.mpf(0)
    if y == mp.mpf("0.5"):
        return 2 / b - 1
    num = y ** (2 - b) - (1 - y) ** (2 - b)
    den = y * (1 - y) ** (1 - b) - y ** (1 - b) * (1 - y)
    return num / den


class TestParams:
    def test_homophily_violation_rejected(self):
        with pytest.raises(ValueError, match="p_s > p_d"):
            TwoIslandParams(10, 10, 0.2, 0.4)

    def test_equal_densities_rejected(self):
        with pytest.raises(ValueError, match="p_s > p_d"):
            TwoIslandParams(2, 2, 0.5, 0.5)

    def test_integrality_enforced(self):
        with pytest.raises(ValueError, match="not an integer"):
            TwoIslandParams(10, 10, 0.45, 0.2)

    def test_homophily_ratio(self):
        assert homophily_degree(TwoIslandParams(10, 10, 0.4, 0.2)) == 2.0
        assert homophily_degree(TwoIslandParams(10, 10, 0.6, 0.1)) == pytest.approx(6.0)

    def test_homophily_monotone_toward_one(self):
        values = [homophily_degree(TwoIslandParams(20, 20, ps, 0.25))
                  for ps in (0.5, 0.45, 0.35, 0.3)]
        assert all(a > b > 1.0 for a, b in zip(values, values[1:]))


class TestBuilder:
    def test_exact_degrees_example(self):
        net = build_two_island(TwoIslandParams(10, 10, 0.4, 0.2))
        g = net.graph
        for i in range(20):
            idx, w = g.neighbors(i)
            same = int(np.sum(net.islands[idx] == net.islands[i]))
            assert same == 4 and idx.size - same == 2 and idx.size == 6
            assert np.all(w == 1.0)
        assert np.all(g.self_weights == 0.0)
        assert is_connected(g)

    def test_deterministic(self):
        a = build_two_island(TwoIslandParams(20, 20, 0.3, 0.1))
        b = build_two_island(TwoIslandParams(20, 20, 0.3, 0.1))
        assert np.array_equal(a.graph.edge_u, b.graph.edge_u)
        assert np.array_equal(a.graph.edge_v, b.graph.edge_v)

    def test_unequal_islands(self):
        net = build_two_island(TwoIslandParams(10, 20, 0.4, 0.2))
        g = net.graph
        idx, _ = g.neighbors(0)  # island 1: within 10*0.4=4, cross 20*0.2=4
        assert int(np.sum(net.islands[idx] == 0)) == 4
        assert int(np.sum(net.islands[idx] == 1)) == 4
        idx, _ = g.neighbors(15)  # island 2: within 20*0.4=8, cross 10*0.2=2
        assert int(np.sum(net.islands[idx] == 1)) == 8
        assert int(np.sum(net.islands[idx] == 0)) == 2

    def test_shuffle_preserves_degrees_and_changes_wiring(self):
        params = TwoIslandParams(20, 20, 0.4, 0.2)
        base = build_two_island(params)
        shuffled = build_two_island(params, rng=np.random.default_rng(11),
                                    shuffle_swaps=200)
        assert not (
            np.array_equal(base.graph.edge_u, shuffled.graph.edge_u)
            and np.array_equal(base.graph.edge_v, shuffled.graph.edge_v)
        )
        # _verify_degrees inside the builder already asserts exact degrees

    def test_infeasible_odd_degrees(self):
        # within-degree 3 on an island of 5 violates the handshake count
        with pytest.raises(ValueError, match="not realizable|not an integer"):
            build_two_island(TwoIslandParams(5, 5, 0.6, 0.2))


class TestIslandMap:
    def test_symmetric_point(self):
        for b in (0.2, 1.0, 2.5):
            for h in (1.5, 2.0, 6.0):
                assert island_update_map(0.5, b, h) == 0.5

    def test_extreme_absorbing(self):
        assert island_update_map(1.0, 2.0, 2.0) == 1.0
        assert island_update_map(0.0, 2.0, 2.0) == 0.0

    def test_extreme_not_absorbing_at_zero_bias(self):
        out = island_update_map(1.0, 0.0, 2.0)
        assert out == pytest.approx(2.0 / 3.0)

    def test_stays_in_upper_half(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            x = 0.5 + 0.5 * rng.random()
            b = float(rng.uniform(0.05, 3.0))
            h = float(rng.uniform(1.05, 8.0))
            out = island_update_map(x, b, h)
            assert 0.5 <= out <= 1.0


class TestFullGraphEquivalence:
    def test_scalar_map_reproduces_simulation(self):
        # walk the scalar recurrence; at every point one synchronous n-node
        # step from the mirrored state must reproduce the map value, keep
        # island members exactly identical, and keep the islands mirrored
        from polarium.dynamics import biased_step

        rng = np.random.default_rng(13)
        params = TwoIslandParams(20, 20, 0.4, 0.2)
        net = build_two_island(params)
        h = params.homophily
        for _ in range(10):
            b = float(rng.uniform(0.1, 3.0))
            x = float(rng.uniform(0.55, 0.95))
            biases = BiasProfile.uniform(40, b)
            for _ in range(80):
                state = OpinionState(np.where(net.islands == 0, x, 1.0 - x))
                nxt = biased_step(net.graph, state, biases)
                v1 = nxt.opinions[net.islands == 0]
                v2 = nxt.opinions[net.islands == 1]
                assert np.ptp(v1) == 0.0 and np.ptp(v2) == 0.0
                assert abs(float(v1[0]) - (1.0 - float(v2[0]))) < 1e-12
                predicted = island_update_map(x, b, h)
                assert abs(predicted - float(v1[0])) < 1e-12
                x = predicted

    def test_islands_stay_internally_identical_along_full_runs(self):
        # along real convergence runs the within-island spread is exactly 0
        # at every recorded step (identical inputs give identical floats)
        params = TwoIslandParams(20, 20, 0.4, 0.1)
        net = build_two_island(params)
        for b in (0.1, 0.5, 1.0, 1.5):
            initial = OpinionState(np.where(net.islands == 0, 0.7, 0.3))
            traj = run_until_convergence(
                net.graph, initial, BiasProfile.uniform(40, b),
                ConvergenceSpec(tolerance=1e-10, max_iters=10**4))
            for vec in traj.states:
                assert np.ptp(vec[net.islands == 0]) == 0.0
                assert np.ptp(vec[net.islands == 1]) == 0.0


class TestCriticalHomophily:
    def test_bias_one_is_identically_one(self):
        for y in (0.0, 0.3, 0.5, 0.9, 1.0):
            assert critical_homophily(y, 1.0) == 1.0

    def test_bias_two_is_identically_zero(self):
        for y in (0.1, 0.5, 0.77):
            assert critical_homophily(y, 2.0) == 0.0

    def test_midpoint_closed_form(self):
        assert critical_homophily(0.5, 0.5) == 3.0
        assert critical_homophily(0.5, 0.8) == pytest.approx(2.0 / 0.8 - 1.0, rel=1e-15)

    def test_frozen_value_two_thirds(self):
        # mpmath (50 digits) on the original piecewise form: 3.1213203435596425732...
        assert critical_homophily(2.0 / 3.0, 0.5) == pytest.approx(
            3.1213203435596425732, rel=1e-13)

    def test_matches_high_precision_reference(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            y = float(rng.uniform(0.001, 0.999))
            b = float(rng.choice([0.1, 0.3, 0.5, 0.9, 1.3, 1.7, 2.5, 3.0,
                                  rng.uniform(0.05, 3.5)]))
            ref = float(reference_critical_homophily(y, b))
            got = critical_homophily(y, b)
            assert got == pytest.approx(ref, rel=5e-13, abs=5e-13), (y, b)

    def test_continuous_across_midpoint(self):
        for b in (0.3, 0.5, 0.8, 1.5, 2.7):
            center = 2.0 / b - 1.0
            for eps in (1e-6, 1e-9):
                assert abs(critical_homophily(0.5 + eps, b) - center) < 1e-8
                assert abs(critical_homophily(0.5 - eps, b) - center) < 1e-8

    def test_strictly_increasing_upper_half_small_bias(self):
        for b in (0.3, 0.5, 0.8):
            ys = np.linspace(0.5, 0.999, 120)
            vals = [critical_homophily(float(y), b) for y in ys]
            assert all(a < c for a, c in zip(vals, vals[1:]))

    def test_at_most_one_for_large_bias(self):
        for b in (1.0, 1.5, 2.0, 3.0):
            for y in np.linspace(0.0, 0.9999, 200):
                assert critical_homophily(float(y), b) <= 1.0 + 1e-12

    def test_infinity_sentinel_near_one_small_bias(self):
        assert critical_homophily(1.0, 0.5) == math.inf
        assert critical_homophily(1.0 - 1e-13, 0.5) > 1e5


class TestSolveFixedPoint:
    def test_boundary_gives_midpoint(self):
        # b = 2/(h+1) exactly: the midpoint value 2/b - 1 equals h
        h = 3.0
        assert solve_fixed_point(0.5, h) == 0.5

    def test_frozen_values(self):
        # mpmath root of the piecewise form (50 digits)
        assert solve_fixed_point(0.5, 4.0) == pytest.approx(
            0.8726779962499649494, abs=1e-11)
        assert solve_fixed_point(0.8, 2.0) == pytest.approx(
            0.959490721398291394, abs=1e-11)

    def test_inverse_of_forward_map(self):
        h = critical_homophily(2.0 / 3.0, 0.5)
        assert solve_fixed_point(0.5, h) == pytest.approx(2.0 / 3.0, abs=1e-11)

    def test_returned_point_is_stationary(self):
        rng = np.random.default_rng(15)
        checked = 0
        while checked < 100:
            h = float(rng.uniform(1.2, 9.0))
            b = float(rng.uniform(2.0 / (h + 1.0), 1.0))
            if not b < 1.0:
                continue
            x_hat = solve_fixed_point(b, h)
            assert abs(island_update_map(x_hat, b, h) - x_hat) < 1e-9, (b, h)
            checked += 1

    def test_out_of_regime_rejected(self):
        with pytest.raises(ValueError, match="disagreement floor"):
            solve_fixed_point(0.1, 2.0)
        with pytest.raises(ValueError, match="0 < b < 1"):
            solve_fixed_point(1.2, 2.0)


class TestClassifyRegime:
    def test_polarization_case(self):
        v = classify_regime(1.0, 2.0)
        assert v.regime == REGIME_POLARIZATION
        assert v.predicted_limit == (1.0, 0.0)
        assert v.x_hat is None

    def test_disagreement_case(self):
        v = classify_regime(0.5, 4.0)
        assert v.regime == REGIME_DISAGREEMENT
        assert v.x_hat is not None and 0.5 < v.x_hat < 1.0
        assert v.predicted_limit[0] == v.x_hat
        assert v.predicted_limit[0] + v.predicted_limit[1] == pytest.approx(1.0)

    def test_consensus_case(self):
        v = classify_regime(0.1, 2.0)
        assert v.regime == REGIME_CONSENSUS
        assert v.predicted_limit == (0.5, 0.5)

    def test_limits_complementary_across_sweep(self):
        for b in (0.1, 0.4, 0.65, 0.9, 1.0, 2.0):
            v = classify_regime(b, 3.0)
            assert v.predicted_limit[0] + v.predicted_limit[1] == pytest.approx(1.0)
            assert (v.x_hat is not None) == (v.regime == REGIME_DISAGREEMENT)


class TestSimulationAgreement:
    # the sup-norm tolerance matters in the disagreement regime: the mirrored
    # fixed point is a saddle of the unreduced pair dynamics (transversally
    # expansive), so runs must stop before float noise rides the unstable
    # direction; the default 1e-10 stops two decades early
    @pytest.mark.parametrize("b,h,ps,pd", [
        (1.0, 2.0, 0.4, 0.2),
        (0.5, 4.0, 0.4, 0.1),
        (0.1, 2.0, 0.4, 0.2),
    ])
    def test_small_island_limits(self, b, h, ps, pd):
        params = TwoIslandParams(20, 20, ps, pd)
        net = build_two_island(params)
        verdict = classify_regime(b, h)
        for x0 in (0.55, 0.9):
            initial = OpinionState(np.where(net.islands == 0, x0, 1.0 - x0))
            traj = run_until_convergence(
                net.graph, initial, BiasProfile.uniform(40, b),
                ConvergenceSpec(tolerance=1e-10, max_iters=10**5))
            v1 = float(np.mean(traj.final_state.opinions[net.islands == 0]))
            v2 = float(np.mean(traj.final_state.opinions[net.islands == 1]))
            assert abs(v1 - verdict.predicted_limit[0]) < 1e-6
            assert abs(v2 - verdict.predicted_limit[1]) < 1e-6

    def test_monotone_in_disagreement_regime(self):
        params = TwoIslandParams(20, 20, 0.4, 0.1)
        net = build_two_island(params)
        x_hat = solve_fixed_point(0.5, 4.0)
        for x0, increasing in ((0.6, True), (0.95, False)):
            initial = OpinionState(np.where(net.islands == 0, x0, 1.0 - x0))
            traj = run_until_convergence(
                net.graph, initial, BiasProfile.uniform(40, 0.5),
                ConvergenceSpec(tolerance=1e-10, max_iters=2000))
            series = [float(vec[0]) for vec in traj.states]
            diffs = np.diff(series)
            if increasing:
                assert np.all(diffs > 0)
                assert series[0] < x_hat < series[-1] + 1e-6
            else:
                assert np.all(diffs < 0)
                assert series[0] > x_hat > series[-1] - 1e-6

    def test_island_one_never_below_half(self):
        params = TwoIslandParams(20, 20, 0.4, 0.2)
        net = build_two_island(params)
        for b in (0.1, 0.8, 1.5):
            initial = OpinionState(np.where(net.islands == 0, 0.55, 0.45))
            traj = run_until_convergence(
                net.graph, initial, BiasProfile.uniform(40, b),
                ConvergenceSpec(tolerance=1e-12, max_iters=10**4))
            for vec in traj.states:
                assert np.all(vec[net.islands == 0] >= 0.5 - 1e-15)

    def test_ndi_verdicts(self):
        params = TwoIslandParams(20, 20, 0.4, 0.2)
        net = build_two_island(params)
        initial = OpinionState(np.where(net.islands == 0, 0.7, 0.3))
        eta0 = ndi(net.graph, initial)

        # b >= 1: the split widens the cross-island gaps
        traj = run_until_convergence(net.graph, initial, BiasProfile.uniform(40, 1.0),
                                     ConvergenceSpec(1e-12, 10**4))
        assert ndi(net.graph, traj.final_state) > eta0

        # below the consensus floor everything flattens
        traj = run_until_convergence(net.graph, initial, BiasProfile.uniform(40, 0.1),
                                     ConvergenceSpec(1e-12, 10**4))
        assert ndi(net.graph, traj.final_state) < 1e-12 < eta0

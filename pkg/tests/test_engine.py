import fractions
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ucal import (Alternating, FixedSequence, FollowTheLeader, IidUniform, MixtureLoss,
                  PerturbedLeaderGeometric, RngStream, SphericalLoss, SquaredLoss,
                  StaticForecaster, TsallisLoss, VShapedLoss, benchmark_cost,
                  check_high_prob_bound, estimate_calibration, exact_binomial_mad,
                  mean_of_counts, random_simplex_points, regret, run_game, run_trials,
                  sup_regret_mixture, write_csv)
from ucal.engine import format_float, mixture_weight_grid


def _gen(seed, stream=0):
    return RngStream(seed, stream).generator()


class TestRunGame:
    def test_ftl_vs_alternating_unrolled(self):
        tr = run_game(FollowTheLeader(2, 4), Alternating(2), 4, _gen(0))
        expected = np.array([[0.5, 0.5], [1.0, 0.0], [0.5, 0.5], [2 / 3, 1 / 3]])
        np.testing.assert_allclose(tr.forecasts, expected)
        np.testing.assert_array_equal(tr.outcomes, [0, 1, 0, 1])
        np.testing.assert_array_equal(tr.final_counts, [2, 2])

    def test_static_forecasts_constant(self):
        tr = run_game(StaticForecaster([0.3, 0.7], 5), FixedSequence(2, [0, 1, 0, 0, 1]),
                      5, _gen(0))
        np.testing.assert_array_equal(tr.forecasts, np.tile([0.3, 0.7], (5, 1)))

    def test_same_seed_identical_transcripts(self):
        for _ in range(2):
            runs = [run_game(PerturbedLeaderGeometric(3, 50), IidUniform(3), 50, _gen(42, 7))
                    for _ in range(2)]
        np.testing.assert_array_equal(runs[0].forecasts, runs[1].forecasts)
        np.testing.assert_array_equal(runs[0].outcomes, runs[1].outcomes)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            run_game(FollowTheLeader(2, 5), IidUniform(3), 5, _gen(0))

    def test_adaptive_adversary_sees_only_past(self):
        class Recorder(Alternating):
            def __init__(self, k):
                super().__init__(k)
                self.lengths = []

            def next_outcome(self, t, past_forecasts, rng=None):
                self.lengths.append(len(past_forecasts))
                return super().next_outcome(t, past_forecasts, rng)

        adv = Recorder(2)
        run_game(FollowTheLeader(2, 6), adv, 6, _gen(0))
        assert adv.lengths == [0, 1, 2, 3, 4, 5]


class TestRegret:
    @pytest.mark.parametrize("horizon", [8, 100])
    def test_ftl_alternating_vshaped_exact_quarter(self, horizon):
        tr = run_game(FollowTheLeader(2, horizon), Alternating(2), horizon, _gen(0))
        rec = regret(tr, VShapedLoss())
        assert rec.regret == pytest.approx(horizon / 4, abs=1e-9)
        assert rec.benchmark_cost == pytest.approx(0.0, abs=1e-12)

    def test_static_mean_zero_regret(self):
        seq = [0, 1, 1, 0, 1, 0]  # mean (1/2, 1/2)
        tr = run_game(StaticForecaster([0.5, 0.5], 6), FixedSequence(2, seq), 6, _gen(0))
        for loss in (SquaredLoss(1.0), SphericalLoss(), TsallisLoss(1.5)):
            assert regret(tr, loss).regret == pytest.approx(0.0, abs=1e-9)

    def test_arithmetic_identity(self):
        tr = run_game(PerturbedLeaderGeometric(2, 64), IidUniform(2), 64, _gen(1))
        for loss in (VShapedLoss(), SquaredLoss(0.5)):
            rec = regret(tr, loss)
            assert rec.regret == rec.algorithm_cost - rec.benchmark_cost

    def test_vshaped_benchmark_cost_identity(self):
        # realized counts n give benchmark cost -1/2 sum_i |n_i - T/K|
        horizon = 500
        tr = run_game(FollowTheLeader(3, horizon), IidUniform(3), horizon, _gen(2))
        expected = -0.5 * np.sum(np.abs(tr.final_counts - horizon / 3))
        assert benchmark_cost(tr, VShapedLoss()) == pytest.approx(expected, abs=1e-9)

    def test_benchmark_beats_any_fixed_point(self):
        horizon = 200
        tr = run_game(FollowTheLeader(3, horizon), IidUniform(3), horizon, _gen(3))
        rng = _gen(4)
        candidates = random_simplex_points(3, 1000, rng)
        for loss in (SquaredLoss(0.5), SphericalLoss(), VShapedLoss(), TsallisLoss(1.5)):
            best = benchmark_cost(tr, loss)
            costs = [benchmark_cost(tr, loss, point=p) for p in candidates]
            assert best <= min(costs) + 1e-9, loss.name


class TestEstimateCalibration:
    def test_static_mean_on_matching_sequence(self):
        seq = [0, 1] * 10
        est = estimate_calibration(lambda: StaticForecaster([0.5, 0.5], 20),
                                   FixedSequence(2, seq),
                                   [VShapedLoss(), SquaredLoss(0.5)],
                                   horizon=20, trials=3, base_seed=0)
        assert est.pucal == pytest.approx(0.0, abs=1e-9)
        assert est.ucal == pytest.approx(0.0, abs=1e-9)

    def test_singleton_family_pucal_equals_ucal(self):
        est = estimate_calibration(lambda: PerturbedLeaderGeometric(2, 128),
                                   IidUniform(2), [VShapedLoss()],
                                   horizon=128, trials=20, base_seed=5)
        assert est.pucal == pytest.approx(est.ucal, abs=1e-12)

    def test_pucal_at_most_ucal(self):
        losses = [VShapedLoss(), SquaredLoss(0.5), SphericalLoss()]
        est = estimate_calibration(lambda: PerturbedLeaderGeometric(2, 256),
                                   IidUniform(2), losses,
                                   horizon=256, trials=50, base_seed=6)
        assert est.pucal <= est.ucal + 3 * est.std_error + 1e-12
        assert set(est.per_loss_mean) == {loss.name for loss in losses}

    def test_sanity_band_for_ftpl(self):
        # mean vshaped regret sits between the binomial-deviation floor and
        # the 4*sqrt(KT) ceiling at modest scale
        horizon, trials = 1024, 100
        est = estimate_calibration(lambda: PerturbedLeaderGeometric(2, horizon),
                                   IidUniform(2), [VShapedLoss()],
                                   horizon=horizon, trials=trials, base_seed=7)
        floor = math.sqrt(horizon / 8) - 3 * est.std_error
        ceiling = 4 * math.sqrt(2 * horizon) + 3 * est.std_error
        assert floor <= est.pucal <= ceiling

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            estimate_calibration(lambda: FollowTheLeader(2, 4), Alternating(2),
                                 [VShapedLoss()], horizon=4, trials=0, base_seed=0)
        with pytest.raises(ValueError):
            estimate_calibration(lambda: FollowTheLeader(2, 4), Alternating(2),
                                 [], horizon=4, trials=1, base_seed=0)


class TestMixtureSup:
    def _transcript(self, horizon=100):
        return run_game(FollowTheLeader(2, horizon), Alternating(2), horizon, _gen(0))

    def test_grid_contains_endpoints(self):
        grid = mixture_weight_grid(1 / 7)
        assert grid[0] == 0.0 and grid[-1] == 1.0
        assert np.all(np.diff(grid) > 0)

    def test_grid_sup_equals_endpoint_max(self):
        tr = self._transcript()
        grid_sup, exact = sup_regret_mixture(tr, SquaredLoss(0.5), VShapedLoss(), eps=0.01)
        r1 = regret(tr, SquaredLoss(0.5)).regret
        r2 = regret(tr, VShapedLoss()).regret
        assert exact == max(r1, r2)
        assert grid_sup == exact  # affine in the weight, endpoints on the grid

    def test_ftl_alternating_dominated_by_step_loss(self):
        tr = self._transcript(horizon=100)
        grid_sup, _ = sup_regret_mixture(tr, SquaredLoss(0.5), VShapedLoss(), eps=0.01)
        assert grid_sup >= 100 / 4

    def test_identical_losses_weight_independent(self):
        tr = self._transcript()
        loss = SquaredLoss(0.5)
        grid_sup, exact = sup_regret_mixture(tr, loss, loss, eps=0.25)
        assert grid_sup == pytest.approx(exact, abs=1e-12)

    def test_mixture_loss_object_agrees_with_affine_regret(self):
        tr = self._transcript()
        l1, l2 = SquaredLoss(0.5), VShapedLoss()
        for w in (0.0, 0.3, 0.8, 1.0):
            direct = regret(tr, MixtureLoss(l1, l2, w)).regret
            affine = w * regret(tr, l1).regret + (1 - w) * regret(tr, l2).regret
            assert direct == pytest.approx(affine, abs=1e-9)

    def test_eps_validated(self):
        tr = self._transcript()
        with pytest.raises(ValueError):
            sup_regret_mixture(tr, SquaredLoss(), VShapedLoss(), eps=0.0)


class TestHighProbBound:
    def test_all_zero_regrets(self):
        assert check_high_prob_bound(np.zeros(100), k=2, horizon=1024, delta=0.1) == 0.0

    def test_delta_one_threshold(self):
        # log(1/1) = 0, threshold collapses to 4*sqrt(KT)
        threshold = 4 * math.sqrt(2 * 1024)
        regrets = [threshold - 1, threshold + 1]
        assert check_high_prob_bound(regrets, k=2, horizon=1024, delta=1.0) == 0.5

    def test_counts_exceedances(self):
        threshold = 4 * math.sqrt(2 * 100) + math.sqrt(2 * 100 * math.log(10))
        regrets = [0.0, threshold + 0.1, threshold - 0.1, 2 * threshold]
        assert check_high_prob_bound(regrets, k=2, horizon=100, delta=0.1) == 0.5

    def test_delta_domain(self):
        with pytest.raises(ValueError):
            check_high_prob_bound([0.0], k=2, horizon=10, delta=0.0)


class TestExactBinomialMad:
    def test_small_cases(self):
        assert exact_binomial_mad(4, 0.5) == pytest.approx(0.75, abs=1e-12)
        assert exact_binomial_mad(1, 0.5) == pytest.approx(0.5, abs=1e-12)

    def test_enumeration_oracle(self):
        # independent exact-rational enumeration for small T
        for n, p_num, p_den in [(6, 1, 2), (5, 1, 3), (9, 1, 4)]:
            p = fractions.Fraction(p_num, p_den)
            mad = sum(math.comb(n, k) * p ** k * (1 - p) ** (n - k)
                      * abs(fractions.Fraction(k) - n * p) for k in range(n + 1))
            assert exact_binomial_mad(n, float(p)) == pytest.approx(float(mad), abs=1e-12)

    def test_large_horizon_above_sqrt_bound(self):
        assert exact_binomial_mad(10_000, 0.5) >= math.sqrt(10_000 / 8)

    def test_domain(self):
        with pytest.raises(ValueError):
            exact_binomial_mad(0, 0.5)
        with pytest.raises(ValueError):
            exact_binomial_mad(10, 0.0)


class TestRunTrials:
    def test_deterministic_per_trial_streams(self):
        a = run_trials(lambda: PerturbedLeaderGeometric(2, 32), IidUniform(2),
                       [VShapedLoss()], horizon=32, trials=5, base_seed=9)
        b = run_trials(lambda: PerturbedLeaderGeometric(2, 32), IidUniform(2),
                       [VShapedLoss()], horizon=32, trials=5, base_seed=9)
        np.testing.assert_array_equal(a, b)
        assert len(np.unique(a)) > 1  # trials genuinely differ


class TestCsv:
    ROWS = [
        {"experiment": "run", "forecaster": "ftl", "adversary": "alternating",
         "loss": "vshaped", "K": 2, "T": 8, "trial": 1, "seed": 0, "regret": 2.0},
        {"experiment": "run", "forecaster": "ftl", "adversary": "alternating",
         "loss": "squared:0.5", "K": 2, "T": 8, "trial": 0, "seed": 0,
         "regret": 0.123456789012345},
    ]

    def test_header_and_sorting(self):
        text = write_csv(self.ROWS)
        lines = text.strip().split("\n")
        assert lines[0] == "experiment,forecaster,adversary,loss,K,T,trial,seed,regret"
        assert lines[1].startswith("run,ftl,alternating,squared:0.5,2,8,0,")
        assert lines[2].startswith("run,ftl,alternating,vshaped,2,8,1,")

    def test_twelve_significant_digits(self):
        assert format_float(0.123456789012345) == "0.123456789012"
        assert format_float(2500.0) == "2500"
        text = write_csv(self.ROWS)
        assert "0.123456789012" in text

    def test_byte_determinism(self):
        assert write_csv(self.ROWS) == write_csv(list(reversed(self.ROWS)))


@given(st.lists(st.integers(min_value=0, max_value=1), min_size=2, max_size=60))
def test_regret_identity_property(bits):
    horizon = len(bits)
    tr = run_game(FollowTheLeader(2, horizon), FixedSequence(2, bits), horizon, _gen(0))
    rec = regret(tr, SquaredLoss(0.5))
    assert rec.regret == rec.algorithm_cost - rec.benchmark_cost
    # benchmark optimality against the uniform point
    assert rec.benchmark_cost <= benchmark_cost(tr, SquaredLoss(0.5), point=[0.5, 0.5]) + 1e-12

"""Unit tests for the run-level metrics."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from noisycache import (
    BoundParams,
    InvalidInputError,
    RequestBatch,
    RoundRobinConfig,
    Trace,
    average_miss_ratio,
    batch_trace,
    decile_band,
    empirical_regret,
    generate_round_robin,
    opt_cost,
    regret_bound,
    replay_static,
)

from helpers import brute_force_static_minimum


class TestAverageMissRatio:
    def test_running_mean(self):
        out = average_miss_ratio([200, 0], 200)
        assert out.tolist() == [1.0, 0.5]

    def test_extremes(self):
        assert average_miss_ratio([0, 0, 0], 5).tolist() == [0.0, 0.0, 0.0]
        assert average_miss_ratio([5, 5], 5).tolist() == [1.0, 1.0]

    def test_rejects_out_of_range_costs(self):
        with pytest.raises(InvalidInputError):
            average_miss_ratio([-1, 0], 5)
        with pytest.raises(InvalidInputError):
            average_miss_ratio([6], 5)
        with pytest.raises(InvalidInputError):
            average_miss_ratio([], 5)


class TestOptCost:
    def test_single_batch(self):
        assert opt_cost([RequestBatch.from_counts([5, 3, 2])], 2) == 2

    def test_round_robin_closed_form(self):
        # every file is requested equally often, so any C files miss
        # (N - C)/N of the requests
        trace = generate_round_robin(RoundRobinConfig(1000, 100_000))
        batches = batch_trace(trace, 200)
        assert opt_cost(batches, 100) == 90_000

    def test_matches_brute_force_on_small_catalog(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            events = rng.integers(1, 7, size=60)
            batches = batch_trace(Trace(events=events, n_files=6), 5)
            assert opt_cost(batches, 2) == brute_force_static_minimum(events, 6, 2)

    def test_never_beaten_by_any_static_decision(self):
        rng = np.random.default_rng(14)
        batches = [
            RequestBatch.from_counts(rng.multinomial(20, np.full(8, 1 / 8)))
            for _ in range(12)
        ]
        best = opt_cost(batches, 3)
        for _ in range(25):
            missing = np.ones(8, dtype=np.int8)
            missing[rng.choice(8, size=3, replace=False)] = 0
            assert best <= int(replay_static(batches, missing).sum())


class TestEmpiricalRegret:
    def test_fields_and_sign(self):
        report = empirical_regret(120.0, 100, bound=50.0)
        assert report.cumulative_cost == 120.0
        assert report.opt_cost == 100
        assert report.regret == 20.0
        assert report.bound == 50.0

    def test_single_runs_may_beat_the_optimum(self):
        assert empirical_regret(90.0, 100).regret == -10.0

    def test_rejects_negative_costs(self):
        with pytest.raises(InvalidInputError):
            empirical_regret(-1.0, 100)


class TestRegretBound:
    def test_desk_scale_values(self):
        exact = BoundParams(cost_bound=200.0, l1_bound=200.0, diameter=200)
        assert regret_bound(exact, 500) == pytest.approx(126491.10640673517, rel=1e-12)
        half = BoundParams(cost_bound=400.0, l1_bound=400.0, diameter=200)
        assert regret_bound(half, 500) == pytest.approx(252982.21281347034, rel=1e-12)

    def test_formula(self):
        bounds = BoundParams(cost_bound=3.0, l1_bound=5.0, diameter=4)
        assert regret_bound(bounds, 7) == pytest.approx(2 * math.sqrt(3 * 5 * 4 * 7))

    def test_rejects_bad_horizon(self):
        with pytest.raises(InvalidInputError):
            regret_bound(BoundParams(1.0, 1.0, 2), 0)


class TestDecileBand:
    def test_nearest_rank_example(self):
        finals = np.arange(1.0, 11.0).reshape(10, 1)  # runs scoring 1..10
        mean, d1, d9 = decile_band(finals)
        assert mean[0] == 5.5
        assert d1[0] == 1.0
        assert d9[0] == 9.0

    def test_single_run_bands_collapse(self):
        mean, d1, d9 = decile_band([[0.4, 0.2, 0.1]])
        assert mean.tolist() == d1.tolist() == d9.tolist() == [0.4, 0.2, 0.1]

    def test_constant_columns(self):
        mean, d1, d9 = decile_band(np.full((7, 3), 0.25))
        assert np.all(mean == 0.25) and np.all(d1 == 0.25) and np.all(d9 == 0.25)

    @given(st.integers(1, 50), st.integers(0, 2**32 - 1))
    def test_nearest_rank_definition(self, m, seed):
        rng = np.random.default_rng(seed)
        column = rng.uniform(0.0, 1.0, (m, 1))
        _, d1, d9 = decile_band(column)
        ordered = sorted(column[:, 0])
        assert d1[0] == ordered[math.ceil(0.1 * m) - 1]
        assert d9[0] == ordered[math.ceil(0.9 * m) - 1]

    def test_band_brackets_the_mean_inputs(self):
        rng = np.random.default_rng(15)
        ratios = rng.uniform(0.0, 1.0, (9, 4))
        mean, d1, d9 = decile_band(ratios)
        assert np.all(d1 <= d9)
        assert np.all(d1 <= ratios.max(axis=0))
        assert np.all(d9 >= ratios.min(axis=0))
        assert np.all((mean >= ratios.min(axis=0)) & (mean <= ratios.max(axis=0)))

    def test_rejects_non_matrix_input(self):
        with pytest.raises(InvalidInputError):
            decile_band([0.1, 0.2])
        with pytest.raises(InvalidInputError):
            decile_band(np.zeros((0, 3)))

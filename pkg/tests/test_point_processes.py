"""Unit tests for arrival streams and the negative binomial point sampler."""

import math

import numpy as np
import pytest
import scipy.stats as st

from nbpriors import (
    DegenerateTruncationError,
    DomainError,
    LevyTail,
    NbpConfig,
    ResourceLimitError,
    TruncationPolicy,
    gamma_arrivals,
    sample_nbp_points,
    sample_prm_points,
    tail_inverse,
    tail_support_bound,
)
from nbpriors.point_processes import MAX_ARRIVALS


class TestTruncationPolicy:
    def test_validation(self):
        with pytest.raises(DomainError):
            TruncationPolicy(mode="other")
        with pytest.raises(DomainError):
            TruncationPolicy.fixed(0)
        with pytest.raises(DomainError):
            TruncationPolicy(mode="epsilon_rule", epsilon=1.5)
        with pytest.raises(DomainError):
            TruncationPolicy(mode="fixed_count", n=10, epsilon=0.1)
        with pytest.raises(DomainError):
            TruncationPolicy(mode="epsilon_rule", epsilon=0.1, hard_cap=0)

    def test_dict_roundtrip(self):
        for policy in (TruncationPolicy.fixed(400), TruncationPolicy.epsilon_rule(1e-6, hard_cap=5000)):
            assert TruncationPolicy.from_dict(policy.to_dict()) == policy


class TestGammaArrivals:
    def test_basic_shape(self):
        stream = gamma_arrivals(42, 1000)
        arr = stream.arrivals
        assert arr.size == 1000
        assert arr[0] > 0
        assert np.all(np.diff(arr) > 0)

    def test_single(self):
        assert gamma_arrivals(5, 1).arrivals[0] > 0

    def test_deterministic(self):
        a = gamma_arrivals(7, 256).arrivals
        b = gamma_arrivals(7, 256).arrivals
        assert np.array_equal(a, b)
        c = gamma_arrivals(8, 256).arrivals
        assert not np.array_equal(a, c)

    def test_generator_ids(self):
        a = gamma_arrivals(7, 64, generator_id="philox").arrivals
        b = gamma_arrivals(7, 64, generator_id="pcg64").arrivals
        assert not np.array_equal(a, b)
        with pytest.raises(DomainError):
            gamma_arrivals(7, 64, generator_id="mt19937")

    def test_count_domain(self):
        with pytest.raises(DomainError):
            gamma_arrivals(1, 0)
        with pytest.raises(ResourceLimitError):
            gamma_arrivals(1, MAX_ARRIVALS + 1)

    def test_law_of_large_numbers(self):
        # mean of Gamma_n / n over many replications, n = 1e4
        reps, n = 10_000, 10_000
        vals = np.empty(reps)
        for i in range(reps):
            vals[i] = gamma_arrivals((1234, i), n).arrivals[-1] / n
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert abs(vals.mean() - 1.0) <= 4 * se


class TestPrmPoints:
    def test_stable_closed_form(self):
        stream = gamma_arrivals(3, 100)
        pts = sample_prm_points(LevyTail.stable(0.5), stream)
        assert np.allclose(pts, stream.arrivals ** -2.0, rtol=1e-12)
        assert np.all(np.diff(pts) < 0)

    def test_poisson_count_smoke(self):
        # #arrivals <= 5 is Poisson(5); the full-scale test lives in acceptance
        reps, t = 1500, 5.0
        counts = np.array([np.sum(gamma_arrivals((99, i), 48).arrivals <= t) for i in range(reps)])
        kmax = int(counts.max())
        pmf = st.poisson(t).pmf(np.arange(kmax + 1))
        expected = reps * np.append(pmf, 1.0 - pmf.sum())
        observed = np.bincount(counts, minlength=kmax + 2).astype(float)
        keep = expected >= 5
        chi2 = np.sum((observed[keep] - expected[keep]) ** 2 / expected[keep])
        p = st.chi2(keep.sum() - 1).sf(chi2)
        assert p > 0.001

    def test_laplace_functional(self):
        # f = c 1_[0,t]: E exp(-c N_t) = exp(-t (1 - e^{-c})) at (c, t) = (1, 2)
        c, t, reps = 1.0, 2.0, 4000
        vals = np.empty(reps)
        for i in range(reps):
            n_t = np.sum(gamma_arrivals((1010, i), 24).arrivals <= t)
            vals[i] = math.exp(-c * n_t)
        target = math.exp(-t * (1.0 - math.exp(-c)))
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert abs(vals.mean() - target) <= 4 * se


class TestNbpPoints:
    def test_r_zero_equals_prm(self):
        tail = LevyTail.gamma(3.0)
        cfg = NbpConfig(r=0.0, tail=tail, truncation=TruncationPolicy.fixed(300))
        series = sample_nbp_points(cfg, 77)
        prm = sample_prm_points(tail, gamma_arrivals(77, 300))
        assert np.array_equal(series.points, prm)
        assert series.first_index == 1

    def test_integer_path_inside_support(self):
        for tail in (LevyTail.gamma(3.0), LevyTail.stable(0.5), LevyTail.generalized_gamma(0.5)):
            cfg = NbpConfig(r=5.0, tail=tail, truncation=TruncationPolicy.fixed(100))
            series = sample_nbp_points(cfg, 13)
            assert series.first_index == 6
            assert len(series) == 95
            assert series.points[0] < tail_support_bound(tail)
            assert np.all(np.diff(series.log_points) < 0)

    def test_negative_r_rejected(self):
        with pytest.raises(DomainError):
            NbpConfig(r=-1.0, tail=LevyTail.gamma(1.0), truncation=TruncationPolicy.fixed(10))

    def test_path_selection_rules(self):
        tail = LevyTail.gamma(1.0)
        trunc = TruncationPolicy.fixed(50)
        with pytest.raises(DomainError):
            sample_nbp_points(NbpConfig(r=0.0, tail=tail, truncation=trunc), 1, randomized=True)
        with pytest.raises(DomainError):
            sample_nbp_points(NbpConfig(r=2.5, tail=tail, truncation=trunc), 1, randomized=False)

    def test_randomized_path_deterministic(self):
        tail = LevyTail.generalized_gamma(0.5)
        cfg = NbpConfig(r=2.5, tail=tail, truncation=TruncationPolicy.fixed(80))
        a = sample_nbp_points(cfg, 5)
        b = sample_nbp_points(cfg, 5)
        assert np.array_equal(a.log_points, b.log_points)
        assert a.first_index == 1 and len(a) == 80

    def test_forced_randomized_differs_from_series(self):
        tail = LevyTail.generalized_gamma(0.5)
        cfg = NbpConfig(r=4.0, tail=tail, truncation=TruncationPolicy.fixed(60))
        series = sample_nbp_points(cfg, 5)
        randomized = sample_nbp_points(cfg, 5, randomized=True)
        assert series.first_index == 5
        assert randomized.first_index == 1
        assert not np.array_equal(series.log_points[: len(randomized)], randomized.log_points[: len(series)])

    def test_count_moments_integer_r(self):
        # threshold count for args <= t is mixed Poisson: mean r(t-1), var r(t-1)t
        tail = LevyTail.gamma(3.0)
        r, t, reps = 4, 2.0, 3000
        bound = tail_inverse(tail, t)
        counts = np.empty(reps)
        cfg = NbpConfig(r=float(r), tail=tail, truncation=TruncationPolicy.fixed(400))
        for i in range(reps):
            pts = sample_nbp_points(cfg, (321, i)).points
            counts[i] = np.sum(pts >= bound)
        mean_target = r * (t - 1.0)
        var_target = r * (t - 1.0) * t
        se_mean = counts.std(ddof=1) / math.sqrt(reps)
        assert abs(counts.mean() - mean_target) <= 4 * se_mean
        s2 = counts.var(ddof=1)
        m4 = np.mean((counts - counts.mean()) ** 4)
        se_var = math.sqrt(max(m4 - s2 ** 2, 0.0) / reps)
        assert abs(s2 - var_target) <= 4 * se_var


class TestTruncation:
    def test_fixed_count_semantics(self):
        cfg = NbpConfig(r=10.0, tail=LevyTail.gamma(3.0), truncation=TruncationPolicy.fixed(400))
        series = sample_nbp_points(cfg, 9)
        assert len(series) == 390
        assert series.stopped_by == "fixed_count"
        assert not series.truncation_warning

    def test_fixed_count_degenerate(self):
        cfg = NbpConfig(r=5.0, tail=LevyTail.gamma(3.0), truncation=TruncationPolicy.fixed(6))
        with pytest.raises(DegenerateTruncationError):
            sample_nbp_points(cfg, 1)

    def test_fixed_count_hard_cap(self):
        cfg = NbpConfig(
            r=0.0, tail=LevyTail.gamma(3.0), truncation=TruncationPolicy(mode="fixed_count", n=100, hard_cap=50)
        )
        with pytest.raises(ResourceLimitError):
            sample_nbp_points(cfg, 1)

    def test_epsilon_rule_matches_manual_scan(self):
        eps = 1e-4
        tail = LevyTail.gamma(3.0)
        cfg = NbpConfig(r=0.0, tail=tail, truncation=TruncationPolicy.epsilon_rule(eps))
        series = sample_nbp_points(cfg, 2024)
        # same seed, generous fixed run: recompute the stopping index by hand
        long = sample_nbp_points(
            NbpConfig(r=0.0, tail=tail, truncation=TruncationPolicy.fixed(4096)), 2024
        ).points
        ratios = long / np.cumsum(long)
        stop = int(np.flatnonzero(ratios < eps)[0]) + 1
        assert len(series) == stop
        assert series.stopped_by == "epsilon_rule"
        assert np.array_equal(series.points, long[:stop])
        # the rule fires at the first sub-threshold relative weight, inclusively
        assert ratios[stop - 1] < eps
        assert np.all(ratios[: stop - 1] >= eps)

    def test_epsilon_rule_minimum_two_points(self):
        cfg = NbpConfig(
            r=0.0, tail=LevyTail.stable(0.5), truncation=TruncationPolicy.epsilon_rule(0.999999)
        )
        series = sample_nbp_points(cfg, 3)
        assert len(series) >= 2

    def test_hard_cap_warning(self):
        cfg = NbpConfig(
            r=0.0,
            tail=LevyTail.stable(0.5),
            truncation=TruncationPolicy(mode="epsilon_rule", epsilon=1e-12, hard_cap=100),
        )
        series = sample_nbp_points(cfg, 6)
        assert len(series) == 100
        assert series.stopped_by == "hard_cap"
        assert series.truncation_warning


class TestCsvExport:
    def test_roundtrip_text(self):
        cfg = NbpConfig(r=3.0, tail=LevyTail.gamma(2.0), truncation=TruncationPolicy.fixed(10))
        series = sample_nbp_points(cfg, 4)
        text = series.to_csv()
        lines = text.strip().splitlines()
        assert lines[0] == "index,value"
        assert len(lines) == len(series) + 1
        first_index, first_value = lines[1].split(",")
        assert int(first_index) == 4
        assert float(first_value) == series.points[0]

    def test_write_to_file(self, tmp_path):
        cfg = NbpConfig(r=0.0, tail=LevyTail.stable(0.5), truncation=TruncationPolicy.fixed(5))
        series = sample_nbp_points(cfg, 4)
        path = tmp_path / "points.csv"
        series.to_csv(str(path))
        assert path.read_text().startswith("index,value\n1,")

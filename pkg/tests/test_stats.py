import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from kpzlab.stats import (Ecdf, bootstrap_ci, ecdf, ks_one_sample,
                          ks_two_sample, moments)

finite_floats = st.floats(-1e6, 1e6, allow_nan=False)


class TestEcdf:
    def test_single_point(self):
        f = ecdf([1.0])
        assert f(0.5) == 0.0 and f(1.0) == 1.0

    def test_sorts(self):
        assert ecdf([3, 1, 2]).samples.tolist() == [1.0, 2.0, 3.0]

    def test_step_jumps(self):
        f = ecdf([1.0, 2.0, 3.0, 4.0])
        assert f(1.0) == 0.25 and f(2.5) == 0.5 and f(10) == 1.0

    def test_right_continuity(self):
        f = ecdf([0.0])
        assert f(0.0) == 1.0 and f(-1e-12) == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ecdf([])

    def test_vectorized_eval(self):
        f = ecdf([1, 2])
        np.testing.assert_allclose(f(np.array([0.0, 1.0, 5.0])),
                                   [0.0, 0.5, 1.0])


class TestKsTwoSample:
    def test_identical(self):
        e = ecdf([1.0, 2.0, 3.0])
        assert ks_two_sample(e, e).statistic == 0.0

    def test_disjoint(self):
        r = ks_two_sample(ecdf([0.0]), ecdf([1.0]))
        assert r.statistic == 1.0

    def test_interleaved_third(self):
        r = ks_two_sample(ecdf([1, 2, 3]), ecdf([1.5, 2.5, 3.5]))
        assert r.statistic == pytest.approx(1 / 3)

    def test_symmetry_and_counts(self):
        a, b = ecdf([1, 4, 6, 2]), ecdf([0, 3, 5])
        r1, r2 = ks_two_sample(a, b), ks_two_sample(b, a)
        assert r1.statistic == r2.statistic
        assert (r1.n1, r1.n2) == (4, 3)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")  # scipy-internal
    @given(st.lists(finite_floats, min_size=1, max_size=40),
           st.lists(finite_floats, min_size=1, max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_matches_scipy(self, xs, ys):
        got = ks_two_sample(ecdf(xs), ecdf(ys)).statistic
        want = sps.ks_2samp(xs, ys, method="asymp").statistic
        assert got == pytest.approx(want, abs=1e-12)


class TestKsOneSample:
    def test_single_sample_at_median(self):
        r = ks_one_sample(ecdf([0.0]), sps.norm.cdf)
        assert r.statistic == pytest.approx(0.5)

    def test_calibration_under_null(self):
        rng = np.random.default_rng(0)
        r = ks_one_sample(ecdf(rng.standard_normal(100_000)), sps.norm.cdf)
        assert r.statistic <= 0.01

    def test_degenerate_step_cdf(self):
        step = lambda x: (np.asarray(x) >= 0).astype(float)
        r = ks_one_sample(ecdf([-1.0, 1.0]), step)
        assert r.statistic == pytest.approx(0.5)

    @given(st.lists(finite_floats, min_size=1, max_size=50))
    @settings(max_examples=60, deadline=None)
    def test_matches_scipy(self, xs):
        got = ks_one_sample(ecdf(xs), sps.norm.cdf).statistic
        want = sps.kstest(xs, sps.norm.cdf).statistic
        assert got == pytest.approx(want, abs=1e-12)


class TestMoments:
    def test_two_point(self):
        m = moments([-1.0, 1.0])
        assert m.mean == 0.0 and m.variance == 2.0

    def test_constant(self):
        m = moments([5.0] * 10)
        assert m.variance == 0.0 and m.skewness == 0.0

    def test_normal_calibration(self):
        x = np.random.default_rng(1).standard_normal(1_000_000)
        m = moments(x)
        assert abs(m.mean) < 4e-3
        assert abs(m.variance - 1) < 0.006
        assert abs(m.skewness) < 0.01 and abs(m.excess_kurtosis) < 0.02

    def test_too_small(self):
        with pytest.raises(ValueError):
            moments([1.0])

    @given(st.lists(finite_floats, min_size=2, max_size=30),
           st.randoms(use_true_random=False))
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariant(self, xs, rnd):
        shuffled = list(xs)
        rnd.shuffle(shuffled)
        a, b = moments(xs), moments(shuffled)
        assert a.mean == b.mean and a.variance == b.variance
        assert a.skewness == b.skewness

    def test_standard_errors_positive(self):
        m = moments(np.random.default_rng(2).standard_normal(1000))
        assert m.se_mean > 0 and m.se_variance > 0


class TestBootstrap:
    def test_constant_zero_width(self):
        lo, hi = bootstrap_ci([2.0] * 50, np.mean, 200, 0.95,
                              np.random.default_rng(0))
        assert lo == hi == 2.0

    def test_deterministic_given_seed(self):
        x = np.random.default_rng(3).standard_normal(500)
        a = bootstrap_ci(x, np.mean, 300, 0.95, np.random.default_rng(42))
        b = bootstrap_ci(x, np.mean, 300, 0.95, np.random.default_rng(42))
        assert a == b

    def test_interval_covers_point_estimate(self):
        x = np.random.default_rng(4).standard_normal(2000)
        lo, hi = bootstrap_ci(x, np.mean, 400, 0.95, np.random.default_rng(5))
        assert lo <= float(x.mean()) <= hi
        assert hi - lo < 0.2

    def test_coverage_calibration(self):
        # ~95% of intervals for the mean of N(0,1), n=400, should cover 0.
        rng = np.random.default_rng(6)
        covered = 0
        reps = 60
        for _ in range(reps):
            x = rng.standard_normal(400)
            lo, hi = bootstrap_ci(x, np.mean, 200, 0.95, rng)
            covered += lo <= 0.0 <= hi
        assert covered >= int(0.85 * reps)

    def test_argument_guards(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            bootstrap_ci([1.0, 2.0], np.mean, 50, 0.95, rng)
        with pytest.raises(ValueError):
            bootstrap_ci([1.0, 2.0], np.mean, 200, 1.5, rng)
        with pytest.raises(ValueError):
            bootstrap_ci([], np.mean, 200, 0.95, rng)

import math

import numpy as np
import pytest

from zerocond.numerics import (
    RadialCurve,
    StreamingStat,
    dilog,
    sample_std_complex_gaussian,
    sample_std_complex_gaussian_array,
    trial_rng,
    zeta_value,
)


def dilog_series_oracle(x: float, terms: int = 2_000_000):
    """Partial sums of sum x^n/n^2 with an explicit tail bracket."""
    n = np.arange(1, terms + 1, dtype=float)
    partial = float(np.sum(x ** n / n ** 2))
    if x < 1.0:
        tail_hi = x ** (terms + 1) / (terms + 1) ** 2 / (1 - x)
    else:
        tail_hi = 1.0 / terms  # integral bound on sum_{n>K} n^-2
    return partial, tail_hi


class TestDilog:
    def test_zero(self):
        assert dilog(0.0) == 0.0

    def test_one_against_series_oracle(self):
        partial, tail = dilog_series_oracle(1.0)
        val = dilog(1.0)
        assert partial < val < partial + tail
        assert abs(val - math.pi ** 2 / 6) < 1e-12

    def test_half_against_series_oracle(self):
        partial, tail = dilog_series_oracle(0.5, terms=200)
        val = dilog(0.5)
        assert abs(val - partial) <= tail + 1e-15
        assert abs(val - (math.pi ** 2 / 12 - math.log(2) ** 2 / 2)) < 1e-12

    @pytest.mark.parametrize("x", [0.05, 0.2, 0.45, 0.55, 0.8, 0.99])
    def test_euler_reflection(self, x):
        lhs = dilog(x) + dilog(1 - x)
        rhs = math.pi ** 2 / 6 - math.log(x) * math.log(1 - x)
        assert abs(lhs - rhs) < 1e-10

    def test_domain(self):
        with pytest.raises(ValueError):
            dilog(-0.1)
        with pytest.raises(ValueError):
            dilog(1.1)

    def test_vectorised(self):
        xs = np.linspace(0.0, 1.0, 11)
        vals = dilog(xs)
        assert np.allclose(vals, [dilog(float(x)) for x in xs], rtol=0, atol=0)


class TestZeta:
    @pytest.mark.parametrize("s", [2, 3, 4, 7])
    def test_series_tail_bracket(self, s):
        n = np.arange(1, 40_001, dtype=float)
        partial = float(np.sum(n ** (-float(s))))
        lo = partial + 40_001.0 ** (1 - s) / (s - 1)
        hi = partial + 40_000.0 ** (1 - s) / (s - 1)
        assert lo - 1e-13 <= zeta_value(s) <= hi + 1e-13

    def test_known_values(self):
        assert abs(zeta_value(2) - math.pi ** 2 / 6) < 1e-12
        assert abs(zeta_value(3) - 1.2020569031595943) < 1e-12
        assert abs(zeta_value(4) - math.pi ** 4 / 90) < 1e-12

    def test_monotone_to_one(self):
        vals = [zeta_value(s) for s in range(2, 13)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert 0 < zeta_value(30) - 1 < 1e-8

    def test_domain(self):
        with pytest.raises(ValueError):
            zeta_value(1)


class TestComplexGaussian:
    def test_golden_first_draw(self):
        a = sample_std_complex_gaussian(trial_rng(42, 0))
        assert a.real == pytest.approx(0.23869905909424619, abs=0, rel=0)
        assert a.imag == pytest.approx(-0.5530660285360742, abs=0, rel=0)

    def test_moments(self):
        rng = trial_rng(7, 0)
        a = sample_std_complex_gaussian_array(rng, 1_000_000)
        assert abs(a.mean()) < 4e-3                      # 4 sigma CLT bound
        assert abs(np.mean(np.abs(a) ** 2) - 1) < 4e-3
        assert abs(np.mean(a * a)) < 4e-3                # E[a a] = 0

    def test_scalar_batch_stream_consistency(self):
        r1, r2 = trial_rng(9, 3), trial_rng(9, 3)
        singles = [sample_std_complex_gaussian(r1) for _ in range(5)]
        batch = sample_std_complex_gaussian_array(r2, 5)
        assert np.allclose(singles, batch, rtol=0, atol=0)

    def test_streams_distinct_and_reproducible(self):
        a = sample_std_complex_gaussian_array(trial_rng(1, 0), 4)
        b = sample_std_complex_gaussian_array(trial_rng(1, 1), 4)
        c = sample_std_complex_gaussian_array(trial_rng(1, 0), 4)
        assert not np.allclose(a, b)
        assert np.array_equal(a, c)


class TestStreamingStat:
    def test_merge_matches_single_pass(self, rng):
        xs = rng.normal(size=3000) * 3 + 1
        single = StreamingStat()
        for x in xs:
            single.update(x)
        for split in (1, 7, 100, 1500, 2999):
            left, right = StreamingStat(), StreamingStat()
            left.update_batch(xs[:split])
            right.update_batch(xs[split:])
            left.merge(right)
            assert left.count == single.count
            assert abs(left.mean - single.mean) <= 1e-12 * abs(single.mean)
            assert abs(left.variance - single.variance) <= 1e-12 * single.variance

    def test_merge_order_independent(self, rng):
        xs = rng.normal(size=600)
        a, b = StreamingStat(), StreamingStat()
        a.update_batch(xs[:200]); a.update_batch(xs[200:])
        b.update_batch(xs[200:]); b.update_batch(xs[:200])
        assert abs(a.variance - b.variance) < 1e-12

    def test_nonnegative_variance(self):
        s = StreamingStat()
        s.update(1.0)
        assert s.variance == 0.0
        s.update(1.0)
        assert s.variance >= 0.0


class TestRadialCurve:
    def test_invariants(self):
        with pytest.raises(ValueError):
            RadialCurve(np.array([0.0, 1.0, 0.5]), np.zeros(2), np.zeros(2))
        with pytest.raises(ValueError):
            RadialCurve(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2))
        with pytest.raises(ValueError):
            RadialCurve(np.array([0.0, 1.0, 2.0]), np.zeros(2), np.array([-1.0, 0.0]))
        c = RadialCurve(np.array([0.0, 1.0, 2.0]), np.ones(2), np.zeros(2))
        assert c.n_bins == 2
        assert np.allclose(c.centers, [0.5, 1.5])

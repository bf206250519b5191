"""Divergence layer: worked examples against independent oracles, plus the
structural properties (Pinsker as stated, convexity, inverse consistency,
nonnegativity with its equality case, and the variational gap contract)."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacbayes.divergences import (
    DiagonalGaussian,
    DiscreteDistribution,
    chi2_discrete,
    dv_gap,
    gibbs_reweight,
    kl_bernoulli,
    kl_discrete,
    kl_gaussian_diag,
    kl_inverse_upper,
    kl_uniform_ball,
)

from oracles import grid_kl_inverse, kl_gaussian_quadrature

probs = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
inner_probs = st.floats(min_value=1e-6, max_value=1 - 1e-6)


def random_distribution(rng, m):
    return DiscreteDistribution.from_weights(rng.random(m) + 1e-3)


class TestDiscreteDistribution:
    def test_validates_sum(self):
        with pytest.raises(ValueError):
            DiscreteDistribution(np.array([0.5, 0.4]))

    def test_validates_sign(self):
        with pytest.raises(ValueError):
            DiscreteDistribution(np.array([1.5, -0.5]))

    def test_uniform_and_dirac(self):
        u = DiscreteDistribution.uniform(4)
        assert np.allclose(u.weights, 0.25)
        d = DiscreteDistribution.dirac(4, 2)
        assert d.weights[2] == 1.0 and d.weights.sum() == 1.0


class TestKlBernoulli:
    def test_equal_arguments(self):
        assert kl_bernoulli(0.3, 0.3) == 0.0

    def test_worked_values(self):
        # frozen from direct high-precision evaluation of the closed form
        assert kl_bernoulli(0.1, 0.5) == pytest.approx(0.3680642071684971, abs=1e-12)
        assert kl_bernoulli(0.5, 0.25) == pytest.approx(0.1438410362258904, abs=1e-12)

    def test_boundary_conventions(self):
        assert kl_bernoulli(0.0, 0.3) == pytest.approx(-math.log(0.7))
        assert kl_bernoulli(1.0, 0.3) == pytest.approx(-math.log(0.3))
        assert kl_bernoulli(0.5, 0.0) == math.inf
        assert kl_bernoulli(0.5, 1.0) == math.inf
        assert kl_bernoulli(0.0, 0.0) == 0.0
        assert kl_bernoulli(1.0, 1.0) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            kl_bernoulli(-0.1, 0.5)
        with pytest.raises(ValueError):
            kl_bernoulli(0.5, 1.2)

    @given(probs, probs)
    def test_pinsker_as_stated(self, p, q):
        # tested in the form kl(p|q) >= (p-q)^2; the classical constant is 2,
        # which implies this weaker statement
        assert kl_bernoulli(p, q) >= (p - q) ** 2 - 1e-15

    @given(inner_probs, inner_probs, inner_probs, inner_probs,
           st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=200)
    def test_joint_convexity(self, p1, q1, p2, q2, a):
        mix = kl_bernoulli(a * p1 + (1 - a) * p2, a * q1 + (1 - a) * q2)
        assert mix <= a * kl_bernoulli(p1, q1) + (1 - a) * kl_bernoulli(p2, q2) + 1e-12


class TestKlInverseUpper:
    def test_zero_budget(self):
        assert kl_inverse_upper(0.4, 0.0) == 0.4

    def test_analytic_q_zero(self):
        # kl(0|p) = -log(1-p), so the inverse at budget b is 1 - e^{-b}
        b = 0.6931471805599453
        assert kl_inverse_upper(0.0, b) == pytest.approx(1 - math.exp(-b), abs=1e-8)
        assert kl_inverse_upper(0.0, b) == pytest.approx(0.5, abs=1e-8)

    def test_against_grid_oracle(self):
        assert kl_inverse_upper(0.26, 0.0046) == pytest.approx(
            grid_kl_inverse(0.26, 0.0046), abs=1e-6
        )

    def test_q_one(self):
        assert kl_inverse_upper(1.0, 0.5) == 1.0

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            kl_inverse_upper(0.3, -1e-9)

    @given(inner_probs, st.floats(min_value=0.0, max_value=3.0),
           st.floats(min_value=0.0, max_value=3.0))
    @settings(max_examples=200)
    def test_monotone_in_budget(self, q, b1, b2):
        lo, hi = sorted((b1, b2))
        assert kl_inverse_upper(q, lo) <= kl_inverse_upper(q, hi) + 1e-12

    @given(inner_probs, st.floats(min_value=1e-6, max_value=3.0))
    @settings(max_examples=200)
    def test_inverse_consistency(self, q, b):
        p = kl_inverse_upper(q, b)
        if p < 1.0:
            assert kl_bernoulli(q, p) <= b + 1e-8


class TestKlDiscrete:
    def test_identical(self):
        u = DiscreteDistribution.uniform(7)
        assert kl_discrete(u, u) == 0.0

    def test_dirac_against_uniform(self):
        d = DiscreteDistribution.dirac(100, 3)
        u = DiscreteDistribution.uniform(100)
        assert kl_discrete(d, u) == pytest.approx(math.log(100), rel=1e-12)

    def test_worked_value(self):
        rho = DiscreteDistribution(np.array([0.7, 0.3]))
        pi = DiscreteDistribution(np.array([0.5, 0.5]))
        expected = 0.7 * math.log(1.4) + 0.3 * math.log(0.6)
        assert kl_discrete(rho, pi) == pytest.approx(expected, abs=1e-13)
        assert kl_discrete(rho, pi) == pytest.approx(0.08228287850505178, abs=1e-12)

    def test_infinite_when_prior_misses_support(self):
        rho = DiscreteDistribution(np.array([0.5, 0.5]))
        pi = DiscreteDistribution(np.array([1.0, 0.0]))
        assert kl_discrete(rho, pi) == math.inf

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            kl_discrete(DiscreteDistribution.uniform(3), DiscreteDistribution.uniform(4))

    def test_nonnegative_with_equality_iff_equal(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            m = int(rng.integers(2, 12))
            rho = random_distribution(rng, m)
            pi = random_distribution(rng, m)
            val = kl_discrete(rho, pi)
            assert val >= 0
            if not np.allclose(rho.weights, pi.weights):
                assert val > 0
            assert kl_discrete(rho, rho) == 0.0


class TestChi2Discrete:
    def test_identical(self):
        u = DiscreteDistribution.uniform(5)
        assert chi2_discrete(u, u) == pytest.approx(0.0, abs=1e-12)

    def test_dirac_closed_form(self):
        for m in (2, 4, 9):
            d = DiscreteDistribution.dirac(m, 0)
            u = DiscreteDistribution.uniform(m)
            assert chi2_discrete(d, u) == pytest.approx(m - 1, rel=1e-12)

    def test_worked_value(self):
        rho = DiscreteDistribution(np.array([0.7, 0.3]))
        pi = DiscreteDistribution(np.array([0.5, 0.5]))
        assert chi2_discrete(rho, pi) == pytest.approx(0.16, abs=1e-12)

    def test_infinite_on_null_support(self):
        rho = DiscreteDistribution(np.array([0.5, 0.5]))
        pi = DiscreteDistribution(np.array([1.0, 0.0]))
        assert chi2_discrete(rho, pi) == math.inf


class TestKlGaussianDiag:
    def test_identical(self):
        g = DiagonalGaussian(mean=np.zeros(3), std=0.7)
        assert kl_gaussian_diag(g, 0.7) == pytest.approx(0.0, abs=1e-12)

    def test_unit_shift(self):
        g = DiagonalGaussian(mean=np.array([1.0]), std=1.0)
        assert kl_gaussian_diag(g, 1.0) == pytest.approx(0.5, abs=1e-13)

    def test_2d_scale(self):
        g = DiagonalGaussian(mean=np.zeros(2), std=0.5)
        expected = 1.0 * (0.25 + math.log(4.0) / 2.0 * 2.0 - 1.0)
        assert kl_gaussian_diag(g, 1.0) == pytest.approx(expected, abs=1e-12)
        # cross-check against numerical integration (d=2 = 2 independent 1-D terms)
        assert kl_gaussian_diag(g, 1.0) == pytest.approx(
            2 * kl_gaussian_quadrature(0.0, 0.5, 1.0), abs=1e-6
        )

    def test_against_quadrature_randomized(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            m = float(rng.normal())
            s = float(rng.uniform(0.3, 2.0))
            sigma = float(rng.uniform(0.3, 2.0))
            g = DiagonalGaussian(mean=np.array([m]), std=s)
            assert kl_gaussian_diag(g, sigma) == pytest.approx(
                kl_gaussian_quadrature(m, s, sigma), abs=1e-6
            )

    def test_rejects_bad_std(self):
        with pytest.raises(ValueError):
            DiagonalGaussian(mean=np.zeros(2), std=0.0)
        g = DiagonalGaussian(mean=np.zeros(2), std=1.0)
        with pytest.raises(ValueError):
            kl_gaussian_diag(g, -1.0)


class TestKlUniformBall:
    def test_same_ball(self):
        assert kl_uniform_ball(3, 1.0, 1.0) == 0.0

    def test_log_volume_ratio(self):
        assert kl_uniform_ball(2, 1.0, 0.1) == pytest.approx(2 * math.log(10), rel=1e-12)
        assert kl_uniform_ball(2, 1.0, 0.1) == pytest.approx(4.605170185988092, abs=1e-12)
        assert kl_uniform_ball(1, 2.0, 1.0) == pytest.approx(math.log(2), rel=1e-12)

    def test_rejects_bad_radii(self):
        with pytest.raises(ValueError):
            kl_uniform_ball(2, 1.0, 1.5)
        with pytest.raises(ValueError):
            kl_uniform_ball(2, 1.0, 0.0)


class TestDvGap:
    def test_constant_function(self):
        u = DiscreteDistribution.uniform(4)
        assert dv_gap(np.full(4, 3.7), u, u) == pytest.approx(0.0, abs=1e-12)

    def test_zero_at_gibbs(self):
        h = np.array([-1.0, -2.0, -4.0])
        pi = DiscreteDistribution.uniform(3)
        rho = gibbs_reweight(pi, h)
        assert abs(dv_gap(h, rho, pi)) <= 1e-12

    def test_positive_away_from_gibbs(self):
        h = np.array([-1.0, -2.0, -4.0])
        pi = DiscreteDistribution.uniform(3)
        rho = DiscreteDistribution.dirac(3, 0)
        # both sides evaluated directly
        lhs = math.log(np.mean(np.exp(h)))
        rhs = h[0] - math.log(1 / pi.weights[0])
        assert dv_gap(h, rho, pi) == pytest.approx(lhs - rhs, abs=1e-12)
        assert dv_gap(h, rho, pi) > 0

    def test_gap_equals_kl_to_gibbs(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            m = int(rng.integers(2, 50))
            h = rng.normal(size=m) * 3
            pi = random_distribution(rng, m)
            rho = random_distribution(rng, m)
            gap = dv_gap(h, rho, pi)
            assert gap >= -1e-12
            assert gap == pytest.approx(kl_discrete(rho, gibbs_reweight(pi, h)), abs=1e-9)

    def test_gibbs_attains_smallest_gap(self):
        rng = np.random.default_rng(5)
        m = 20
        h = rng.normal(size=m)
        pi = random_distribution(rng, m)
        gibbs = gibbs_reweight(pi, h)
        gap_star = dv_gap(h, gibbs, pi)
        for _ in range(1000):
            rho = random_distribution(rng, m)
            assert dv_gap(h, rho, pi) >= gap_star - 1e-12

    def test_infinite_kl_propagates(self):
        pi = DiscreteDistribution(np.array([1.0, 0.0]))
        rho = DiscreteDistribution(np.array([0.5, 0.5]))
        assert dv_gap(np.zeros(2), rho, pi) == math.inf

    def test_large_h_stable(self):
        pi = DiscreteDistribution.uniform(3)
        h = np.array([1e6, -1e6, 0.0])
        rho = gibbs_reweight(pi, h)
        assert abs(dv_gap(h, rho, pi)) <= 1e-9

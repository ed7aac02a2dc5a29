import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from oracles import cond_entropy_bits, h2_bits, mi_bits
from secureid.errors import DomainError, InvariantError, ShapeError
from secureid.infotheory import (
    JointPmf,
    LogBase,
    Pmf,
    binary_entropy,
    conditional_entropy,
    doubly_symmetric_binary_source,
    entropy,
    gaussian_log_density,
    js_information,
    mutual_information,
    total_variation,
)

probs = st.floats(0.0, 1.0, allow_nan=False)


def random_joint(rng, rows, cols):
    p = rng.random((rows, cols)) ** 3
    return JointPmf(p / p.sum())


class TestBinaryEntropy:
    @pytest.mark.parametrize("p, expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)])
    def test_trivial_points(self, p, expected):
        assert binary_entropy(p) == expected

    def test_against_summation_oracle(self):
        assert binary_entropy(0.1) == pytest.approx(0.468996, abs=1e-6)
        assert binary_entropy(0.1) == pytest.approx(h2_bits(0.1), abs=1e-15)

    @pytest.mark.parametrize("p", [-0.01, 1.01, float("nan")])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            binary_entropy(p)

    @given(probs)
    def test_symmetry_and_maximum(self, p):
        assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)
        assert binary_entropy(p) <= 1.0 + 1e-15

    @given(probs)
    def test_units(self, p):
        assert binary_entropy(p, LogBase.BITS) * math.log(2) == pytest.approx(
            binary_entropy(p, LogBase.NATS), abs=1e-12
        )


class TestPmf:
    def test_normalization_enforced(self):
        with pytest.raises(InvariantError):
            Pmf([0.5, 0.6])
        with pytest.raises(InvariantError):
            Pmf([1.5, -0.5])
        with pytest.raises(InvariantError):
            JointPmf([[0.5, 0.5], [0.5, 0.5]])

    def test_entropy_uniform(self):
        assert entropy(Pmf(np.full(8, 1 / 8))) == pytest.approx(3.0, abs=1e-14)


class TestMutualInformation:
    def test_independent_is_zero(self):
        assert mutual_information(JointPmf(np.full((2, 2), 0.25))) == pytest.approx(0.0, abs=1e-15)

    def test_perfect_correlation(self):
        assert mutual_information(JointPmf(np.diag([0.5, 0.5]))) == pytest.approx(1.0, abs=1e-15)

    def test_correlated_binary_source(self):
        src = doubly_symmetric_binary_source(0.1)
        assert mutual_information(src) == pytest.approx(0.531004406410719, abs=1e-12)
        assert conditional_entropy(src) == pytest.approx(h2_bits(0.1), abs=1e-12)

    def test_conditional_entropy_trivial(self):
        assert conditional_entropy(JointPmf(np.diag([0.5, 0.5]))) == pytest.approx(0.0, abs=1e-15)
        assert conditional_entropy(JointPmf(np.full((2, 2), 0.25))) == pytest.approx(1.0, abs=1e-15)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
    def test_against_oracle_and_nonnegative(self, seed, r, c):
        j = random_joint(np.random.default_rng(seed), r, c)
        mi = mutual_information(j)
        assert mi >= 0
        assert mi == pytest.approx(mi_bits(j.probs.tolist()), abs=1e-12)
        assert conditional_entropy(j) == pytest.approx(cond_entropy_bits(j.probs.tolist()), abs=1e-12)
        assert mi * math.log(2) == pytest.approx(mutual_information(j, LogBase.NATS), abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6))
    def test_rank_one_joint_has_zero_information(self, seed, r, c):
        g = np.random.default_rng(seed)
        a, b = g.random(r) + 0.01, g.random(c) + 0.01
        joint = np.outer(a / a.sum(), b / b.sum())
        assert mutual_information(JointPmf(joint / joint.sum())) == pytest.approx(0.0, abs=1e-12)


class TestTotalVariation:
    def test_examples(self):
        assert total_variation(Pmf([0.5, 0.5]), Pmf([0.5, 0.5])) == 0.0
        assert total_variation(Pmf([1.0, 0.0]), Pmf([0.0, 1.0])) == 1.0
        assert total_variation(Pmf([0.5, 0.5]), Pmf([1.0, 0.0])) == pytest.approx(0.5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            total_variation(Pmf([1.0]), Pmf([0.5, 0.5]))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_metric_axioms(self, seed, k):
        g = np.random.default_rng(seed)
        p, q, r = (Pmf(v / v.sum()) for v in g.random((3, k)) + 1e-3)
        assert total_variation(p, q) == pytest.approx(total_variation(q, p), abs=1e-15)
        assert total_variation(p, r) <= total_variation(p, q) + total_variation(q, r) + 1e-12
        assert total_variation(p, p) == 0.0
        assert 0.0 <= total_variation(p, q) <= 1.0


class TestGaussianLogDensity:
    def test_examples(self):
        c = -0.5 * math.log(2 * math.pi)
        assert gaussian_log_density(0.0, 0.0, 1.0) == pytest.approx(c, abs=1e-15)
        assert gaussian_log_density(3.7, 3.7, 2.5) == pytest.approx(-0.5 * math.log(2 * math.pi * 2.5), abs=1e-15)
        assert gaussian_log_density(1.0, 0.0, 1.0) == pytest.approx(c - 0.5, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            gaussian_log_density(0.0, 0.0, 0.0)

    @given(st.floats(-5, 5), st.floats(0.01, 20))
    def test_integrates_to_one(self, mean, var):
        sd = math.sqrt(var)
        y = np.linspace(mean - 10 * sd, mean + 10 * sd, 20001)
        assert trapezoid(np.exp(gaussian_log_density(y, mean, var)), y) == pytest.approx(1.0, abs=1e-6)


class TestJsInformation:
    def test_identical_and_disjoint(self):
        assert js_information([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-15)
        assert js_information([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-15)

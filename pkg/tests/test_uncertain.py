import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinsim.uncertain import (
    UncertainBool,
    UncertainReal,
    add,
    decide,
    div,
    eq_in_distribution,
    lt_prob,
    mul,
    norm_cdf,
    scale,
    sub,
)

finite_means = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
stds = st.floats(min_value=0.0, max_value=1e3, allow_nan=False)
positive_stds = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


def uncertain(mean_strategy=finite_means, std_strategy=stds):
    return st.builds(UncertainReal, mean_strategy, std_strategy)


class TestAdd:
    def test_quadrature_example(self):
        out = add(UncertainReal(2.0, 0.3), UncertainReal(2.5, 0.25))
        assert out.mean == pytest.approx(4.5)
        assert out.std == pytest.approx(math.sqrt(0.09 + 0.0625), abs=1e-9)

    def test_crisp_zero_is_identity(self):
        x = UncertainReal(3.7, 0.42)
        assert add(x, UncertainReal(0.0, 0.0)) == x

    def test_equal_operands(self):
        out = add(UncertainReal(1.0, 0.1), UncertainReal(1.0, 0.1))
        assert out.mean == pytest.approx(2.0)
        assert out.std == pytest.approx(math.sqrt(2.0) * 0.1, abs=1e-12)

    def test_operator_sugar(self):
        assert (UncertainReal(1.0, 0.1) + UncertainReal(2.0, 0.2)).mean == 3.0
        assert (UncertainReal(1.0, 0.1) - UncertainReal(2.0, 0.2)).mean == -1.0
        assert sub(UncertainReal(1.0, 0.3), UncertainReal(1.0, 0.4)).std == \
            pytest.approx(0.5)

    @given(uncertain(), uncertain())
    def test_never_shrinks_uncertainty(self, a, b):
        assert add(a, b).std >= max(a.std, b.std) - 1e-12

    @given(uncertain(), uncertain())
    def test_commutative(self, a, b):
        ab, ba = add(a, b), add(b, a)
        assert ab.mean == pytest.approx(ba.mean, abs=1e-12)
        assert ab.std == pytest.approx(ba.std, abs=1e-12)


class TestScale:
    def test_negation_keeps_std(self):
        assert scale(-1.0, UncertainReal(3.0, 0.2)) == UncertainReal(-3.0, 0.2)

    def test_zero_annihilates(self):
        assert scale(0.0, UncertainReal(5.0, 2.0)) == UncertainReal(0.0, 0.0)

    def test_half(self):
        out = scale(0.5, UncertainReal(2.0, 0.289))
        assert out.mean == pytest.approx(1.0)
        assert out.std == pytest.approx(0.1445, abs=1e-9)

    @given(uncertain(), st.floats(min_value=1e-6, max_value=1e6))
    def test_roundtrip(self, a, k):
        back = scale(k, scale(1.0 / k, a))
        assert back.mean == pytest.approx(a.mean, rel=1e-12, abs=1e-12)
        assert back.std == pytest.approx(a.std, rel=1e-12, abs=1e-12)


class TestMul:
    def test_example(self):
        out = mul(UncertainReal(2.0, 0.1), UncertainReal(3.0, 0.2))
        assert out.mean == pytest.approx(6.0)
        assert out.std == pytest.approx(0.5)  # sqrt((3*0.1)^2 + (2*0.2)^2)

    def test_crisp_one_is_identity(self):
        x = UncertainReal(4.2, 0.7)
        assert mul(x, UncertainReal(1.0, 0.0)) == x

    def test_crisp_zero(self):
        assert mul(UncertainReal(0.0, 0.0), UncertainReal(7.0, 0.5)) == \
            UncertainReal(0.0, 0.0)

    @given(uncertain(), uncertain())
    def test_commutative(self, a, b):
        ab, ba = mul(a, b), mul(b, a)
        assert ab.mean == pytest.approx(ba.mean, abs=1e-9, rel=1e-12)
        assert ab.std == pytest.approx(ba.std, abs=1e-9, rel=1e-12)


class TestDiv:
    def test_matches_relative_quadrature(self):
        out = div(UncertainReal(6.0, 0.3), UncertainReal(2.0, 0.1))
        rel = math.hypot(0.3 / 6.0, 0.1 / 2.0)
        assert out.mean == pytest.approx(3.0)
        assert out.std == pytest.approx(3.0 * rel, rel=1e-12)

    def test_zero_numerator_mean_is_stable(self):
        out = div(UncertainReal(0.0, 0.3), UncertainReal(2.0, 0.1))
        assert out.mean == 0.0
        assert out.std == pytest.approx(0.15)

    def test_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            div(UncertainReal(1.0, 0.1), UncertainReal(0.0, 0.1))


class TestLtProb:
    def test_paper_comparison_case(self):
        p = lt_prob(UncertainReal(2.0, 0.3), UncertainReal(2.5, 0.25))
        # closed form gives 0.8998; the reported 0.893 sits in the band too
        assert p.confidence == pytest.approx(norm_cdf(0.5 / math.sqrt(0.1525)), abs=1e-12)
        assert 0.883 <= p.confidence <= 0.910

    def test_symmetric_same_distribution(self):
        p = lt_prob(UncertainReal(5.0, 0.4), UncertainReal(5.0, 0.4))
        assert p.confidence == pytest.approx(0.5, abs=1e-12)

    def test_far_apart_is_near_certain(self):
        p = lt_prob(UncertainReal(0.0, 0.1), UncertainReal(1.0, 0.1))
        assert p.confidence == pytest.approx(1.0, abs=1e-3)

    def test_crisp_degenerates_to_strict_comparison(self):
        assert lt_prob(UncertainReal(1.0), UncertainReal(2.0)).confidence == 1.0
        assert lt_prob(UncertainReal(2.0), UncertainReal(1.0)).confidence == 0.0
        assert lt_prob(UncertainReal(2.0), UncertainReal(2.0)).confidence == 0.0

    @given(uncertain(std_strategy=positive_stds), uncertain(std_strategy=positive_stds))
    def test_complement(self, a, b):
        total = lt_prob(a, b).confidence + lt_prob(b, a).confidence
        assert total == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_monte_carlo_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = UncertainReal(rng.uniform(-2, 2), rng.uniform(0.01, 1.0))
        b = UncertainReal(rng.uniform(-2, 2), rng.uniform(0.01, 1.0))
        n = 1_000_000
        hits = np.count_nonzero(rng.normal(a.mean, a.std, n) < rng.normal(b.mean, b.std, n))
        p_mc = hits / n
        se = math.sqrt(max(p_mc * (1 - p_mc), 1e-12) / n)
        assert abs(lt_prob(a, b).confidence - p_mc) <= 3 * se + 1e-6


class TestDecide:
    def test_above_threshold(self):
        assert decide(UncertainBool(0.987), 0.95)

    def test_boundary_inclusive(self):
        assert decide(UncertainBool(0.95), 0.95)

    def test_below_threshold(self):
        assert not decide(UncertainBool(0.312), 0.95)

    def test_level_must_be_open_interval(self):
        with pytest.raises(ValueError):
            decide(UncertainBool(0.5), 1.0)


class TestUncertainBool:
    def test_negation(self):
        assert (~UncertainBool(0.3)).confidence == pytest.approx(0.7)

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            UncertainBool(1.2)
        with pytest.raises(ValueError):
            UncertainBool(-0.1)


class TestEqInDistribution:
    def test_identical(self):
        assert eq_in_distribution(UncertainReal(2, 0.3), UncertainReal(2, 0.3), 0.0)

    def test_std_outside_tol(self):
        assert not eq_in_distribution(UncertainReal(2, 0.3), UncertainReal(2, 0.31), 0.005)

    def test_mean_within_tol(self):
        assert eq_in_distribution(UncertainReal(2, 0.3), UncertainReal(2.001, 0.3), 0.01)


def test_negative_std_rejected():
    with pytest.raises(ValueError):
        UncertainReal(1.0, -0.1)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        UncertainReal(float("nan"), 0.1)
    with pytest.raises(ValueError):
        UncertainReal(1.0, float("inf"))

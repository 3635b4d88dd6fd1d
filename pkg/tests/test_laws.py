import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from flashlab import laws
from flashlab.laws import Exponential, PointMass, RandomSign, TwoPoint, Uniform, law_from_dict

finite = st.floats(-5, 5, allow_nan=False)


def test_uniform_partial_mean_matches_quadrature():
    law = Uniform(0.1, 0.3)
    for a, b in [(0.0, 1.0), (0.15, 0.2), (-1.0, 0.12), (0.25, 0.5)]:
        expected = integrate.quad(lambda x: x * stats.uniform(0.1, 0.2).pdf(x), a, b, points=[0.1, 0.3])[0]
        assert law.partial_mean(a, b) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("rate,shift", [(1.0, 0.0), (2.5, -0.1), (0.7, 0.3)])
def test_exponential_closed_forms_match_scipy(rate, shift):
    law = Exponential(rate, shift)
    ref = stats.expon(loc=shift, scale=1 / rate)
    for a, b in [(-1.0, 0.0), (0.0, math.inf), (0.2, 1.5), (-math.inf, 0.4)]:
        assert law.prob_between(a, b) == pytest.approx(ref.cdf(b) - ref.cdf(a), abs=1e-12)
        lo, hi = max(a, shift), b
        expected = integrate.quad(lambda x: x * ref.pdf(x), lo, hi)[0] if lo < hi else 0.0
        assert law.partial_mean(a, b) == pytest.approx(expected, abs=1e-8)
    assert laws.mean(law) == pytest.approx(shift + 1 / rate)


def test_exponential_draw_is_inverse_cdf():
    law = Exponential(1.0, -0.1)
    u = np.random.default_rng(0).random(50_000)
    draws = np.array([law.draw(0.0, x) for x in u])
    assert stats.kstest(draws, stats.expon(loc=-0.1).cdf).pvalue > 0.01


def test_two_point_moments():
    law = TwoPoint(2.0, -1.0, 0.3)
    assert laws.mean(law) == pytest.approx(0.3 * 2 - 0.7)
    assert laws.prob_positive(law) == pytest.approx(0.3)
    assert laws.cond_mean_given_sign(law, -1) == pytest.approx(-1.0)


def test_random_sign_uniform_magnitude():
    law = RandomSign(Uniform(0.1, 0.3))
    assert laws.mean(law) == pytest.approx(0.0, abs=1e-15)
    assert laws.cond_mean_given_sign(law, +1) == pytest.approx(0.2)
    assert laws.cond_mean_given_sign(law, -1) == pytest.approx(-0.2)
    assert laws.prob_abs_between(law, 0.2, 1.0) == pytest.approx(0.5)


def test_random_sign_rejects_signed_magnitude():
    with pytest.raises(ValueError):
        RandomSign(Uniform(-0.1, 0.3))


def test_point_mass_atom():
    assert PointMass(0.0).has_atom_at_zero()
    assert not PointMass(0.5).has_atom_at_zero()
    assert laws.prob_positive(PointMass(0.0)) == 0.0


laws_st = st.one_of(
    st.builds(PointMass, finite.filter(lambda x: x != 0)),
    st.builds(TwoPoint, finite, finite, st.floats(0, 1)),
    st.builds(lambda a, w: Uniform(a, a + w), finite, st.floats(0.01, 3)),
    st.builds(Exponential, st.floats(0.1, 5), st.floats(-2, 2)),
    st.builds(RandomSign, st.builds(lambda a, w: Uniform(a, a + w), st.floats(0, 2), st.floats(0.01, 1)),
              st.floats(0, 1)),
)


@given(laws_st)
def test_sign_probabilities_partition(law):
    total = laws.prob_positive(law) + laws.prob_negative(law) + law.prob_between(0.0, 0.0)
    assert total == pytest.approx(1.0, abs=1e-12)


@given(laws_st, st.floats(0.05, 1), st.floats(1, 5))
def test_clipped_mean_bounded_by_clip_window(law, lo, hi):
    m = laws.clipped_mean(law, lo, hi)
    assert abs(m) <= hi * laws.prob_abs_between(law, lo, hi) + 1e-12


@given(laws_st)
def test_dict_round_trip(law):
    assert law_from_dict(law.to_dict()) == law


@given(laws_st, st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_draw_lands_in_support(law, us, um):
    x = law.draw(us, um)
    assert law.prob_between(x - 1e-9, x + 1e-9) > 0

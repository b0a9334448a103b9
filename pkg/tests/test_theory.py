from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabsim.core import make_stream
from stabsim.theory import (
    Theorem1Inputs,
    p0_closed_form,
    p0_minus_uniform,
    p0_monte_carlo,
    standard_error,
    theorem1_threshold,
    theorem_check,
)


def test_closed_form_hand_values():
    assert p0_closed_form(Theorem1Inputs(10, 2, 4, Fraction(1, 2))) == Fraction(5, 32)
    # (1940 * 7/10 + 40) / (60 * 1980)
    assert p0_closed_form(Theorem1Inputs(2000, 20, 60, Fraction(7, 10))) == Fraction(1398, 118800)
    assert p0_closed_form(Theorem1Inputs(2000, 20, 60, 0.7)) == pytest.approx(1398 / 118800, rel=1e-14)


def test_closed_form_extremes():
    # p = 1: uniform over S_0 averaged over S_0 -> 1/n_m
    assert p0_closed_form(Theorem1Inputs(10, 2, 4, Fraction(1))) == Fraction(1, 4)
    # p = 0: never from S_0; a useful feature outside S_0 w.p. (n_m-n_t)/n_m, then 1/(n_f-n_t)
    assert p0_closed_form(Theorem1Inputs(10, 2, 4, Fraction(0))) == Fraction(2, 4) * Fraction(1, 8)


def test_boundary_is_exactly_uniform():
    for n_f, n_t, n_m in [(10, 2, 4), (2000, 20, 60), (4026, 40, 150), (7, 3, 5)]:
        inp = Theorem1Inputs(n_f, n_t, n_m, Fraction(n_t, n_f))
        assert p0_closed_form(inp) == Fraction(1, n_f)
        assert p0_minus_uniform(inp) == 0


def test_n_f_equals_n_t_rejected():
    with pytest.raises(ValueError):
        p0_closed_form(Theorem1Inputs(5, 5, 5, 0.5))


@pytest.mark.parametrize("args", [(10, 0, 4, 0.5), (10, 5, 4, 0.5), (10, 2, 11, 0.5), (10, 2, 4, 1.1)])
def test_inputs_validation(args):
    with pytest.raises(ValueError):
        Theorem1Inputs(*args)


inputs_st = st.integers(2, 3000).flatmap(
    lambda n_f: st.integers(1, n_f - 1).flatmap(
        lambda n_t: st.tuples(
            st.just(n_f), st.just(n_t), st.integers(n_t, n_f), st.fractions(0, 1, max_denominator=1000)
        )
    )
)


@given(inputs_st)
@settings(max_examples=300, deadline=None)
def test_factored_difference_matches_closed_form(args):
    inp = Theorem1Inputs(*args)
    assert p0_closed_form(inp) - Fraction(1, inp.n_f) == p0_minus_uniform(inp)


@given(inputs_st)
@settings(max_examples=300, deadline=None)
def test_direction_follows_threshold(args):
    n_f, n_t, n_m, p = args
    d = p0_minus_uniform(Theorem1Inputs(n_f, n_t, n_m, p))
    if n_m == n_f:
        assert d == 0
    elif p > Fraction(n_t, n_f):
        assert d > 0
    elif p < Fraction(n_t, n_f):
        assert d < 0
    else:
        assert d == 0


@given(inputs_st)
@settings(max_examples=200, deadline=None)
def test_closed_form_is_probability_and_monotone(args):
    n_f, n_t, n_m, p = args
    v = p0_closed_form(Theorem1Inputs(n_f, n_t, n_m, p))
    assert 0 <= v <= 1
    assert p0_closed_form(Theorem1Inputs(n_f, n_t, n_m, Fraction(1))) >= v


def test_threshold():
    assert theorem1_threshold(2000, 20) == 0.01
    with pytest.raises(ValueError):
        theorem1_threshold(0, 1)


def test_monte_carlo_small_case():
    inp = Theorem1Inputs(10, 2, 4, 0.5)
    trials = 200_000
    mc = p0_monte_carlo(inp, trials, make_stream(0, 0))
    assert abs(mc - 5 / 32) <= 4 * standard_error(5 / 32, trials)


def test_monte_carlo_chunking_is_part_of_stream_layout():
    inp = Theorem1Inputs(10, 2, 4, 0.5)
    a = p0_monte_carlo(inp, 10_000, make_stream(1, 0), chunk=1000)
    b = p0_monte_carlo(inp, 10_000, make_stream(1, 0), chunk=1000)
    assert a == b


def test_monte_carlo_any_useful_target():
    inp = Theorem1Inputs(20, 3, 6, 0.8)
    exp = float(p0_closed_form(inp))
    for target in (0, 5):
        mc = p0_monte_carlo(inp, 100_000, make_stream(2, target), target=target)
        assert abs(mc - exp) <= 4 * standard_error(exp, 100_000)
    with pytest.raises(ValueError):
        p0_monte_carlo(inp, 10, make_stream(0, 0), target=6)
    with pytest.raises(ValueError):
        p0_monte_carlo(inp, 0, make_stream(0, 0))


def test_monte_carlo_full_pool_edge():
    # n_t == n_m: S_0 is the whole pool, heads gives 1/n_m
    inp = Theorem1Inputs(6, 3, 3, 1.0)
    assert p0_monte_carlo(inp, 3000, make_stream(0, 0)) == pytest.approx(1 / 3, abs=0.05)


def test_theorem_check_report():
    r = theorem_check(Theorem1Inputs(2000, 20, 60, 0.7), 50_000, make_stream(0, 0))
    assert r["verdict"] == "above"
    assert r["mc_within_4se"] and r["sign_consistent"]
    assert r["p1_uniform"] == 1 / 2000
    below = theorem_check(Theorem1Inputs(2000, 20, 60, 0.005), 20_000, make_stream(0, 0))
    assert below["verdict"] == "below" and below["sign_consistent"]
    full = theorem_check(Theorem1Inputs(10, 2, 10, 0.5), 20_000, make_stream(0, 0))
    assert full["sign_consistent"]

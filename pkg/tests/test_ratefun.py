from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tauberkit.errors import DegenerateRateError, RateSemanticError, RateSyntaxError, UnboundedSearchError
from tauberkit.ratefun import (
    compose_mk,
    condition_13_check,
    exp_growth_check,
    parse_rate,
    predicted_rate,
    regular_growth_check,
    right_inverse,
    sample_monotone,
)

LOG6 = math.log(6.0)

atoms = st.sampled_from(["const", "poly", "logpow", "exp"]).flatmap(
    lambda a: st.floats(0.1, 3.0).map(lambda v: f"{a}:{v:.3g}")
)
dsl = st.recursive(
    atoms,
    lambda inner: st.tuples(st.sampled_from(["sum", "prod"]), inner, inner).map(
        lambda t: f"{t[0]}({t[1]},{t[2]})"
    ),
    max_leaves=4,
)


# parsing and evaluation


def test_const_is_constant():
    f = parse_rate("const:1")
    assert np.all(f.eval(np.array([0.0, 1.0, 1e6])) == 1.0)
    assert not f.strictly_increasing


def test_poly_at_five():
    assert parse_rate("poly:2").eval(5.0) == 36.0


def test_prod_at_zero():
    assert parse_rate("prod(poly:1,exp:0.5)").eval(0.0) == 1.0


def test_logpow_and_exp_closed_forms():
    assert parse_rate("logpow:2").eval(3.0) == pytest.approx(math.log(math.e + 3.0) ** 2, rel=1e-14)
    assert parse_rate("exp:0.5").eval(4.0) == pytest.approx(math.exp(2.0), rel=1e-14)
    assert parse_rate(" sum( const:2 , poly:1 ) ").eval(1.0) == pytest.approx(4.0)


def test_strictness_is_structural():
    assert parse_rate("sum(const:1,poly:0.5)").strictly_increasing
    assert parse_rate("prod(const:3,logpow:1)").strictly_increasing
    assert not parse_rate("prod(const:3,const:2)").strictly_increasing


@pytest.mark.parametrize(
    "text, pos",
    [("poly", 4), ("poly:", 5), ("foo:1", 0), ("sum(poly:1 poly:2)", 11), ("poly:1)", 6), ("", 0)],
)
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(RateSyntaxError) as info:
        parse_rate(text)
    assert info.value.position == pos


@pytest.mark.parametrize("text", ["poly:-1", "exp:0", "const:-2.5", "sum(poly:1,logpow:0)"])
def test_nonpositive_parameters_rejected(text):
    with pytest.raises(RateSemanticError):
        parse_rate(text)


def test_eval_log_survives_overflow():
    f = parse_rate("prod(exp:500,exp:500)")
    assert f.eval_log(10.0) == pytest.approx(10000.0, rel=1e-14)
    assert math.isinf(f.eval(10.0))


@given(dsl, st.floats(0.0, 1e3), st.floats(0.0, 1e3))
@settings(max_examples=200, deadline=None)
def test_monotone_and_positive(src, a, b):
    f = parse_rate(src)
    lo, hi = min(a, b), max(a, b)
    assert f.eval(lo) > 0
    assert f.eval_log(lo) <= f.eval_log(hi) + 1e-12 * (1 + abs(f.eval_log(hi)))


@given(dsl, st.floats(0.0, 50.0))
@settings(max_examples=200, deadline=None)
def test_log_consistency(src, s):
    f = parse_rate(src)
    v, lv = f.eval(s), f.eval_log(s)
    if 0 < v < math.inf:
        assert abs(lv - math.log(v)) <= 1e-10 * (1 + abs(lv))


def test_sample_monotone_grid():
    assert sample_monotone(parse_rate("sum(poly:2,logpow:3)"), np.linspace(0, 100, 1001))


# composite rate


def test_compose_const_at_zero():
    assert compose_mk("const:1", "const:1").eval(0.0) == pytest.approx(math.log(2.0), rel=1e-15)


def test_compose_poly_at_one():
    assert compose_mk("poly:1", "poly:1").eval(1.0) == pytest.approx(2 * LOG6, rel=1e-15)


def test_compose_poly2_at_ten_against_mpmath():
    mpmath.mp.dps = 40
    oracle = mpmath.mpf(11) ** 2 * (mpmath.log(11) + mpmath.log(1 + mpmath.mpf(121)))
    assert compose_mk("poly:2", "poly:2").eval(10.0) == pytest.approx(float(oracle), rel=1e-14)


def test_compose_log_domain_when_factor_overflows():
    mk = compose_mk("exp:800", "exp:800")
    # log(1 + K(2)) = 1600 to double precision, so log M_K(2) = 1600 + log(log 3 + 1600)
    assert mk.eval_log(2.0) == pytest.approx(1600.0 + math.log(math.log(3.0) + 1600.0), rel=1e-13)


@given(dsl, dsl, st.floats(0.0, 1e4), st.floats(0.0, 1e4))
@settings(max_examples=100, deadline=None)
def test_compose_monotone(m_src, k_src, a, b):
    mk = compose_mk(m_src, k_src)
    lo, hi = min(a, b), max(a, b)
    assert mk.eval_log(lo) <= mk.eval_log(hi) + 1e-12 * (1 + abs(mk.eval_log(hi)))


# inversion


def test_right_inverse_poly():
    assert right_inverse("poly:1", 101.0) == pytest.approx(100.0, rel=1e-12)


def test_right_inverse_below_range():
    assert right_inverse("const:5", 3.0) == 0.0


def test_right_inverse_round_trip():
    assert right_inverse(compose_mk("poly:1", "poly:1"), 2 * LOG6) == pytest.approx(1.0, abs=1e-9)


def test_right_inverse_bounded_function():
    with pytest.raises(UnboundedSearchError):
        right_inverse("const:5", 6.0)


def test_right_inverse_huge_target():
    s = right_inverse("exp:1", 1e300)
    assert s == pytest.approx(300 * math.log(10), rel=1e-11)


@given(dsl, st.floats(-5.0, 250.0))
@settings(max_examples=200, deadline=None)
def test_right_inverse_contract(src, log10_gap):
    f = parse_rate(src)
    assume(f.strictly_increasing)
    t = f.eval(0.0) * 10.0 ** max(log10_gap, 1e-3)
    assume(math.isfinite(t))
    try:
        s = right_inverse(f, t)
    except UnboundedSearchError:
        # slow growers (logpow) can stay below t up to the search ceiling
        assume(False)
    assert t <= f.eval(s) <= t * (1 + 1e-9) or f.eval_log(s) - math.log(t) <= 1e-9
    assert f.eval(s * (1 - 1e-9)) < t


# predictor


def test_predicted_rate_worked_case():
    assert predicted_rate("poly:1", "poly:1", 1.0, 2 * LOG6) == pytest.approx(1.0, rel=1e-9)


def test_predicted_rate_poly2_against_asymptotic():
    inv = 1.0 / predicted_rate("poly:2", "poly:2", 1.0, 1e8)
    mk = compose_mk("poly:2", "poly:2")
    assert mk.eval(inv) == pytest.approx(1e8, rel=1e-9)
    asymptotic = (2 * 1e8 / (3 * math.log(1e8))) ** 0.5
    assert abs(inv / asymptotic - 1) <= 0.15


def test_predicted_rate_degenerate():
    with pytest.raises(DegenerateRateError):
        predicted_rate("poly:1", "poly:1", 1.0, 0.1)


def test_predicted_rate_rejects_bad_c():
    with pytest.raises(ValueError):
        predicted_rate("poly:1", "poly:1", 1.5, 10.0)


@given(st.floats(2.0, 1e6), st.floats(2.0, 1e6))
@settings(max_examples=100, deadline=None)
def test_predictor_non_increasing(t1, t2):
    lo, hi = sorted((t1, t2))
    assert predicted_rate("poly:1", "logpow:2", 0.5, hi) <= predicted_rate("poly:1", "logpow:2", 0.5, lo) * (1 + 1e-11)


# growth conditions


def test_regular_growth_const():
    rep = regular_growth_check("const:1", 0.5, np.linspace(0, 10, 11))
    assert rep.passed and rep.extremum == pytest.approx(0.5)


def test_regular_growth_exp_small_c():
    rep = regular_growth_check("exp:1", 0.2, np.linspace(0, 10, 101))
    assert rep.passed
    assert rep.extremum == pytest.approx(0.2 * math.exp(0.2), rel=1e-12)


def test_regular_growth_exp_large_c():
    rep = regular_growth_check("exp:1", 0.99, np.linspace(0, 10, 101))
    assert not rep.passed
    assert rep.extremum == pytest.approx(0.99 * math.exp(0.99), rel=1e-12)
    assert "s=0" in rep.notes[0]


def test_condition_13_polynomial_passes():
    rep = condition_13_check("poly:2", "poly:2", 0.5, np.geomspace(10, 1e6, 61))
    assert rep.passed


def test_condition_13_exponential_fails():
    rep = condition_13_check("const:1", "exp:1", 0.5, np.linspace(10, 100, 91))
    assert not rep.passed


def test_condition_13_skips_small_k():
    rep = condition_13_check("poly:1", "const:1", 0.5, np.linspace(1, 10, 10))
    assert rep.passed and math.isnan(rep.extremum)
    assert any("0 compared points" in n for n in rep.notes)


def test_exp_growth_examples():
    grid = np.linspace(0, 200, 201)
    assert exp_growth_check("poly:3", 1.0, grid).passed
    assert not exp_growth_check("exp:2", 1.0, grid).passed
    rep = exp_growth_check("exp:1", 1.0, grid)
    assert rep.passed and rep.extremum == pytest.approx(0.0, abs=1e-12)


def test_report_json_shape():
    rep = regular_growth_check("const:1", 0.5, np.linspace(0, 1, 3))
    d = rep.to_dict()
    assert set(d) >= {"property_id", "params", "grid", "extremum", "tolerance", "pass"}
    assert d["grid"]["s"] == {"min": 0.0, "max": 1.0, "count": 3, "spacing": "linear"}

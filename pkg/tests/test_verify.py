from __future__ import annotations

import json
import math

import numpy as np
import pytest

from tauberkit import construction as con
from tauberkit.errors import ConstraintViolation, ParameterError, StripExceedsDomainError
from tauberkit.report import GridSpec, VerificationReport
from tauberkit.verify import (
    VerifyConfig,
    bundle_json,
    q_strip_max,
    strip_sup,
    vanishing_order,
    vanishing_slope,
    verify_1a,
    verify_1b,
    verify_2a,
    verify_2b,
    verify_all,
    verify_c_m,
    verify_q_strip,
    verify_thm23_witness,
    witness_terms,
)


@pytest.fixture(scope="module")
def bundle():
    return verify_all(VerifyConfig())


def test_1a_single_m_trivial():
    rep = verify_1a([2])
    assert rep.passed and rep.extremum == 1.0


def test_1a_records_tail_contribution():
    rep = verify_1a([2, 4])
    c2 = rep.params["norms"]["2"]["C_m"]
    assert any(f"{c2 / 2501:.6g}" in n for n in rep.notes)


def test_1a_rejects_short_window():
    with pytest.raises(ParameterError):
        verify_1a([2], t_max=20)


def test_1a_norm_values():
    norms = verify_1a([2, 4, 6, 8]).params["norms"]
    assert norms["2"]["f_inf"] == pytest.approx(118371.27068, rel=1e-9)
    for m in ("2", "4", "6", "8"):
        assert norms[m]["f_inf"] <= norms[m]["f_1"]
        assert all(math.isfinite(v) for v in norms[m].values())


def test_1b_positive():
    rep = verify_1b([2])
    assert rep.passed and rep.params["f0"]["2"] > 0


def test_1b_monotone_note():
    rep = verify_1b([2, 4, 6, 8])
    assert rep.passed and "L_m strictly increasing in m" in rep.notes


def test_1b_empty():
    with pytest.raises(ParameterError):
        verify_1b([])


def test_2a_slope_matches_exact_order():
    # the transform also picks up m powers of lambda from G_m, so the order is m (2**m + 1)
    assert vanishing_order(2) == 10 and vanishing_order(4) == 68
    assert vanishing_slope(2) == pytest.approx(10, rel=1e-2)
    assert vanishing_slope(4) == pytest.approx(68, rel=1e-2)
    rep = verify_2a([2, 4])
    assert rep.passed and rep.params["slope"]["2"] >= con.k_of(2)


def test_2a_even_in_lambda():
    lam = np.geomspace(1e-3, 0.3, 25)
    assert np.array_equal(con.log_transform(4, lam).real, con.log_transform(4, -lam).real)


def test_2a_radius_limit():
    with pytest.raises(ParameterError):
        verify_2a([2], radius=0.4)


def test_2b_passes_on_growth_ratio():
    rep = verify_2b([2, 4, 6, 8])
    assert rep.passed
    assert all(math.isfinite(v) for v in rep.params["sup"].values())


def test_2b_rejects_wide_strip():
    with pytest.raises(StripExceedsDomainError):
        verify_2b([2], c=0.5)


def test_2b_zero_at_25i():
    assert con.transform_eval(4, 25j).is_zero


def test_2b_monotone_refinement():
    coarse, _, _ = strip_sup(4, 1.0, n_re=9, n_im=513)
    fine, re_grid, im_grid = strip_sup(4, 1.0, n_re=17, n_im=1025)
    assert re_grid == GridSpec(0.0, re_grid.max, 17, "linear")
    assert fine >= coarse


def test_2b_replays_from_grid_spec():
    rep = verify_2b([4], n_re=9, n_im=257)
    lam = rep.grid["re_m4"].points_array()[:, None] + 1j * rep.grid["im"].points_array()[None, :]
    with np.errstate(divide="ignore"):
        vals = np.log(np.abs(lam)) + con.log_transform(4, lam).real
    assert float(np.exp(np.max(vals))) == rep.params["sup"]["4"]


def test_q_strip_threshold_and_expected_failure():
    rep = verify_q_strip([2, 4, 6, 8])
    assert rep.passed and rep.params["m_star"] == 4
    assert any("m=2" in n and "expected" in n for n in rep.notes)


def test_q_strip_small_m_only_is_expected_failure():
    rep = verify_q_strip([2])
    assert not rep.passed and rep.expected_failure and not rep.counts_as_failure


def test_q_strip_real_axis_below_one():
    strip, disc, grids = q_strip_max(6, re_max=1e3)
    assert strip <= 1 + 1e-12 and disc < 1
    assert grids["im"].max == pytest.approx(1 / 12)


def test_c_m_report():
    rep = verify_c_m([8, 10])
    assert rep.passed and "window_m8" in rep.grid


def test_witness_passes_with_bound_combination():
    rep = verify_thm23_witness("poly:1", "poly:1", 0.05, 0.1, [10, 100, 1000])
    assert rep.passed and rep.extremum < 1.1


def test_witness_eps_constraint():
    with pytest.raises(ConstraintViolation) as info:
        witness_terms("poly:1", "poly:1", 0.4, 0.1, 10.0)
    assert "1/6" in info.value.inequality or "exp" in info.value.inequality


def test_witness_exp_constraint():
    with pytest.raises(ConstraintViolation) as info:
        witness_terms("const:0.5", "poly:1", 0.1, 0.1, 10.0)
    assert "exp(-1/M(0))" in info.value.inequality


def test_witness_t2_collapse():
    w = witness_terms("poly:1", "poly:1", 0.05, 0.1, 100.0)
    assert w.log_t2 == pytest.approx(math.log(w.R) + 100.0 + 100 * math.log(0.1), rel=1e-12)
    assert w.log_t2 < -120


def test_witness_t2_non_increasing_in_k():
    # at fixed R and t the T2 term carries (2 eps)^k with 2 eps < 1
    eps = 0.05
    terms = [k * math.log(2 * eps) for k in range(1, 50)]
    assert all(a >= b for a, b in zip(terms[:-1], terms[1:]))


def test_verify_all_default(bundle):
    ids = [r.property_id for r in bundle]
    assert ids == ["1a", "1b", "2a", "2b", "q-strip", "c_m-uniform", "thm23-witness",
                   "reg-growth", "cond-1.3", "exp-growth"]
    assert all(r.passed for r in bundle)


def test_verify_all_empty_config():
    with pytest.raises(ParameterError):
        verify_all({})


def test_verify_all_unknown_key():
    with pytest.raises(ParameterError):
        verify_all({"m_list": [2], "colour": "red"})


def test_verify_all_collects_errors():
    reps = verify_all({"m_list": [2], "strip_c": 0.5})
    two_b = next(r for r in reps if r.property_id == "2b")
    assert not two_b.passed and "StripExceedsDomainError" in two_b.notes[0]
    assert len(reps) == 10


def test_bundle_deterministic(bundle):
    again = verify_all(VerifyConfig())
    assert bundle_json(bundle, VerifyConfig(), timestamp=False) == bundle_json(again, VerifyConfig(), timestamp=False)


def test_bundle_round_trip(bundle):
    data = json.loads(bundle_json(bundle))
    assert "timestamp" in data and data["pass"] is True
    back = [VerificationReport.from_dict(d) for d in data["reports"]]
    assert [b.to_dict() for b in back] == [r.to_dict() for r in bundle]


def test_grid_refinement_is_nested():
    for g in (GridSpec(0, 10, 11), GridSpec(1e-3, 1, 9, "log"), GridSpec(0, 1e3, 21, "asinh", 1.0)):
        fine = g.refined().points_array()
        assert np.allclose(fine[::2], g.points_array(), rtol=1e-14, atol=0)

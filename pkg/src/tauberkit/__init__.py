"""Decay rates from rate functions, and numerics for an extremal sequence of test functions."""

from __future__ import annotations

from .construction import (
    c_m_estimate,
    f_factor_eval,
    g_eval,
    h_eval,
    k_of,
    phi_eval,
    q_eval,
    transform_eval,
)
from .errors import TauberkitError
from .logcomplex import LogComplex
from .quadrature import QuadratureResult, f_deriv_eval, f_eval, f_eval_fft, scale_sequence, tail_mass
from .ratefun import (
    RateFunction,
    compose_mk,
    condition_13_check,
    exp_growth_check,
    parse_rate,
    predicted_rate,
    regular_growth_check,
    right_inverse,
)
from .regions import RegionSpec, region_contains
from .report import GridSpec, VerificationReport
from .verify import (
    VerifyConfig,
    verify_1a,
    verify_1b,
    verify_2a,
    verify_2b,
    verify_all,
    verify_c_m,
    verify_q_strip,
    verify_thm23_witness,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "LogComplex",
    "QuadratureResult",
    "RateFunction",
    "RegionSpec",
    "TauberkitError",
    "VerificationReport",
    "VerifyConfig",
    "c_m_estimate",
    "compose_mk",
    "condition_13_check",
    "exp_growth_check",
    "f_deriv_eval",
    "f_eval",
    "f_eval_fft",
    "f_factor_eval",
    "g_eval",
    "h_eval",
    "k_of",
    "parse_rate",
    "phi_eval",
    "predicted_rate",
    "q_eval",
    "region_contains",
    "regular_growth_check",
    "right_inverse",
    "scale_sequence",
    "tail_mass",
    "transform_eval",
    "verify_1a",
    "verify_1b",
    "verify_2a",
    "verify_2b",
    "verify_all",
    "verify_c_m",
    "verify_q_strip",
    "verify_thm23_witness",
]

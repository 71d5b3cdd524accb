"""Monotone rate functions: the DSL, evaluation, M_K composition and inversion.

Rate functions are positive non-decreasing maps on ``[0, inf)``.  They are
written in a tiny expression language::

    expr := atom | "sum(" expr "," expr ")" | "prod(" expr "," expr ")"
    atom := "const:" v | "poly:" a | "logpow:" b | "exp:" a

with ``const:v -> v``, ``poly:a -> (1+s)**a``, ``logpow:b -> log(e+s)**b`` and
``exp:a -> exp(a*s)``.  Every function can be evaluated directly and in the
log domain; the log domain is what keeps ``exp:1`` at ``s = 1e3`` usable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateRateError,
    RateSemanticError,
    RateSyntaxError,
    UnboundedSearchError,
)
from .report import GridSpec, VerificationReport, as_grid

BISECTION_RTOL = 1e-12
SEARCH_CEILING = 1e300
MONOTONE_SLACK = 1e-12


# --------------------------------------------------------------------------
# expression tree


class _Node:
    strict: bool

    def log(self, s):
        raise NotImplementedError

    def value(self, s):
        raise NotImplementedError


@dataclass(frozen=True)
class _Const(_Node):
    v: float
    strict = False

    def log(self, s):
        return np.full_like(s, math.log(self.v))

    def value(self, s):
        return np.full_like(s, self.v)


@dataclass(frozen=True)
class _Poly(_Node):
    a: float
    strict = True

    def log(self, s):
        return self.a * np.log1p(s)

    def value(self, s):
        return (1.0 + s) ** self.a


@dataclass(frozen=True)
class _LogPow(_Node):
    b: float
    strict = True

    def log(self, s):
        return self.b * np.log(np.log(math.e + s))

    def value(self, s):
        return np.log(math.e + s) ** self.b


@dataclass(frozen=True)
class _Exp(_Node):
    a: float
    strict = True

    def log(self, s):
        return self.a * s

    def value(self, s):
        return np.exp(self.a * s)


@dataclass(frozen=True)
class _Sum(_Node):
    left: _Node
    right: _Node

    @property
    def strict(self):
        return self.left.strict or self.right.strict

    def log(self, s):
        return np.logaddexp(self.left.log(s), self.right.log(s))

    def value(self, s):
        return self.left.value(s) + self.right.value(s)


@dataclass(frozen=True)
class _Prod(_Node):
    left: _Node
    right: _Node

    @property
    def strict(self):
        return self.left.strict or self.right.strict

    def log(self, s):
        return self.left.log(s) + self.right.log(s)

    def value(self, s):
        return self.left.value(s) * self.right.value(s)


@dataclass(frozen=True)
class _Composite(_Node):
    """M(s) * (log(1+s) + log(1+K(s)))."""

    m: _Node
    k: _Node
    strict = True

    def _bracket(self, s):
        # log(1 + K) as softplus of log K: exact for huge K
        return np.log1p(s) + np.logaddexp(0.0, self.k.log(s))

    def log(self, s):
        with np.errstate(divide="ignore"):
            return self.m.log(s) + np.log(self._bracket(s))

    def value(self, s):
        return self.m.value(s) * self._bracket(s)


# --------------------------------------------------------------------------
# parser

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_ATOMS = {"const": _Const, "poly": _Poly, "logpow": _LogPow, "exp": _Exp}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str):
        raise RateSyntaxError(message, self.pos, self.text)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            self.fail(f"expected {token!r}")
        self.pos += len(token)

    def parse(self) -> _Node:
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.fail("unexpected trailing input")
        return node

    def expr(self) -> _Node:
        self.skip_ws()
        match = re.compile(r"[a-z]+").match(self.text, self.pos)
        if match is None:
            self.fail("expected a rate expression")
        word = match.group(0)
        if word in ("sum", "prod"):
            self.pos = match.end()
            self.expect("(")
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect(")")
            return _Sum(left, right) if word == "sum" else _Prod(left, right)
        if word not in _ATOMS:
            self.fail(f"unknown atom {word!r}")
        self.pos = match.end()
        self.expect(":")
        self.skip_ws()
        start = self.pos
        num = _NUMBER.match(self.text, self.pos)
        if num is None:
            self.fail("expected a number")
        self.pos = num.end()
        value = float(num.group(0))
        if not math.isfinite(value) or value <= 0:
            raise RateSemanticError(
                f"parameter of {word!r} must be a positive real, got {num.group(0)!r} (position {start})"
            )
        return _ATOMS[word](value)


# --------------------------------------------------------------------------
# public type


@dataclass(frozen=True)
class RateFunction:
    """A positive, non-decreasing, continuous function on ``[0, inf)``.

    Immutable and safe to share between threads.  ``eval`` and ``eval_log``
    accept scalars or numpy arrays.
    """

    source: str
    node: _Node = field(repr=False, compare=False)

    @property
    def strictly_increasing(self) -> bool:
        return self.node.strict

    def eval_log(self, s):
        arr = np.asarray(s, dtype=float)
        out = self.node.log(arr)
        return float(out) if out.ndim == 0 else out

    def eval(self, s):
        """Direct evaluation; falls back to ``exp(eval_log)`` where it overflows."""
        arr = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.node.value(arr)
            bad = ~np.isfinite(out)
            if np.any(bad):
                out = np.where(bad, np.exp(self.node.log(arr)), out)
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def __str__(self):
        return self.source


def parse_rate(dsl: str) -> RateFunction:
    """Parse a rate DSL string.

    >>> parse_rate("poly:2").eval(5.0)
    36.0
    """
    if not isinstance(dsl, str):
        raise TypeError("rate expression must be a string")
    return RateFunction(dsl.strip(), _Parser(dsl).parse())


def as_rate(f: RateFunction | str) -> RateFunction:
    return f if isinstance(f, RateFunction) else parse_rate(f)


def compose_mk(M: RateFunction | str, K: RateFunction | str) -> RateFunction:
    """The composite rate ``M(s) * (log(1+s) + log(1+K(s)))``."""
    M, K = as_rate(M), as_rate(K)
    return RateFunction(f"mk({M.source},{K.source})", _Composite(M.node, K.node))


# --------------------------------------------------------------------------
# inversion


def _reaches(f: RateFunction, s: float, t: float, log_t: float) -> bool:
    value = f.eval(s)
    if math.isfinite(value) and value > 0 and math.isfinite(t):
        return value >= t
    return f.eval_log(s) >= log_t


def right_inverse(f: RateFunction | str, t: float, ceiling: float = SEARCH_CEILING) -> float:
    """Smallest ``s >= 0`` with ``f(s) >= t``.

    Geometric bracket expansion from ``s = 1`` followed by bisection down to
    relative bracket width ``1e-12``.  Returns 0 when ``t <= f(0)``.
    """
    f = as_rate(f)
    if not t > 0:
        raise ValueError("t must be positive")
    log_t = math.log(t)
    if _reaches(f, 0.0, t, log_t):
        return 0.0
    lo, hi = 0.0, 1.0
    while not _reaches(f, hi, t, log_t):
        if hi >= ceiling:
            raise UnboundedSearchError(
                f"{f.source} stays below {t!r} up to s={ceiling:g}; the function looks bounded"
            )
        lo, hi = hi, min(hi * 2.0, ceiling)
    for _ in range(4000):
        if hi - lo <= BISECTION_RTOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _reaches(f, mid, t, log_t):
            hi = mid
        else:
            lo = mid
    return hi


def predicted_rate(M: RateFunction | str, K: RateFunction | str, c: float, t: float) -> float:
    """``1 / M_K^{-1}(c t)``, the decay rate bound for ``||T(t) A^{-1}||``."""
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    mk = compose_mk(M, K)
    ct = c * t
    if ct <= mk.eval(0.0):
        raise DegenerateRateError(
            f"c*t = {ct:.6g} does not exceed M_K(0) = {mk.eval(0.0):.6g}; M_K^-1(ct) = 0"
        )
    return 1.0 / right_inverse(mk, ct)


# --------------------------------------------------------------------------
# growth conditions


def _rate_params(**kw):
    return {k: (v.source if isinstance(v, RateFunction) else v) for k, v in kw.items()}


def regular_growth_check(M: RateFunction | str, c: float, s_grid) -> VerificationReport:
    """Check ``M(s) >= c * M(s + c/M(s))`` on a grid (relative slack 1e-10)."""
    M = as_rate(M)
    grid = as_grid(s_grid)
    s = grid.points_array()
    if s.size == 0 or np.any(s < 0):
        raise ValueError("grid must be nonempty and nonnegative")
    log_m = np.asarray(M.eval_log(s))
    shifted = s + c * np.exp(-log_m)
    log_ratio = math.log(c) + np.asarray(M.eval_log(shifted)) - log_m
    ratio = np.exp(log_ratio)
    worst = int(np.argmax(ratio))
    return VerificationReport(
        property_id="reg-growth",
        params=_rate_params(M=M, c=c),
        grid={"s": grid},
        extremum=float(ratio[worst]),
        threshold=1.0 + 1e-10,
        passed=bool(ratio[worst] <= 1.0 + 1e-10),
        notes=[f"worst ratio c*M(s+c/M(s))/M(s) at s={s[worst]:.6g}"],
    )


def _bounded_above(values: np.ndarray) -> tuple[bool, float, float]:
    """Desk-scale boundedness: the upper half of the grid never exceeds the lower half's max."""
    n = values.size
    half = max(1, n // 2)
    head, tail = values[:half], values[half:]
    c_fit = float(np.max(head))
    tail_max = float(np.max(tail)) if tail.size else -math.inf
    ok = tail_max <= c_fit + 1e-10 * (1.0 + abs(c_fit))
    return ok, c_fit, tail_max


def condition_13_check(M: RateFunction | str, K: RateFunction | str, eps: float, s_grid) -> VerificationReport:
    """Compare ``log log K(s)`` with ``(1-eps) log(s M(s))``.

    Points with ``K(s) <= 1`` satisfy the doubly exponential bound trivially;
    they are skipped and counted in the notes.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    M, K = as_rate(M), as_rate(K)
    grid = as_grid(s_grid)
    s = np.sort(grid.points_array())
    log_k = np.asarray(K.eval_log(s), dtype=float)
    usable = (log_k > 0) & (s > 0)
    skipped = int(np.count_nonzero(~usable))
    notes = []
    if skipped:
        notes.append(f"skipped {skipped} point(s) where K(s) <= 1 or s <= 0 (double log undefined)")
    params = _rate_params(M=M, K=K, eps=eps)
    if not np.any(usable):
        notes.append("0 compared points")
        return VerificationReport("cond-1.3", params, {"s": grid}, math.nan, math.nan, True, notes)
    su = s[usable]
    diff = np.log(log_k[usable]) - (1 - eps) * (np.log(su) + np.asarray(M.eval_log(su)))
    ok, c_fit, tail_max = _bounded_above(diff)
    notes.append(f"compared {su.size} points; fitted constant {c_fit:.6g}, upper-half max {tail_max:.6g}")
    return VerificationReport("cond-1.3", params, {"s": grid}, float(np.max(diff)), c_fit, ok, notes)


def exp_growth_check(f: RateFunction | str, alpha: float, s_grid) -> VerificationReport:
    """Check ``f(s) = O(exp(alpha s))``: ``log f(s) - alpha s`` bounded above on the grid."""
    f = as_rate(f)
    grid = as_grid(s_grid)
    s = np.sort(grid.points_array())
    gap = np.asarray(f.eval_log(s), dtype=float) - alpha * s
    ok, c_fit, tail_max = _bounded_above(gap)
    return VerificationReport(
        "exp-growth",
        _rate_params(f=f, alpha=alpha),
        {"s": grid},
        float(np.max(gap)),
        c_fit,
        ok,
        [f"log-gap supremum {float(np.max(gap)):.6g}; upper-half max {tail_max:.6g}"],
    )


def sample_monotone(f: RateFunction, s: Sequence[float]) -> bool:
    """Grid check of the non-decreasing invariant with slack 1e-12."""
    vals = np.asarray(f.eval(np.sort(np.asarray(s, dtype=float))))
    return bool(np.all(vals[:-1] <= vals[1:] * (1 + MONOTONE_SLACK)))

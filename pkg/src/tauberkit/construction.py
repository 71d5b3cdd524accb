"""The extremal sequence f_m: its Fourier-side factors and the constant C_m.

For even ``m`` the transform of ``f_m`` on the imaginary axis is

    Phi_m(s) = F(s) G_m(s) H_m(s) / (1 + s**4)

    F(s)   = ((s**2 - 625) / (1 + s**2))**4
    G_m(s) = s**m / (25**m + s**m)           = Q_m(s / 25)
    H_m(s) = s**(m 2**m) / (1 + s**m)**(2**m) = Q_m(s)**(2**m)
    Q_m(z) = z**m / (1 + z**m)

``H_m`` has exponent ``m 2**m`` (10240 at m = 10), so everything is computed
as complex logarithms.  Each ``log_*`` function is vectorised and returns
``log|value| + i arg(value)``; the ``*_eval`` wrappers return
:class:`LogComplex` scalars and raise :class:`PoleError` near poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DerivativeCheckError, OutOfStripError, ParameterError, PoleError
from .logcomplex import LogComplex, clog, clog1p, cscale, wrap_phase
from .report import GridSpec

POLE_GUARD = 1e-8
LOG25 = math.log(25.0)
QUARTIC_HALF_WIDTH = math.sin(math.pi / 4)


@dataclass(frozen=True)
class ConstructionIndex:
    """Pairs a sequence index ``k`` with the even ``m`` whose ``k_m = m 2**m`` covers it."""

    k: int
    m: int
    k_m: int


def k_of(m: int) -> int:
    m = _check_m(m)
    return m * 2**m


def index_for(k: int) -> ConstructionIndex:
    """Smallest even ``m >= 2`` with ``k <= m 2**m``."""
    if int(k) != k or k < 1:
        raise ParameterError("k must be a positive integer")
    m = 2
    while k_of(m) < k:
        m += 2
    return ConstructionIndex(int(k), m, k_of(m))


def five_k_bound_holds(k: int) -> bool:
    """Whether ``k_m <= 5k`` for ``m = m(k)``.

    Since ``k_m / k_(m-2) = 4m / (m-2)``, the bound is automatic once
    ``m >= 10`` (``k > 2048``); below that it fails for ``k`` in
    ``[65, 76]`` and ``[385, 409]``.
    """
    idx = index_for(k)
    return idx.k_m <= 5 * idx.k


def _check_m(m: int) -> int:
    if int(m) != m or m < 2 or m % 2:
        raise ParameterError(f"m must be an even integer >= 2, got {m!r}")
    return int(m)


# --------------------------------------------------------------------------
# pole bookkeeping


def ring_distance(z, radius: float, n: int):
    """Distance from ``z`` to the nearest root of ``w**n = -radius**n``."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    theta = np.angle(z)
    j = np.round((theta * n / math.pi - 1.0) / 2.0)
    delta = wrap_phase(theta - math.pi * (2 * j + 1) / n)
    d2 = r * r + radius * radius - 2 * r * radius * np.cos(delta)
    return np.sqrt(np.maximum(d2, 0.0))


def _guard(name: str, z, dist):
    dist = np.asarray(dist)
    if np.any(dist < POLE_GUARD):
        idx = np.unravel_index(int(np.argmin(dist)), dist.shape) if dist.ndim else ()
        zz = np.asarray(z, dtype=complex)
        raise PoleError(name, complex(zz[idx]) if zz.ndim else complex(zz), float(np.min(dist)))


def _f_pole_distance(z):
    z = np.asarray(z, dtype=complex)
    return np.minimum(np.abs(z - 1j), np.abs(z + 1j))


# --------------------------------------------------------------------------
# vectorised log-domain factors


def log_f_factor(lam, check: bool = True):
    """``log F(lam)``; ``-inf`` real part at ``lam = +-25``."""
    z = np.asarray(lam, dtype=complex)
    if check:
        _guard("F (poles at +-i)", z, _f_pole_distance(z))
    z2 = z * z
    with np.errstate(invalid="ignore"):
        out = cscale(4.0, clog(z2 - 625.0) - clog1p(z2))
    return np.where(np.isneginf(out.real), complex(-math.inf, 0.0), out)


def log_q(m: int, lam, check: bool = True):
    """``log Q_m(lam)`` with the ``|lam| > 1`` rewrite ``-log(1 + lam**-m)``."""
    m = _check_m(m)
    z = np.asarray(lam, dtype=complex)
    if check:
        _guard(f"Q_{m} (zeros of 1+z^{m})", z, ring_distance(z, 1.0, m))
    lz = clog(z)
    big = np.abs(z) > 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        mlz = cscale(m, lz)
        inner = np.where(big, np.exp(-mlz), np.exp(mlz))
        out = np.where(big, -clog1p(inner), mlz - clog1p(inner))
    return out


def log_g(m: int, lam, check: bool = True):
    """``log G_m(lam) = m log lam - log(25**m + lam**m)``, without forming ``25**m``."""
    m = _check_m(m)
    z = np.asarray(lam, dtype=complex)
    if check:
        _guard(f"G_{m} (zeros of 25^{m}+z^{m})", z, ring_distance(z, 25.0, m))
    lz = clog(z)
    mlz = cscale(m, lz)
    ratio = mlz - m * LOG25  # log((z/25)**m)
    big = np.abs(z) > 25.0
    with np.errstate(over="ignore", invalid="ignore"):
        # log(25**m + z**m) as complex log-sum-exp anchored on the larger term
        denom = np.where(
            big,
            mlz + clog1p(np.exp(-ratio)),
            m * LOG25 + clog1p(np.exp(ratio)),
        )
        return mlz - denom


def log_h(m: int, lam, check: bool = True):
    """``log H_m(lam) = 2**m log Q_m(lam)``."""
    m = _check_m(m)
    return cscale(2**m, log_q(m, lam, check=check))


def log_quartic(s, check: bool = True):
    """``log(1 + s**4)``."""
    z = np.asarray(s, dtype=complex)
    if check:
        _guard("1+s^4", z, ring_distance(z, 1.0, 4))
    lz = clog(z)
    big = np.abs(z) > 1.0
    l4 = cscale(4.0, lz)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(big, l4 + clog1p(np.exp(-l4)), clog1p(np.exp(l4)))


def log_phi(m: int, s, check: bool = True):
    """``log Phi_m(s)``, the transform of ``f_m`` at ``i s``."""
    m = _check_m(m)
    s = np.asarray(s, dtype=complex)
    with np.errstate(invalid="ignore"):
        out = log_f_factor(s, check) + log_g(m, s, check) + log_h(m, s, check) - log_quartic(s, check)
    # a zero factor gives -inf; opposite infinities cannot occur away from the guarded poles
    return np.where(np.isneginf(out.real), complex(-math.inf, 0.0), out)


def phi_real(m: int, s) -> np.ndarray:
    """``Phi_m`` on the real axis as plain floats (it is real, even and nonnegative there)."""
    m = _check_m(m)
    s = np.abs(np.asarray(s, dtype=float))
    with np.errstate(divide="ignore"):
        ls = np.log(s)
        lf = 4.0 * (np.log(np.abs(s * s - 625.0)) - np.log1p(s * s))
        lg = -np.logaddexp(0.0, -m * (ls - LOG25))
        lh = -(2**m) * np.logaddexp(0.0, -m * ls)
        lq = np.logaddexp(0.0, 4.0 * ls)
    return np.exp(lf + lg + lh - lq)


def continuation_half_width(m: int) -> float:
    """Half-width of the pole-free vertical strip around the imaginary axis for the transform."""
    m = _check_m(m)
    return min(math.sin(math.pi / m), QUARTIC_HALF_WIDTH, 1.0)


def nearest_pole_family(m: int) -> str:
    hw_h = math.sin(math.pi / m)
    if abs(hw_h - QUARTIC_HALF_WIDTH) < 1e-15:
        return f"zeros of 1+s^{m} and 1+s^4"
    return f"zeros of 1+s^{m} (H_{m})" if hw_h < QUARTIC_HALF_WIDTH else "zeros of 1+s^4"


def in_continuation_domain(m: int, lam) -> np.ndarray:
    """Pole-free strip ``|Re lam| < w_m`` together with the pole-free disc ``|lam| < 1``."""
    z = np.asarray(lam, dtype=complex)
    w = continuation_half_width(m)
    return (np.abs(z.real) < w - POLE_GUARD) | (np.abs(z) < 1.0 - POLE_GUARD)


def log_transform(m: int, lam, check: bool = True):
    """``log f_m^(lam) = log Phi_m(-i lam)`` on the continuation domain."""
    m = _check_m(m)
    z = np.asarray(lam, dtype=complex)
    if check:
        ok = in_continuation_domain(m, z)
        if not np.all(ok):
            bad = complex(z[~ok].flat[0]) if z.ndim else complex(z)
            raise OutOfStripError(
                f"lambda={bad!r} lies outside |Re lambda| < {continuation_half_width(m):.6g} "
                f"(nearest poles: {nearest_pole_family(m)})"
            )
    return log_phi(m, -1j * z, check=check)


# --------------------------------------------------------------------------
# scalar API


def _scalar(value) -> LogComplex:
    return LogComplex.from_log(complex(np.asarray(value)))


def f_factor_eval(lam: complex) -> LogComplex:
    return _scalar(log_f_factor(lam))


def g_eval(m: int, lam: complex) -> LogComplex:
    return _scalar(log_g(m, lam))


def h_eval(m: int, lam: complex) -> LogComplex:
    return _scalar(log_h(m, lam))


def q_eval(m: int, lam: complex) -> LogComplex:
    return _scalar(log_q(m, lam))


def phi_eval(m: int, s: complex) -> LogComplex:
    return _scalar(log_phi(m, s))


def transform_eval(m: int, lam: complex) -> LogComplex:
    return _scalar(log_transform(m, lam))


# --------------------------------------------------------------------------
# derivatives and C_m


def f_factor_derivs(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``F, F', F''`` on the real axis, via ``F = u**4`` with ``u = 1 - 626/(1+s**2)``."""
    s = np.asarray(s, dtype=float)
    p = 1.0 + s * s
    u = 1.0 - 626.0 / p
    du = 1252.0 * s / p**2
    d2u = 1252.0 * (1.0 - 3.0 * s * s) / p**3
    return u**4, 4 * u**3 * du, 12 * u**2 * du**2 + 4 * u**3 * d2u


def g_derivs(m: int, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``G_m, G_m', G_m''`` for ``s >= 0`` using ``G' = m G (1-G) / s``."""
    m = _check_m(m)
    s = np.asarray(s, dtype=float)
    pos = s > 0
    sp = np.where(pos, s, 1.0)
    lx = m * (np.log(sp) - LOG25)
    g = np.where(pos, np.exp(-np.logaddexp(0.0, -lx)), 0.0)
    log_prod = -np.logaddexp(0.0, -lx) - np.logaddexp(0.0, lx)  # log(G(1-G))
    base = np.exp(log_prod - np.log(sp))
    d1 = np.where(pos, m * base, 0.0)
    d2 = np.where(pos, m * base / sp * (m * (1 - 2 * g) - 1), 2.0 / 625.0 if m == 2 else 0.0)
    return g, d1, d2


def h_derivs(m: int, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``H_m, H_m', H_m''`` for ``s >= 0``; ``H'/H = N m (1-Q)/s`` with ``N = 2**m``."""
    m = _check_m(m)
    n = 2.0**m
    s = np.asarray(s, dtype=float)
    pos = s > 0
    sp = np.where(pos, s, 1.0)
    ls = np.log(sp)
    log_q_ = -np.logaddexp(0.0, -m * ls)
    log_1mq = -np.logaddexp(0.0, m * ls)
    q = np.exp(log_q_)
    log_h_ = n * log_q_
    log_a = math.log(n * m) + log_1mq - ls  # log of H'/H
    h = np.where(pos, np.exp(log_h_), 0.0)
    d1 = np.where(pos, np.exp(log_h_ + log_a), 0.0)
    bracket = n * m * np.exp(log_1mq) - (m * q + 1.0)
    with np.errstate(divide="ignore"):
        mag = log_h_ + math.log(n * m) + log_1mq - 2 * ls + np.log(np.abs(bracket))
    d2 = np.where(pos, np.sign(bracket) * np.exp(mag), 0.0)
    return h, d1, d2


def _factor_values(which: str, m: int, s):
    """Factor values from the log-domain evaluators (independent of the derivative code)."""
    if which == "F":
        return np.exp(log_f_factor(s, check=False).real)
    if which == "G":
        return np.exp(log_g(m, s, check=False).real)
    return np.exp(log_h(m, s, check=False).real)


def _fd_derivs(which: str, m: int, s: float, h: float) -> tuple[float, float]:
    """Richardson-extrapolated central differences for first and second derivatives."""

    def f(x):
        return float(_factor_values(which, m, np.array(x)))

    def d1(hh):
        return (f(s + hh) - f(s - hh)) / (2 * hh)

    def d2(hh):
        return (f(s + hh) - 2 * f(s) + f(s - hh)) / hh**2

    return (4 * d1(h / 2) - d1(h)) / 3, (4 * d2(h / 2) - d2(h)) / 3


def cross_check_derivatives(m: int, points: Sequence[float], rtol: float = 1e-6) -> int:
    """Compare closed-form ``F, G_m, H_m`` derivatives with finite differences.

    Derivatives smaller than 1e-6 are not compared.  Raises
    :class:`DerivativeCheckError` naming the first disagreeing point; returns
    the number of comparisons made.
    """
    compared = 0
    for s in points:
        s = float(s)
        if s <= 0:
            continue
        scale = s / (20.0 * m)
        h = 1e-3 * scale
        closed = {"F": f_factor_derivs(s), "G": g_derivs(m, s), "H": h_derivs(m, s)}
        for name, (v0, v1, v2) in closed.items():
            fd1, fd2 = _fd_derivs(name, m, s, h)
            for order, exact, approx in ((1, float(v1), fd1), (2, float(v2), fd2)):
                if abs(exact) <= 1e-6:
                    continue
                natural = abs(float(v0)) / scale**order
                if abs(exact - approx) > rtol * (abs(exact) + natural):
                    raise DerivativeCheckError(
                        f"{name}^({order}) at s={s!r}, m={m}: closed form {exact!r} vs finite difference {approx!r}"
                    )
                compared += 1
    return compared


def cm_grid_specs(m: int, s_max: float = 60.0, s_far: float = 1e4) -> dict[str, GridSpec]:
    """Pieces of the default ``C_m`` grid: dense on ``[0, 5]`` and around ``25(1 +- m**-0.5)``.

    A geometric tail out to ``s_far`` follows ``F G_m H_m -> 1``.
    """
    m = _check_m(m)
    if s_max < 50:
        raise ParameterError("C_m grid must reach at least s = 50")
    r = m**-0.5
    lo, hi = 25 * (1 - r), 25 * (1 + r)
    specs = {
        "near": GridSpec(0.0, 5.0, 20001),
        "mid": GridSpec(5.0, s_max, 22001),
        "window": GridSpec(lo, hi, int(math.ceil((hi - lo) / (1e-3 * r))) + 1),
    }
    if s_far > s_max:
        specs["far"] = GridSpec(s_max, s_far, 2001, "log")
    return specs


def cm_grid(m: int, s_max: float = 60.0, s_far: float = 1e4) -> np.ndarray:
    """Sorted union of :func:`cm_grid_specs`."""
    specs = cm_grid_specs(m, s_max, s_far)
    return np.unique(np.concatenate([g.points_array() for g in specs.values()]))


_COMBOS = [(a, b, c) for a in range(3) for b in range(3) for c in range(3) if a + b + c <= 2]


def c_m_profile(m: int, s_grid=None) -> tuple[float, float, tuple[int, int, int]]:
    """``(C_m, argmax s, (j1, j2, j3))`` over the grid."""
    m = _check_m(m)
    s = cm_grid(m) if s_grid is None else np.abs(np.asarray(s_grid, dtype=float))
    fd, gd, hd = f_factor_derivs(s), g_derivs(m, s), h_derivs(m, s)
    best, best_s, best_combo = -1.0, 0.0, (0, 0, 0)
    for combo in _COMBOS:
        vals = np.abs(fd[combo[0]]) * np.abs(gd[combo[1]]) * np.abs(hd[combo[2]])
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_s, best_combo = float(vals[i]), float(s[i]), combo
    return best, best_s, best_combo


def c_m_estimate(m: int, s_grid=None, n_checks: int = 10, seed: int = 0) -> float:
    """Grid supremum of ``|F^(j1)| |G_m^(j2)| |H_m^(j3)|`` over ``j1+j2+j3 <= 2``.

    The closed-form derivatives are first cross-checked against finite
    differences at ``n_checks`` reproducibly random grid points.
    """
    m = _check_m(m)
    s = cm_grid(m) if s_grid is None else np.asarray(s_grid, dtype=float)
    if s.size == 0 or np.max(np.abs(s)) < 50:
        raise ParameterError("C_m grid must cover [0, S] with S >= 50")
    rng = np.random.default_rng(seed)
    positive = np.abs(s[s != 0])
    picks = rng.choice(positive, size=min(n_checks, positive.size), replace=False)
    cross_check_derivatives(m, np.sort(picks))
    return c_m_profile(m, s)[0]

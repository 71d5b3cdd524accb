"""Complex numbers stored as (log-magnitude, phase).

Array code works with complex logarithms ``log|z| + i arg z`` directly; the
:class:`LogComplex` value type wraps one such number for the scalar API.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

PI = math.pi


def wrap_phase(phi):
    """Map angles into ``(-pi, pi]``."""
    return PI - np.mod(PI - np.asarray(phi, dtype=float), 2 * PI)


def clog1p(z):
    """``log(1 + z)`` for complex ``z``, accurate when ``|z|`` is tiny.

    Uses Kahan's correction ``log(u) * z / (u - 1)`` with ``u = 1 + z``.
    """
    z = np.asarray(z, dtype=complex)
    u = 1.0 + z
    with np.errstate(divide="ignore", invalid="ignore"):
        corrected = np.log(u) * (z / (u - 1.0))
    return np.where(u == 1.0, z, corrected)


def cscale(k: float, logz):
    """``k * logz`` component-wise, so ``-inf + 0j`` (log of zero) stays finite in phase."""
    logz = np.asarray(logz, dtype=complex)
    return k * logz.real + 1j * (k * logz.imag)


def clog(z):
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class LogComplex:
    """``exp(log_mag) * exp(i phase)``; ``log_mag = -inf`` encodes zero."""

    log_mag: float
    phase: float = 0.0

    def __post_init__(self):
        if math.isnan(self.log_mag) or math.isnan(self.phase):
            raise ValueError("LogComplex parts must not be NaN")
        if self.log_mag == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", float(wrap_phase(self.phase)))
        object.__setattr__(self, "log_mag", float(self.log_mag))

    @classmethod
    def from_log(cls, value: complex) -> "LogComplex":
        value = complex(value)
        return cls(value.real, value.imag if value.real != -math.inf else 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        return cmath.rect(math.exp(self.log_mag), self.phase)

    def abs(self) -> float:
        return 0.0 if self.is_zero else math.exp(self.log_mag)

    def as_log(self) -> complex:
        return complex(self.log_mag, self.phase)

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if other.is_zero:
            raise ZeroDivisionError("division by LogComplex zero")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def __pow__(self, n: int) -> "LogComplex":
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are single-valued")
        if self.is_zero:
            if n > 0:
                return LogComplex.zero()
            raise ZeroDivisionError("zero to a non-positive power")
        return LogComplex(n * self.log_mag, n * self.phase)

    def conjugate(self) -> "LogComplex":
        return LogComplex(self.log_mag, -self.phase)

    def isclose(self, other: "LogComplex", tol: float = 1e-12) -> bool:
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        dphi = abs(float(wrap_phase(self.phase - other.phase)))
        return abs(self.log_mag - other.log_mag) <= tol * max(1.0, abs(self.log_mag)) and dphi <= tol * PI

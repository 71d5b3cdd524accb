"""Regions of the complex plane used by the rate theory and the construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .ratefun import RateFunction, as_rate

RegionKind = Literal["omega", "omega_prime", "strip", "disc"]


@dataclass(frozen=True)
class RegionSpec:
    """One of four regions, all depending only on ``Re z`` and ``|Im z|``.

    * ``omega``: ``Re z > -1/(delta M(|Im z|))``
    * ``omega_prime``: ``|Re z| < 1/(delta M(|Im z|))``
    * ``strip``: ``|Re z| < 1/(c log(k+1))``
    * ``disc``: ``|z| < radius``

    ``delta`` scales the curve (``Omega_{delta M}``); it defaults to 1.
    """

    kind: RegionKind
    rate: RateFunction | None = None
    c: float | None = None
    k: int | None = None
    radius: float | None = None
    delta: float = 1.0

    def __post_init__(self):
        if self.kind in ("omega", "omega_prime"):
            if self.rate is None:
                raise ValueError(f"{self.kind} needs a rate function")
            if self.delta <= 0:
                raise ValueError("delta must be positive")
        elif self.kind == "strip":
            if self.c is None or self.c <= 0 or self.k is None or self.k < 1:
                raise ValueError("strip needs c > 0 and integer k >= 1")
        elif self.kind == "disc":
            if self.radius is None or self.radius <= 0:
                raise ValueError("disc needs a positive radius")
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def omega(cls, rate, delta: float = 1.0) -> "RegionSpec":
        return cls("omega", rate=as_rate(rate), delta=delta)

    @classmethod
    def omega_prime(cls, rate, delta: float = 1.0) -> "RegionSpec":
        return cls("omega_prime", rate=as_rate(rate), delta=delta)

    @classmethod
    def strip(cls, k: int, c: float) -> "RegionSpec":
        return cls("strip", c=c, k=k)

    @classmethod
    def disc(cls, radius: float) -> "RegionSpec":
        return cls("disc", radius=radius)

    @property
    def half_width(self) -> float:
        """Half-width of a fixed strip."""
        if self.kind != "strip":
            raise AttributeError("only strips have a fixed half-width")
        return 1.0 / (self.c * math.log(self.k + 1))


def region_contains(region: RegionSpec, lam):
    """Exact membership test; vectorised over numpy arrays."""
    z = np.asarray(lam, dtype=complex)
    re, im = z.real, np.abs(z.imag)
    if region.kind == "disc":
        out = np.abs(z) < region.radius
    elif region.kind == "strip":
        out = np.abs(re) < region.half_width
    else:
        bound = 1.0 / (region.delta * np.asarray(region.rate.eval(im)))
        out = re > -bound if region.kind == "omega" else np.abs(re) < bound
    return bool(out) if out.ndim == 0 else out

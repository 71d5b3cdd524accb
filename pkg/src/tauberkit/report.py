"""Grid descriptions and verification reports (JSON-serialisable)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

SPACINGS = ("linear", "log", "asinh", "explicit")


@dataclass(frozen=True)
class GridSpec:
    """A one-dimensional evaluation grid that can be replayed exactly.

    ``linear`` and ``log`` are the usual uniform / geometric grids.  ``asinh``
    places ``count`` points uniformly in ``u`` and maps them through
    ``scale * sinh(u)``; it is linear near zero and logarithmic far out.
    ``explicit`` stores the points themselves.  For the three mapped kinds,
    going from ``count`` to ``2 * count - 1`` gives a nested refinement.
    """

    min: float
    max: float
    count: int
    spacing: str = "linear"
    scale: float = 1.0
    points: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.spacing not in SPACINGS:
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.count < 1:
            raise ValueError("grid needs at least one point")
        if self.spacing == "explicit" and self.points is None:
            raise ValueError("explicit grid needs points")

    @classmethod
    def from_points(cls, points: Sequence[float]) -> "GridSpec":
        """Describe an arbitrary point list, recognising uniform and geometric grids."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("grid must be a nonempty 1-d sequence")
        lo, hi, n = float(pts[0]), float(pts[-1]), int(pts.size)
        for kind in ("linear", "log"):
            if kind == "log" and (lo <= 0 or hi <= 0):
                continue
            candidate = cls(lo, hi, n, kind)
            if np.array_equal(candidate.points_array(), pts):
                return candidate
        return cls(float(pts.min()), float(pts.max()), n, "explicit", points=tuple(map(float, pts)))

    def points_array(self) -> np.ndarray:
        if self.spacing == "explicit":
            return np.asarray(self.points, dtype=float)
        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "linear":
            return np.linspace(self.min, self.max, self.count)
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        u = np.linspace(np.arcsinh(self.min / self.scale), np.arcsinh(self.max / self.scale), self.count)
        return self.scale * np.sinh(u)

    def refined(self) -> "GridSpec":
        """Nested refinement: every old point is kept."""
        if self.spacing == "explicit":
            raise ValueError("explicit grids cannot be refined")
        return GridSpec(self.min, self.max, 2 * self.count - 1, self.spacing, self.scale)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"min": self.min, "max": self.max, "count": self.count, "spacing": self.spacing}
        if self.spacing == "asinh":
            out["scale"] = self.scale
        if self.points is not None:
            out["points"] = list(self.points)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GridSpec":
        pts = data.get("points")
        return cls(
            float(data["min"]),
            float(data["max"]),
            int(data["count"]),
            data.get("spacing", "linear"),
            float(data.get("scale", 1.0)),
            tuple(pts) if pts is not None else None,
        )


def as_grid(grid: GridSpec | Sequence[float]) -> GridSpec:
    return grid if isinstance(grid, GridSpec) else GridSpec.from_points(grid)


def _jsonable(value: Any) -> Any:
    if isinstance(value, GridSpec):
        return value.to_dict()
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


@dataclass
class VerificationReport:
    """Outcome of one property certification.

    ``passed`` is the verdict; ``expected_failure`` marks a failure that the
    underlying asymptotic statement allows (small parameters outside the
    "sufficiently large" regime), which does not fail the suite.
    """

    property_id: str
    params: dict[str, Any]
    grid: dict[str, GridSpec]
    extremum: float
    threshold: float
    passed: bool
    notes: list[str] = field(default_factory=list)
    expected_failure: bool = False

    @property
    def counts_as_failure(self) -> bool:
        return not self.passed and not self.expected_failure

    def to_dict(self) -> dict[str, Any]:
        return {
            "property_id": self.property_id,
            "params": _jsonable(self.params),
            "grid": {name: g.to_dict() for name, g in self.grid.items()},
            "extremum": _jsonable(self.extremum),
            "tolerance": _jsonable(self.threshold),
            "pass": bool(self.passed),
            "expected_failure": bool(self.expected_failure),
            "notes": list(self.notes),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VerificationReport":
        def num(v):
            if v is None:
                return math.nan
            if isinstance(v, str):
                return float(v)
            return float(v)

        return cls(
            property_id=data["property_id"],
            params=dict(data.get("params", {})),
            grid={k: GridSpec.from_dict(v) for k, v in data.get("grid", {}).items()},
            extremum=num(data.get("extremum")),
            threshold=num(data.get("tolerance")),
            passed=bool(data["pass"]),
            notes=list(data.get("notes", [])),
            expected_failure=bool(data.get("expected_failure", False)),
        )

    def summary_line(self) -> str:
        verdict = "PASS" if self.passed else ("XFAIL" if self.expected_failure else "FAIL")
        return f"[{verdict}] {self.property_id}: extremum={self.extremum:.6g} threshold={self.threshold:.6g}"

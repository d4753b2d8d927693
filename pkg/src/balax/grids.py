"""Evaluation grids and the tail-stabilization rule.

Every ``limsup``/``O(1)`` statement is tested on finite grids. The rule used
throughout: take the running supremum of a profile over the inner half of the
grid (in log scale) and over the whole grid. The profile is *stable* when
extending the grid raises the supremum by at most ``(factor - 1)`` times its
size, with ``floor`` guarding against near-zero suprema.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Verdict",
    "IntervalGrid",
    "geometric_points",
    "parse_grid_spec",
    "Stability",
    "stabilization",
    "STABILITY_FACTOR",
    "STABILITY_FLOOR",
    "ConditionVerdict",
]

STABILITY_FACTOR = 1.2
STABILITY_FLOOR = 0.1
# growth beyond this multiple of the allowance is reported as "no"
_NO_MULTIPLE = 2.5


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        return {"yes": 0, "no": 1, "inconclusive": 2}[self.value]


def geometric_points(rmin: float, rmax: float, ratio: float = 1.25) -> np.ndarray:
    """``rmin * ratio**j`` up to and including ``rmax`` (rmax always appended)."""
    if not (rmin > 0 and rmax > rmin and ratio > 1):
        raise ValueError(f"bad geometric grid rmin={rmin} rmax={rmax} ratio={ratio}")
    n = int(math.floor(math.log(rmax / rmin) / math.log(ratio) + 1e-9))
    pts = rmin * ratio ** np.arange(n + 1, dtype=float)
    if pts[-1] < rmax * (1 - 1e-12):
        pts = np.append(pts, rmax)
    else:
        pts[-1] = rmax
    return pts


def parse_grid_spec(spec: str) -> tuple[float, float, float]:
    """Parse ``rmin:rmax:ratio``."""
    try:
        rmin, rmax, ratio = (float(s) for s in spec.split(":"))
    except ValueError:
        raise ValueError(f"grid spec must be rmin:rmax:ratio, got {spec!r}") from None
    return rmin, rmax, ratio


@dataclass(frozen=True, eq=False)
class IntervalGrid:
    """Pairs (r, R) with 1 <= r < R, built from a sorted set of radii."""

    r: np.ndarray
    R: np.ndarray
    points: np.ndarray | None = None

    def __post_init__(self):
        if self.r.size == 0:
            raise ValueError("empty interval grid")
        if np.any(self.r < 1) or np.any(self.R <= self.r):
            raise ValueError("interval grid pairs must satisfy 1 <= r < R")

    @classmethod
    def geometric(cls, rmin: float = 1.0, rmax: float = 1e6, ratio: float = 1.25) -> "IntervalGrid":
        return cls.from_points(geometric_points(rmin, rmax, ratio))

    @classmethod
    def from_spec(cls, spec: str) -> "IntervalGrid":
        return cls.geometric(*parse_grid_spec(spec))

    @classmethod
    def from_points(cls, points) -> "IntervalGrid":
        pts = np.unique(np.asarray(points, dtype=float))
        i, j = np.triu_indices(pts.size, k=1)
        return cls(pts[i], pts[j], pts)

    @classmethod
    def from_pairs(cls, pairs) -> "IntervalGrid":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), None)

    def __len__(self) -> int:
        return self.r.size

    @property
    def log_ratio(self) -> np.ndarray:
        return np.log(self.R / self.r)

    def describe(self) -> dict:
        out = {"pairs": int(self.r.size), "rmin": float(self.r.min()), "Rmax": float(self.R.max())}
        if self.points is not None:
            out["points"] = self.points.tolist()
        else:
            out["pair_list"] = np.column_stack([self.r, self.R]).tolist()
        return out


@dataclass(frozen=True)
class Stability:
    verdict: Verdict
    sup_inner: float
    sup_full: float
    split: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "sup_inner": self.sup_inner,
            "sup_full": self.sup_full,
            "split": self.split,
        }


def stabilization(
    x,
    values,
    *,
    toward: str = "infinity",
    factor: float = STABILITY_FACTOR,
    floor: float = STABILITY_FLOOR,
    min_points: int = 4,
) -> Stability:
    """Decide whether ``sup values`` stays bounded as ``x`` runs to its tail.

    ``x`` are positive abscissae (radii, R values); ``toward`` is
    ``"infinity"`` or ``"zero"`` and selects which end is the tail. The
    inner half is split off at the geometric midpoint of the x-range.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape:
        raise ValueError("x and values differ in shape")
    finite = np.isfinite(v)
    if np.any(v[~finite] > 0):
        return Stability(Verdict.NO, math.nan, math.inf, math.nan)
    x, v = x[finite], v[finite]
    if x.size < min_points:
        return Stability(Verdict.INCONCLUSIVE, math.nan, math.nan, math.nan)
    split = math.sqrt(x.min() * x.max())
    inner = x <= split if toward == "infinity" else x >= split
    if toward not in ("infinity", "zero"):
        raise ValueError("toward must be 'infinity' or 'zero'")
    if inner.sum() < 2 or (~inner).sum() < 1:
        return Stability(Verdict.INCONCLUSIVE, math.nan, float(v.max()), split)
    s_in = float(v[inner].max())
    s_full = float(v.max())
    allowance = (factor - 1.0) * max(abs(s_in), floor)
    growth = s_full - s_in
    if growth <= allowance:
        verdict = Verdict.YES
    elif growth > _NO_MULTIPLE * allowance:
        verdict = Verdict.NO
    else:
        verdict = Verdict.INCONCLUSIVE
    return Stability(verdict, s_in, s_full, split)


@dataclass(frozen=True, eq=False)
class ConditionVerdict:
    """Outcome of a desk-scale condition check.

    ``witness`` holds the fitted constants, ``profile`` the grid evidence
    they were computed from.
    """

    holds: Verdict
    witness: dict
    profile: dict

    def __bool__(self) -> bool:
        return self.holds is Verdict.YES

    def to_dict(self) -> dict:
        return {"holds": self.holds.value, "witness": self.witness, "profile": self.profile}

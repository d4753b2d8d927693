"""Divisors, atomic charges and charges living on the imaginary axis.

All objects here are immutable. Atom locations are stored as numpy arrays in
canonical order (sorted by real part, then imaginary part) with at most one
atom per location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Divisor",
    "AtomicCharge",
    "LineCharge",
    "ChargeLike",
    "as_charge",
    "counting_radial",
    "distribution_on_line",
    "upper_density_profile",
    "parse_atoms",
    "read_atoms",
    "InputError",
]


class InputError(ValueError):
    """Malformed charge/divisor input."""


def _canonicalize(locs, weights, decimals=None):
    locs = np.asarray(locs, dtype=complex).ravel()
    weights = np.asarray(weights).ravel()
    if locs.shape != weights.shape:
        raise ValueError("locations and weights differ in length")
    if decimals is not None:
        locs = np.round(locs.real, decimals) + 1j * np.round(locs.imag, decimals)
    if locs.size == 0:
        return locs, weights
    if not np.all(np.isfinite(locs)):
        raise ValueError("atom locations must be finite")
    uniq, inverse = np.unique(locs, return_inverse=True)
    summed = np.zeros(uniq.size, dtype=weights.dtype)
    np.add.at(summed, inverse, weights)
    return uniq, summed


@dataclass(frozen=True, eq=False)
class AtomicCharge:
    """Signed measure made of finitely many point masses.

    Use :meth:`from_atoms` to build one; it merges atoms at equal locations
    and drops atoms whose total mass cancels to zero.
    """

    locs: np.ndarray
    masses: np.ndarray

    @classmethod
    def from_atoms(cls, locs, masses=None, *, decimals: int | None = None) -> "AtomicCharge":
        locs = np.atleast_1d(np.asarray(locs, dtype=complex))
        if masses is None:
            masses = np.ones(locs.shape, dtype=float)
        masses = np.atleast_1d(np.asarray(masses, dtype=float))
        if not np.all(np.isfinite(masses)):
            raise ValueError("masses must be finite")
        locs, masses = _canonicalize(locs, masses, decimals)
        keep = masses != 0.0
        locs, masses = locs[keep], masses[keep]
        locs.setflags(write=False)
        masses.setflags(write=False)
        return cls(locs, masses)

    @classmethod
    def empty(cls) -> "AtomicCharge":
        return cls.from_atoms(np.zeros(0, dtype=complex))

    def __len__(self) -> int:
        return self.locs.size

    def __add__(self, other: "ChargeLike") -> "AtomicCharge":
        other = as_charge(other)
        return AtomicCharge.from_atoms(
            np.concatenate([self.locs, other.locs]),
            np.concatenate([self.masses, other.masses]),
        )

    def __neg__(self) -> "AtomicCharge":
        return AtomicCharge(self.locs, -self.masses)

    def __sub__(self, other: "ChargeLike") -> "AtomicCharge":
        return self + (-as_charge(other))

    def scaled(self, factor: float) -> "AtomicCharge":
        return AtomicCharge.from_atoms(self.locs, factor * self.masses)

    def mapped(self, fn: Callable[[np.ndarray], np.ndarray]) -> "AtomicCharge":
        """Push the charge forward under ``fn`` (applied to the location array)."""
        return AtomicCharge.from_atoms(fn(self.locs), self.masses)

    @property
    def positive(self) -> "AtomicCharge":
        keep = self.masses > 0
        return AtomicCharge(self.locs[keep], self.masses[keep])

    @property
    def negative(self) -> "AtomicCharge":
        keep = self.masses < 0
        return AtomicCharge(self.locs[keep], -self.masses[keep])

    @property
    def variation(self) -> "AtomicCharge":
        """The total variation measure |charge|."""
        return AtomicCharge(self.locs, np.abs(self.masses))

    def total_variation(self) -> float:
        return math.fsum(np.abs(self.masses))

    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def is_positive(self) -> bool:
        return bool(np.all(self.masses > 0))

    @property
    def radii(self) -> np.ndarray:
        return np.abs(self.locs)

    def horizon(self) -> float:
        """Largest atom modulus (0 for the empty charge)."""
        return float(self.radii.max()) if self.locs.size else 0.0

    def on_axis(self) -> "AtomicCharge":
        keep = self.locs.real == 0
        return AtomicCharge(self.locs[keep], self.masses[keep])

    def off_axis(self) -> "AtomicCharge":
        keep = self.locs.real != 0
        return AtomicCharge(self.locs[keep], self.masses[keep])

    def has_atom_at_zero(self) -> bool:
        return bool(np.any(self.locs == 0))

    def to_dict(self) -> dict:
        return {
            "re": self.locs.real.tolist(),
            "im": self.locs.imag.tolist(),
            "mass": self.masses.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Divisor:
    """Zero sequence as a multiset of complex points.

    Multiplicities are positive integers. The point 0 is rejected unless
    ``allow_zero=True`` is passed to :meth:`from_points`.
    """

    locs: np.ndarray
    mult: np.ndarray

    @classmethod
    def from_points(
        cls,
        points,
        multiplicities=None,
        *,
        allow_zero: bool = False,
        decimals: int | None = None,
    ) -> "Divisor":
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        if multiplicities is None:
            multiplicities = np.ones(points.shape, dtype=np.int64)
        mult = np.atleast_1d(np.asarray(multiplicities))
        if mult.size and (not np.all(mult == np.round(mult)) or np.any(mult < 1)):
            raise ValueError("multiplicities must be positive integers")
        mult = mult.astype(np.int64)
        locs, mult = _canonicalize(points, mult, decimals)
        if not allow_zero and np.any(locs == 0):
            raise ValueError("divisor has an atom at 0")
        locs.setflags(write=False)
        mult.setflags(write=False)
        return cls(locs, mult)

    @classmethod
    def empty(cls) -> "Divisor":
        return cls.from_points(np.zeros(0, dtype=complex))

    @classmethod
    def progression(
        cls, first: float, step: float, count: int, direction: complex = 1.0
    ) -> "Divisor":
        """Points ``direction * (first + j*step)`` for ``j = 0..count-1``."""
        pts = direction * (first + step * np.arange(count, dtype=float))
        return cls.from_points(pts)

    def __len__(self) -> int:
        return self.locs.size

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor.from_points(
            np.concatenate([self.locs, other.locs]),
            np.concatenate([self.mult, other.mult]),
            allow_zero=True,
        )

    def count(self) -> int:
        return int(self.mult.sum())

    def to_charge(self) -> AtomicCharge:
        return AtomicCharge(self.locs, self.mult.astype(float))

    def horizon(self) -> float:
        return float(np.abs(self.locs).max()) if self.locs.size else 0.0


ChargeLike = Union[AtomicCharge, Divisor]


def as_charge(obj: ChargeLike) -> AtomicCharge:
    if isinstance(obj, AtomicCharge):
        return obj
    if isinstance(obj, Divisor):
        return obj.to_charge()
    raise TypeError(f"expected AtomicCharge or Divisor, got {type(obj).__name__}")


def counting_radial(charge: ChargeLike, r):
    """Charge of the closed disk of radius ``r`` about 0.

    Vectorized in ``r``; atoms on the circle ``|z| = r`` are counted.
    """
    c = as_charge(charge)
    rad = c.radii
    order = np.argsort(rad, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum(c.masses[order])])
    idx = np.searchsorted(rad[order], np.asarray(r, dtype=float), side="right")
    out = cum[idx]
    return float(out) if np.ndim(out) == 0 else out


def upper_density_profile(charge: ChargeLike, radii) -> np.ndarray:
    """``|charge|^rad(r) / r`` on the given radii.

    The finite-upper-density statistic is the tail supremum of this profile.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    return np.asarray(counting_radial(as_charge(charge).variation, radii)) / radii


@dataclass(frozen=True, eq=False)
class LineCharge:
    """Charge on the imaginary axis.

    The charge is ``density(y) dy`` plus point masses ``atom_mass`` at
    ordinates ``atom_y``. ``continuous(y)`` is the distribution function of
    the density part, normalized to vanish at 0. :meth:`distribution` follows
    the sign convention F(y) = -charge([iy, 0)) for y < 0 and
    F(y) = charge([0, iy]) for y >= 0.
    """

    continuous: Callable[[np.ndarray], np.ndarray]
    density: Callable[[np.ndarray], np.ndarray]
    atom_y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    atom_mass: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # ordinates where the density has sharp features; used to guide quadrature
    features: np.ndarray = field(default_factory=lambda: np.zeros(0))
    scales: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def atomic_distribution(self, y):
        y = np.asarray(y, dtype=float)
        ay, am = self.atom_y, self.atom_mass
        if ay.size == 0:
            return np.zeros_like(y)
        yy = y[..., None]
        pos = ((ay >= 0) & (ay <= yy)) * am
        neg = ((ay < 0) & (ay >= yy)) * am
        return pos.sum(axis=-1) - neg.sum(axis=-1)

    def distribution(self, y):
        y = np.asarray(y, dtype=float)
        out = np.asarray(self.continuous(y), dtype=float) + self.atomic_distribution(y)
        return float(out) if out.ndim == 0 else out

    def mass_between(self, a: float, b: float) -> float:
        """F(b) - F(a): the charge of (ia, ib] for a >= 0, of [ia, ib) for
        b < 0 and of [ia, ib] when a < 0 <= b (the sign convention makes F
        left-continuous on the negative half-axis)."""
        return float(self.distribution(b) - self.distribution(a))

    def total_mass(self) -> float:
        cont = np.asarray(self.continuous(np.array([-np.inf, np.inf])), dtype=float)
        return float(cont[1] - cont[0]) + math.fsum(self.atom_mass)

    def abs_continuous(self, a: float, b: float) -> float:
        """Integral of ``|density|`` over [a, b], split at sign changes."""
        if b <= a:
            return 0.0
        ys = _sample_points(a, b, self.features, self.scales)
        rho = np.asarray(self.density(ys), dtype=float)
        cuts = [a]
        sign_change = np.nonzero(np.sign(rho[:-1]) * np.sign(rho[1:]) < 0)[0]
        if sign_change.size:
            from scipy.optimize import brentq

            for k in sign_change:
                cuts.append(brentq(lambda t: float(self.density(np.array(t))), ys[k], ys[k + 1], xtol=1e-15, rtol=4e-16))
        cuts.append(b)
        vals = np.asarray(self.continuous(np.array(cuts)), dtype=float)
        return math.fsum(np.abs(np.diff(vals)))

    def total_variation_between(self, a: float, b: float) -> float:
        """|charge| of (ia, ib]."""
        ay = self.atom_y
        in_seg = (ay > a) & (ay <= b)
        return self.abs_continuous(a, b) + math.fsum(np.abs(self.atom_mass[in_seg]))

    def variation_radial(self, r: float) -> float:
        """|charge| of the closed segment [-ir, ir]."""
        ay = self.atom_y
        in_seg = np.abs(ay) <= r
        return self.abs_continuous(-r, r) + math.fsum(np.abs(self.atom_mass[in_seg]))


def _sample_points(a, b, features, scales, n_base=257):
    pts = [np.linspace(a, b, n_base)]
    if a > 0 or b < 0:
        lo, hi = (a, b) if a > 0 else (-b, -a)
        geo = np.geomspace(lo, hi, n_base)
        pts.append(geo if a > 0 else -geo[::-1])
    else:
        for lo, hi, sgn in ((0.0, b, 1.0), (0.0, -a, -1.0)):
            if hi > 0:
                pts.append(sgn * np.geomspace(max(hi * 1e-9, 1e-300), hi, n_base))
    if np.size(features):
        offs = np.array([-8.0, -4, -2, -1, -0.5, -0.25, 0, 0.25, 0.5, 1, 2, 4, 8])
        f = np.asarray(features)[:, None] + np.asarray(scales)[:, None] * offs
        pts.append(f.ravel())
    ys = np.concatenate(pts)
    ys = ys[(ys >= a) & (ys <= b)]
    return np.unique(np.concatenate([ys, [a, b]]))


def distribution_on_line(charge: ChargeLike) -> LineCharge:
    """Line charge of an atomic charge supported on the imaginary axis."""
    c = as_charge(charge)
    if np.any(c.locs.real != 0):
        raise ValueError("charge has atoms off the imaginary axis")
    zero = lambda y: np.zeros_like(np.asarray(y, dtype=float))
    return LineCharge(zero, zero, c.locs.imag.copy(), c.masses.copy())


def parse_atoms(text: str, *, source: str = "<string>", allow_zero: bool = True) -> ChargeLike:
    """Parse ``re im [mass]`` lines.

    Returns a :class:`Divisor` when every mass is omitted or a positive
    integer, otherwise an :class:`AtomicCharge`. ``#`` starts a comment.
    """
    locs: list[complex] = []
    masses: list[float] = []
    integral = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InputError(f"{source}:{lineno}: expected 're im [mass]', got {raw!r}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise InputError(f"{source}:{lineno}: non-numeric field in {raw!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"{source}:{lineno}: non-finite value in {raw!r}")
        z = complex(vals[0], vals[1])
        if z == 0 and not allow_zero:
            raise InputError(f"{source}:{lineno}: atom at 0 is not allowed here")
        m = vals[2] if len(parts) == 3 else 1.0
        if m == 0:
            raise InputError(f"{source}:{lineno}: zero mass")
        if len(parts) == 3 and not (m > 0 and m == int(m)):
            integral = False
        locs.append(z)
        masses.append(m)
    if integral and not any(z == 0 for z in locs):
        return Divisor.from_points(locs, np.array(masses, dtype=np.int64))
    return AtomicCharge.from_atoms(locs, masses)


def read_atoms(path: str | Path, *, allow_zero: bool = True) -> ChargeLike:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_atoms(text, source=str(path), allow_zero=allow_zero)

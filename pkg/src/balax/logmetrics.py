"""Logarithmic interval functions, weighted counting functions, block
densities and the logarithmic integrals J(r, R; v).

For a charge mu the right interval function is

    l_right(r, R) = sum over atoms z with Re z > 0 and r < |z| <= R of mass * Re(1/z)

and ``l_left`` is the mirror image over Re z < 0 with Re(-1/z). The
two-sided interval function is their pointwise maximum. The barred version
replaces each side by the integral of the cos-weighted counting function
against dt / t**2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .grids import IntervalGrid, Stability, Verdict, geometric_points, stabilization
from .measures import ChargeLike, Divisor, as_charge, upper_density_profile

__all__ = [
    "IntervalFunction",
    "weighted_count",
    "char_log_right",
    "char_log_left",
    "interval_log",
    "interval_log_bar",
    "ibp_residual",
    "block_density",
    "block_density_report",
    "QuadResult",
    "J_interval",
    "J_tail",
    "lemJ_diagnostic",
]

SIDES = ("right", "left")


class IntervalFunction:
    """Function of an interval (r, R], vectorized over numpy arrays."""

    def __init__(self, evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray], name: str = ""):
        self._evaluator = evaluator
        self.name = name

    def __call__(self, r, R):
        r = np.asarray(r, dtype=float)
        R = np.asarray(R, dtype=float)
        out = np.asarray(self._evaluator(r, R), dtype=float)
        return float(out) if out.ndim == 0 else out

    def __repr__(self) -> str:
        return f"IntervalFunction({self.name or '?'})"


class _Cumulative:
    """Right-continuous step function t -> sum of weights at radii <= t."""

    def __init__(self, radii: np.ndarray, weights: np.ndarray):
        order = np.argsort(radii, kind="stable")
        self.radii = radii[order]
        self.cum = np.concatenate([[0.0], np.cumsum(weights[order])])

    def __call__(self, t):
        return self.cum[np.searchsorted(self.radii, t, side="right")]


def _side_mask(locs: np.ndarray, side: str) -> np.ndarray:
    if side == "right":
        return locs.real > 0
    if side == "left":
        return locs.real < 0
    raise ValueError(f"side must be 'right' or 'left', got {side!r}")


def _cos_weights(charge, side: str):
    """Per-atom radius and mass * cos^{+/-}(arg z) for one side."""
    c = as_charge(charge)
    mask = _side_mask(c.locs, side)
    z = c.locs[mask]
    rho = np.abs(z)
    return rho, c.masses[mask] * np.abs(z.real) / rho


def weighted_count(charge: ChargeLike, r, weight: str = "cos_plus"):
    """Counting function of the closed disk with weight cos^+ or cos^- of arg z.

    Arguments of atom locations are taken in [-pi/2, 3pi/2), so cos^+ picks
    the right half-plane and cos^- the left one.
    """
    c = as_charge(charge)
    if c.has_atom_at_zero():
        raise ValueError("weighted count undefined for an atom at 0")
    side = {"cos_plus": "right", "cos_minus": "left"}.get(weight)
    if side is None:
        raise ValueError("weight must be 'cos_plus' or 'cos_minus'")
    rho, w = _cos_weights(c, side)
    out = _Cumulative(rho, w)(np.asarray(r, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _char_log(charge, side: str) -> IntervalFunction:
    rho, w = _cos_weights(charge, side)
    # mass * |Re z| / |z|**2 == mass * Re(+-1/z) on the chosen side
    cum = _Cumulative(rho, w / rho)
    return IntervalFunction(lambda r, R: cum(R) - cum(r), f"l_{side}")


def char_log_right(charge: ChargeLike) -> IntervalFunction:
    return _char_log(charge, "right")


def char_log_left(charge: ChargeLike) -> IntervalFunction:
    return _char_log(charge, "left")


def interval_log(charge: ChargeLike) -> IntervalFunction:
    right, left = char_log_right(charge), char_log_left(charge)
    return IntervalFunction(lambda r, R: np.maximum(right(r, R), left(r, R)), "l")


def _bar_side(charge, side: str) -> IntervalFunction:
    rho, w = _cos_weights(charge, side)
    W = _Cumulative(rho, w)
    U = _Cumulative(rho, w / rho)

    def ev(r, R):
        # atoms inside D(r) contribute w(1/r - 1/R), atoms in the annulus w(1/rho - 1/R)
        return W(r) * (1.0 / r - 1.0 / R) + (U(R) - U(r)) - (W(R) - W(r)) / R

    return IntervalFunction(ev, f"lbar_{side}")


def interval_log_bar(charge: ChargeLike) -> IntervalFunction:
    right, left = _bar_side(charge, "right"), _bar_side(charge, "left")
    return IntervalFunction(lambda r, R: np.maximum(right(r, R), left(r, R)), "lbar")


def ibp_residual(charge: ChargeLike, r: float, R: float, side: str = "right") -> float:
    """|l_side(r, R) - [mu(R)/R - mu(r)/r + int_r^R mu(t)/t^2 dt]|.

    Both sides are computed from scratch: the left by summing Re(+-1/z) over
    the annulus, the right by integrating the step function mu(t; cos) piece
    by piece between consecutive atom radii.
    """
    if not 0 < r < R < math.inf:
        raise ValueError("need 0 < r < R < inf")
    c = as_charge(charge)
    mask = _side_mask(c.locs, side)
    z, m = c.locs[mask], c.masses[mask]
    rho = np.abs(z)
    sgn = 1.0 if side == "right" else -1.0
    ann = (rho > r) & (rho <= R)
    lhs = math.fsum(m[ann] * (sgn / z[ann]).real)

    w = m * np.abs(z.real) / rho
    order = np.argsort(rho, kind="stable")
    rho_s, w_s = rho[order], w[order]

    def mu(t):
        return math.fsum(w_s[rho_s <= t])

    breaks = [r] + [float(x) for x in rho_s if r < x < R] + [R]
    breaks = sorted(set(breaks))
    pieces = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        # mu is constant on [a, b) and equals mu(a) there
        pieces.append(mu(a) * (1.0 / a - 1.0 / b))
    rhs = math.fsum([mu(R) / R, -mu(r) / r] + pieces)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# block densities


def _check_finite_density(charge, rmin, rmax):
    radii = geometric_points(max(rmin, 1.0), rmax, 2.0) if rmax > max(rmin, 1.0) * 4 else None
    if radii is None:
        return None
    prof = upper_density_profile(charge, radii)
    st = stabilization(radii, prof)
    if st.verdict is Verdict.NO:
        warnings.warn("charge does not look like it has finite upper density", RuntimeWarning, stacklevel=3)
    return st


def block_density_report(
    divisor: ChargeLike,
    variant: str = "limsup_log",
    *,
    rmin: float = 1.0,
    rmax: float | None = None,
    ratio: float = 1.25,
    a_max: float | None = None,
    bar: bool = False,
    b_tol: float = 1e-3,
) -> dict:
    """Block density with the evaluation grid echoed back.

    ``rmax`` defaults to the largest atom modulus, beyond which a truncated
    sequence carries no information. For the ``limsup_log``/``inf_log``
    variants the ratio ``a`` runs over powers of ``ratio`` up to ``a_max``
    (default ``sqrt(rmax/rmin)``) and, for each a, ``r`` over the upper half
    (log scale) of the admissible radii ``r*a <= rmax``.
    """
    charge = as_charge(divisor)
    if rmax is None:
        rmax = charge.horizon()
    if not (rmax > rmin > 0):
        raise ValueError("empty grid: need rmax > rmin > 0")
    density_check = _check_finite_density(charge, rmin, rmax)
    lfun = interval_log_bar(charge) if bar else interval_log(charge)
    pts = geometric_points(rmin, rmax, ratio)
    report: dict = {
        "variant": variant,
        "grid": {"rmin": rmin, "rmax": rmax, "ratio": ratio, "bar": bar},
        "upper_density_check": None if density_check is None else density_check.to_dict(),
    }
    if variant in ("limsup_log", "inf_log"):
        if a_max is None:
            a_max = math.sqrt(rmax / rmin)
        n_a = int(math.floor(math.log(a_max) / math.log(ratio) + 1e-9))
        if n_a < 1:
            raise ValueError("empty grid: a_max must exceed the grid ratio")
        a_vals = ratio ** np.arange(1, n_a + 1, dtype=float)
        per_a = []
        for a in a_vals:
            rs = pts[pts * a <= rmax * (1 + 1e-12)]
            tail = rs[rs >= math.sqrt(rs.min() * rs.max()) * (1 - 1e-12)]
            per_a.append(float(np.max(lfun(tail, a * tail))) / math.log(a))
        per_a = np.array(per_a)
        a_tail = a_vals >= math.sqrt(a_vals.min() * a_vals.max()) * (1 - 1e-12)
        value = float(per_a[a_tail].max()) if variant == "limsup_log" else float(per_a.min())
        report["grid"]["a_values"] = a_vals.tolist()
        report["profile"] = per_a.tolist()
        report["value"] = value
        return report
    if variant == "best_b":
        grid = IntervalGrid.from_points(pts)
        lv = lfun(grid.r, grid.R)
        lr = grid.log_ratio

        def stab(b: float) -> Stability:
            return stabilization(grid.R, lv - b * lr)

        if stab(0.0).verdict is Verdict.YES:
            b_hi = 0.0
        else:
            lo, hi = 0.0, 1.0
            while stab(hi).verdict is not Verdict.YES:
                lo, hi = hi, 2 * hi
                if hi > 1e6:
                    raise RuntimeError("no stable b found below 1e6")
            while hi - lo > b_tol:
                mid = 0.5 * (lo + hi)
                if stab(mid).verdict is Verdict.YES:
                    hi = mid
                else:
                    lo = mid
            b_hi = hi
        st = stab(b_hi)
        report["value"] = b_hi
        report["C_b"] = st.sup_full
        report["stability"] = st.to_dict()
        report["b_tol"] = b_tol
        return report
    raise ValueError(f"unknown block density variant {variant!r}")


def block_density(divisor: ChargeLike, variant: str = "limsup_log", **grid) -> float:
    """Logarithmic block density; variants ``limsup_log``, ``inf_log``, ``best_b``."""
    return block_density_report(divisor, variant, **grid)["value"]


# ---------------------------------------------------------------------------
# logarithmic integrals


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool

    def __float__(self) -> float:
        return self.value


def _quad(f, a, b, tol, points=None, limit=400):
    kw = dict(epsabs=tol, epsrel=0.0, limit=limit, full_output=1)
    if points is not None and len(points):
        kw["points"] = points
    res = integrate.quad(f, a, b, **kw)
    value, err = res[0], res[1]
    ok = len(res) == 3 and err <= max(10 * tol, 1e-14)
    return value, err, ok


def _sym(v):
    return lambda y: float(v(complex(0.0, -y))) + float(v(complex(0.0, y)))


def J_interval(v, r: float, R: float, *, tol: float = 1e-10, singular: Sequence[float] = ()) -> QuadResult:
    """int_r^R (v(-iy) + v(iy)) / y^2 dy by adaptive Gauss-Kronrod quadrature.

    ``singular`` lists ordinates |y| where v has integrable singularities
    (zeros of an entire function on the axis); the range is split there.
    """
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    g = _sym(v)
    f = lambda y: g(y) / (y * y)
    if math.isinf(R):
        return J_tail(v, r=r, tol=tol)
    pts = sorted({abs(s) for s in singular if r < abs(s) < R})
    value, err, ok = _quad(f, r, R, tol, pts)
    return QuadResult(value, err, ok)


def J_tail(v, *, r: float = 1.0, tol: float = 1e-10, singular: Sequence[float] = ()) -> QuadResult:
    """int_r^inf (v(-iy) + v(iy)) / y^2 dy via the substitution t = 1/y.

    ``converged`` is False when the quadrature cannot meet ``tol``; this is
    how a divergent integral shows up.
    """
    if r <= 0:
        raise ValueError("need r > 0")
    g = _sym(v)
    f = lambda t: g(1.0 / t) if t > 0 else 0.0
    pts = sorted({1.0 / abs(s) for s in singular if abs(s) > r})
    value, err, ok = _quad(f, 0.0, 1.0 / r, tol, pts)
    return QuadResult(value, err, ok)


def lemJ_diagnostic(
    u,
    charge: ChargeLike,
    grid: IntervalGrid,
    *,
    tol: float = 1e-9,
    singular: Sequence[float] = (),
) -> dict:
    """Profile of |J(r,R;u) - l_right(r,R)| + |J(r,R;u) - l_left(r,R)|.

    ``charge`` is the Riesz charge of ``u``. The comparison is reported raw:
    no normalization constant between J and the interval functions is
    assumed, so the attached verdict only says whether the profile looks
    bounded on the grid.
    """
    right, left = char_log_right(charge), char_log_left(charge)
    if grid.points is not None:
        pts = grid.points
        seg = [J_interval(u, a, b, tol=tol, singular=singular) for a, b in zip(pts[:-1], pts[1:])]
        cum = np.concatenate([[0.0], np.cumsum([s.value for s in seg])])
        idx = {float(p): k for k, p in enumerate(pts)}
        J = np.array([cum[idx[float(R)]] - cum[idx[float(r)]] for r, R in zip(grid.r, grid.R)])
        converged = all(s.converged for s in seg)
    else:
        res = [J_interval(u, r, R, tol=tol, singular=singular) for r, R in zip(grid.r, grid.R)]
        J = np.array([q.value for q in res])
        converged = all(q.converged for q in res)
    lr, ll = right(grid.r, grid.R), left(grid.r, grid.R)
    value = np.abs(J - lr) + np.abs(J - ll)
    st = stabilization(grid.R, value) if len(grid) >= 4 else None
    return {
        "r": grid.r.tolist(),
        "R": grid.R.tolist(),
        "J": J.tolist(),
        "l_right": np.atleast_1d(lr).tolist(),
        "l_left": np.atleast_1d(ll).tolist(),
        "value": value.tolist(),
        "quadrature_converged": converged,
        "bounded": None if st is None else st.verdict.value,
        "normalization_verified": False,
    }

"""Decision procedures for the hypotheses and comparison criteria.

Each check evaluates a profile on a finite grid and turns it into a
tri-state :class:`~balax.grids.ConditionVerdict` with the stabilization rule
from :mod:`balax.grids`. Charges are treated as truncations of infinite
sequences unless ``finite=True`` is passed, in which case boundedness of the
profile is automatic.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .grids import ConditionVerdict, IntervalGrid, Verdict, geometric_points, stabilization
from .logmetrics import QuadResult, interval_log, interval_log_bar, J_tail
from .measures import ChargeLike, LineCharge, as_charge

__all__ = [
    "blaschke",
    "weak_blaschke_genus1",
    "lindelof_genus1",
    "separated_from_axis",
    "mr_compare",
    "PiecewiseLinear",
    "kahane_outer_density",
    "fit_lipschitz_k",
    "CAUCHY_TOL",
]

CAUCHY_TOL = 1e-9


def _check_r0(r0: float) -> None:
    if not r0 > 0:
        raise ValueError("r0 must be positive")


def _dyadic_radii(r0: float, rmax: float) -> np.ndarray:
    if rmax <= r0:
        return np.array([r0])
    return geometric_points(r0, rmax, 2.0)


def _shell_profile(charge, r0, rmax, term, absolute_outside: bool):
    """Partial sums of ``term(z) * mass`` over r0 <= |z| <= r on dyadic r."""
    c = as_charge(charge)
    rho = c.radii
    keep = rho >= r0
    z, m, rho = c.locs[keep], c.masses[keep], rho[keep]
    if rmax is None:
        rmax = max(float(rho.max()) if rho.size else r0, 4 * r0)
    radii = _dyadic_radii(r0, rmax)
    vals = m * term(z)
    order = np.argsort(rho, kind="stable")
    cum = np.concatenate([[0], np.cumsum(vals[order])])
    sums = cum[np.searchsorted(rho[order], radii, side="right")]
    prof = np.abs(sums) if absolute_outside else sums.real
    return radii, np.asarray(prof, dtype=float)


def _bounded_profile(radii, prof, finite: bool, cauchy: bool = False) -> tuple[Verdict, dict]:
    sup = float(np.max(prof)) if prof.size else 0.0
    if finite:
        return Verdict.YES, {"sup": sup, "rule": "finite charge"}
    if cauchy and prof.size >= 2:
        split = math.sqrt(radii[0] * radii[-1])
        inner = prof[radii <= split]
        if inner.size and float(prof[-1] - inner[-1]) <= CAUCHY_TOL:
            return Verdict.YES, {"sup": sup, "rule": "cauchy", "tol": CAUCHY_TOL}
    st = stabilization(radii, prof)
    if not cauchy and prof.size and float(np.max(np.abs(prof))) <= CAUCHY_TOL:
        return Verdict.YES, {"sup": sup, "rule": "vanishing profile"}
    return st.verdict, {"sup": sup, "rule": "stabilization", "stability": st.to_dict()}


def blaschke(charge: ChargeLike, r0: float = 1.0, *, rmax: float | None = None, finite: bool = False) -> ConditionVerdict:
    """Blaschke condition off the imaginary axis.

    Profile: r -> sum over r0 <= |z| <= r of |Re 1/z| * |mass| on dyadic
    radii up to ``rmax`` (default: the largest atom modulus).
    """
    _check_r0(r0)
    c = as_charge(charge).variation
    radii, prof = _shell_profile(c, r0, rmax, lambda z: np.abs((1 / z).real), False)
    verdict, witness = _bounded_profile(radii, prof, finite, cauchy=True)
    witness["integral"] = float(prof[-1]) if prof.size else 0.0
    return ConditionVerdict(verdict, witness, {"r": radii.tolist(), "partial_sum": prof.tolist()})


def weak_blaschke_genus1(charge: ChargeLike, r0: float = 1.0, *, rmax: float | None = None, finite: bool = False) -> ConditionVerdict:
    """Weak two-sided Blaschke condition of genus 1.

    The profile is |integral of |Re 1/z| d(charge)| over r0 <= |z| <= r: the
    charge keeps its sign, the modulus is taken outside.
    """
    _check_r0(r0)
    radii, prof = _shell_profile(charge, r0, rmax, lambda z: np.abs((1 / z).real), True)
    verdict, witness = _bounded_profile(radii, prof, finite)
    return ConditionVerdict(verdict, witness, {"r": radii.tolist(), "value": prof.tolist()})


def lindelof_genus1(charge: ChargeLike, r0: float = 1.0, *, rmax: float | None = None, finite: bool = False) -> ConditionVerdict:
    """Lindelof condition of genus 1: |sum of mass / z| over r0 <= |z| <= r."""
    _check_r0(r0)
    radii, prof = _shell_profile(charge, r0, rmax, lambda z: 1 / z, True)
    verdict, witness = _bounded_profile(radii, prof, finite)
    return ConditionVerdict(verdict, witness, {"r": radii.tolist(), "value": prof.tolist()})


def separated_from_axis(charge: ChargeLike, tail_radius: float = 1.0, *, factor: float = 1.2) -> ConditionVerdict:
    """Is the support eventually outside a pair of vertical angles around iR?

    The liminf of |Re z|/|z| is replaced by the infimum over atoms with
    |z| >= tail_radius. It must be positive, and the infimum over the outer
    half (log scale) of the tail may not drop below the inner one by more
    than ``factor`` (a ratio still decreasing at the edge of the data means
    it tends to 0).
    """
    c = as_charge(charge)
    rho = c.radii
    keep = rho >= tail_radius
    z, rho = c.locs[keep], rho[keep]
    if z.size == 0:
        return ConditionVerdict(Verdict.YES, {"inf_ratio": math.inf, "note": "no atoms in tail"}, {})
    ratio = np.abs(z.real) / rho
    inf_all = float(ratio.min())
    profile = {"tail_radius": tail_radius, "atoms": int(z.size)}
    if inf_all == 0:
        return ConditionVerdict(Verdict.NO, {"inf_ratio": 0.0}, profile)
    split = math.sqrt(rho.min() * rho.max())
    inner, outer = ratio[rho <= split], ratio[rho > split]
    if inner.size < 2 or outer.size < 2:
        verdict = Verdict.YES if z.size == 1 or rho.max() == rho.min() else Verdict.INCONCLUSIVE
        return ConditionVerdict(verdict, {"inf_ratio": inf_all}, profile)
    m_in, m_out = float(inner.min()), float(outer.min())
    profile.update({"split": split, "inf_inner": m_in, "inf_outer": m_out})
    verdict = Verdict.YES if m_out * factor >= m_in else Verdict.NO
    return ConditionVerdict(verdict, {"inf_ratio": inf_all}, profile)


def _combine(verdicts: Iterable[Verdict]) -> Verdict:
    vs = list(verdicts)
    if all(v is Verdict.YES for v in vs):
        return Verdict.YES
    if any(v is Verdict.NO for v in vs):
        return Verdict.NO
    return Verdict.INCONCLUSIVE


def mr_compare(
    Z: ChargeLike,
    W: ChargeLike,
    grid: IntervalGrid | None = None,
    slack: str = "none",
    *,
    b: float | None = None,
    eps: Sequence[float] | float | None = None,
    bar: bool = False,
    threshold: float = 0.05,
    min_span: float = 10.0,
) -> ConditionVerdict:
    """Compare interval functions: l_Z(r,R) <= l_W(r,R) + slack(r,R) + C ?

    ``slack`` is ``"none"``, ``"b_log"`` (b*log(R/r)), ``"eps"`` (every
    eps*log(R/r) in ``eps`` needs its own constant) or ``"vanishing"``
    (m(r)*log(R/r) with a fitted m tending to 0). With ``bar=True`` the
    barred interval functions are used instead.
    """
    Zc, Wc = as_charge(Z), as_charge(W)
    if grid is None:
        horizon = max(Zc.horizon(), Wc.horizon(), 4.0)
        grid = IntervalGrid.geometric(1.0, horizon, 1.25)
    lf = interval_log_bar if bar else interval_log
    lz, lw = lf(Zc)(grid.r, grid.R), lf(Wc)(grid.r, grid.R)
    G0 = lz - lw
    # differences at rounding level are exact ties
    noise = 64 * np.finfo(float).eps * (np.abs(lz) + np.abs(lw) + 1)
    G0 = np.where(np.abs(G0) <= noise, 0.0, G0)
    lr = grid.log_ratio
    profile = {"grid": grid.describe(), "r": grid.r.tolist(), "R": grid.R.tolist(), "gap": G0.tolist(), "bar": bar}

    if slack == "none" or slack == "b_log":
        if slack == "b_log":
            if b is None or b < 0:
                raise ValueError("slack 'b_log' needs b >= 0")
            G = G0 - b * lr
        else:
            G = G0
        st = stabilization(grid.R, G)
        witness = {"C": max(0.0, float(G.max())), "sup_G": float(G.max()), "stability": st.to_dict()}
        if b is not None:
            witness["b"] = b
        return ConditionVerdict(st.verdict, witness, profile)

    if slack == "eps":
        if eps is None:
            raise ValueError("slack 'eps' needs eps values")
        eps_list = [float(e) for e in np.atleast_1d(eps)]
        if any(e <= 0 for e in eps_list):
            raise ValueError("eps must be positive")
        table = []
        for e in eps_list:
            st = stabilization(grid.R, G0 - e * lr)
            table.append({"eps": e, "C_eps": max(0.0, st.sup_full), "verdict": st.verdict.value})
        verdict = _combine(Verdict(t["verdict"]) for t in table)
        return ConditionVerdict(verdict, {"C_eps": table}, profile)

    if slack == "vanishing":
        rs = np.unique(grid.r)
        m = np.full(rs.size, np.nan)
        for k, r in enumerate(rs):
            sel = (grid.r == r) & (grid.R >= min_span * r)
            if np.any(sel):
                m[k] = max(0.0, float(np.max(G0[sel] / lr[sel])))
        ok = ~np.isnan(m)
        if ok.sum() < 2:
            return ConditionVerdict(Verdict.INCONCLUSIVE, {"note": "grid too short to fit m(r)"}, profile)
        rs, m = rs[ok], m[ok]
        envelope = np.maximum.accumulate(m[::-1])[::-1]
        m_at = np.interp(grid.r, rs, envelope, right=envelope[-1])
        C = max(0.0, float(np.max(G0 - m_at * lr)))
        last, first = float(envelope[-1]), float(envelope[0])
        if last < threshold:
            verdict = Verdict.YES
        elif last >= 0.8 * first:
            verdict = Verdict.NO
        else:
            verdict = Verdict.INCONCLUSIVE
        witness = {"C": C, "m_r": rs.tolist(), "m": envelope.tolist(), "threshold": threshold, "min_span": min_span}
        return ConditionVerdict(verdict, witness, profile)

    raise ValueError(f"unknown slack {slack!r}")


class PiecewiseLinear:
    """Piecewise-linear function of the ordinate y with linear extrapolation."""

    def __init__(self, knots, values):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.size < 2 or knots.shape != values.shape:
            raise ValueError("need at least two knots with matching values")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        self.knots, self.values = knots, values

    @classmethod
    def constant(cls, c: float = 0.0) -> "PiecewiseLinear":
        return cls([0.0, 1.0], [c, c])

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0) -> "PiecewiseLinear":
        return cls([0.0, 1.0], [intercept, intercept + slope])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.knots)

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        k, v, s = self.knots, self.values, self.slopes
        out = np.interp(y, k, v)
        out = np.where(y < k[0], v[0] + s[0] * (y - k[0]), out)
        out = np.where(y > k[-1], v[-1] + s[-1] * (y - k[-1]), out)
        return float(out) if out.ndim == 0 else out


def _as_distribution(F) -> Callable:
    return F.distribution if isinstance(F, LineCharge) else F


def kahane_outer_density(
    mu: ChargeLike,
    k: PiecewiseLinear | None = None,
    *,
    r0: float = 1.0,
    tol: float = 1e-8,
    finite: bool = False,
) -> ConditionVerdict:
    """Finite outer Kahane density, relative to the supplied Lipschitz k.

    Computes F, the distribution function of the genus-0 balayage of
    ``mu``, and the logarithmic integral of |F - k| over |y| >= 1. A "no"
    only says that this particular k fails.
    """
    from .balayage import balayage_genus0

    c = as_charge(mu)
    if len(c) and not c.is_positive():
        raise ValueError("kahane_outer_density needs a positive measure")
    bl = blaschke(c, r0, finite=finite)
    if bl.holds is Verdict.NO:
        raise ValueError("measure fails the Blaschke condition")
    if k is None:
        k = PiecewiseLinear.constant(0.0)
    res = balayage_genus0(c, finite=finite)
    F = res.line.distribution
    v = lambda z: abs(F(z.imag) - k(z.imag))
    jumps = res.line.atom_y
    J: QuadResult = J_tail(v, tol=tol, singular=jumps)
    lip = k.lipschitz
    if J.converged and math.isfinite(J.value) and math.isfinite(lip):
        verdict = Verdict.YES
    elif not J.converged:
        verdict = Verdict.NO
    else:
        verdict = Verdict.INCONCLUSIVE
    if bl.holds is Verdict.INCONCLUSIVE and verdict is Verdict.YES:
        verdict = Verdict.INCONCLUSIVE
    witness = {
        "J": J.value,
        "J_error": J.error,
        "J_converged": J.converged,
        "lipschitz": lip,
        "k_knots": k.knots.tolist(),
        "k_values": k.values.tolist(),
        "blaschke": bl.holds.value,
    }
    return ConditionVerdict(verdict, witness, {"tol": tol})


def fit_lipschitz_k(F, y_max: float = 1024.0, *, slope_bound: float = 1.0, refine: int = 4) -> PiecewiseLinear:
    """Piecewise-linear k on the dyadic knots 0, +-1, +-2, ..., +-y_max.

    Minimizes a trapezoidal discretization of int_{|y|>=1} |F - k| / y^2 dy
    subject to |slope| <= ``slope_bound``, as a linear program. ``refine``
    extra samples per knot interval enter the discretization.
    """
    if y_max < 2:
        raise ValueError("empty grid: y_max must be at least 2")
    F = _as_distribution(F)
    n = int(math.floor(math.log2(y_max) + 1e-12))
    pos = 2.0 ** np.arange(n + 1)
    knots = np.concatenate([-pos[::-1], [0.0], pos])
    K = knots.size

    samples, weights = [], []
    for sgn in (1.0, -1.0):
        ys = np.unique(np.concatenate([np.geomspace(a, b, refine + 2) for a, b in zip(pos[:-1], pos[1:])]))
        w = np.zeros(ys.size)
        dy = np.diff(ys)
        w[:-1] += dy / 2
        w[1:] += dy / 2
        samples.append(sgn * ys)
        weights.append(w / ys**2)
    samples.append(np.array([0.0]))
    weights.append(np.array([1e-6]))
    ys = np.concatenate(samples)
    w = np.concatenate(weights)
    S = ys.size
    Fs = np.asarray([float(F(y)) for y in ys])

    # interpolation matrix: k(ys) = A @ values
    A = np.zeros((S, K))
    idx = np.clip(np.searchsorted(knots, ys, side="right") - 1, 0, K - 2)
    t = (ys - knots[idx]) / (knots[idx + 1] - knots[idx])
    A[np.arange(S), idx] = 1 - t
    A[np.arange(S), idx + 1] = t

    # variables: [values (K), errors (S)]
    c = np.concatenate([np.zeros(K), w])
    I = np.eye(S)
    A_ub = [np.hstack([-A, -I]), np.hstack([A, -I])]
    b_ub = [-Fs, Fs]
    D = np.zeros((K - 1, K))
    D[np.arange(K - 1), np.arange(K - 1)] = -1
    D[np.arange(K - 1), np.arange(1, K)] = 1
    bound = slope_bound * np.diff(knots)
    Z = np.zeros((K - 1, S))
    A_ub += [np.hstack([D, Z]), np.hstack([-D, Z])]
    b_ub += [bound, bound]
    res = linprog(
        c,
        A_ub=np.vstack(A_ub),
        b_ub=np.concatenate(b_ub),
        bounds=[(None, None)] * K + [(0, None)] * S,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"Lipschitz fit failed: {res.message}")
    return PiecewiseLinear(knots, res.x[:K])

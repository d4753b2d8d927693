"""Genus-1 canonical products, integral means and growth checks.

Subharmonic functions are passed around as plain evaluators: callables
taking a complex point (or an array of them) and returning log-scale
values, with -inf allowed at zeros.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import zeta

from .grids import Verdict
from .logmetrics import J_tail
from .measures import Divisor

__all__ = [
    "ProgressionTail",
    "CanonicalProduct",
    "ProductValue",
    "log_abs",
    "circle_mean",
    "disk_mean",
    "sup_on_circle",
    "GrowthReport",
    "growth_report",
    "CheckResult",
    "check_a3",
    "check_b3_c3",
    "check_a1_bound",
]

Evaluator = Callable[[complex], float]


def _log_abs_E1(w):
    """log|E(w;1)| = log|1 - w| + Re w, elementwise; -inf at w = 1."""
    w = np.asarray(w, dtype=complex)
    x, y = w.real, w.imag
    with np.errstate(divide="ignore"):
        return 0.5 * np.log1p(x * x + y * y - 2 * x) + x


@dataclass(frozen=True)
class ProgressionTail:
    """Omitted atoms direction * (first + j * step), j >= 0, of equal multiplicity.

    Their contribution sum log|E(z/a_j; 1)| = -Re sum_{n>=2} z^n S_n / n with
    S_n = (direction * step)^-n * zeta(n, first/step), valid for |z| < first.
    """

    first: float
    step: float
    direction: complex = 1.0
    multiplicity: int = 1
    max_terms: int = 400

    def __post_init__(self):
        if not (self.first > 0 and self.step > 0):
            raise ValueError("progression tail needs first > 0 and step > 0")
        if abs(abs(self.direction) - 1) > 1e-12:
            raise ValueError("direction must have modulus 1")

    def contribution(self, z) -> tuple[np.ndarray, np.ndarray]:
        """Tail sum and a certified bound on the series remainder."""
        z = np.asarray(z, dtype=complex)
        t = np.abs(z) / self.first
        if np.any(t >= 1):
            raise ValueError(f"tail series needs |z| < {self.first}")
        q = self.first / self.step
        tmax = float(t.max()) if t.size else 0.0
        zeta2 = float(zeta(2, q)) / self.step**2
        total = np.zeros(z.shape, dtype=complex)
        power = z * z
        n = 2
        while True:
            coef = float(zeta(n, q)) / (self.step**n) / n * self.direction ** (-n)
            total += coef * power
            # remainder after term n: |z|^2 zeta2 t^(n-1) / ((n+1)(1-t))
            bound = zeta2 * np.abs(z) ** 2 * t ** (n - 1) / ((n + 1) * (1 - t))
            if n >= self.max_terms or float(np.max(bound, initial=0.0)) < 1e-17 or tmax == 0:
                break
            n += 1
            power = power * z
        m = self.multiplicity
        return -m * total.real, m * bound


@dataclass(frozen=True)
class ProductValue:
    value: float
    error: float
    hit: bool = False

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class CanonicalProduct:
    """z^monomial times the genus-1 Weierstrass product over ``divisor``.

    ``tails`` describe atoms left out of the finite divisor; their
    contribution is added in closed form with a certified remainder.
    """

    divisor: Divisor
    monomial: int = 0
    tails: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.monomial < 0:
            raise ValueError("monomial power must be non-negative")
        if np.any(self.divisor.locs == 0):
            raise ValueError("put the zero at the origin in `monomial`")

    @classmethod
    def arithmetic(cls, step: float = 1.0, count: int = 10_000, *, two_sided: bool = True, tail: bool = True):
        """Zeros at step*k, 1 <= k <= count (and at -step*k when two-sided)."""
        div = Divisor.progression(step, step, count)
        tails = [ProgressionTail(step * (count + 1), step, 1.0)] if tail else []
        if two_sided:
            div = div + Divisor.progression(step, step, count, direction=-1)
            if tail:
                tails.append(ProgressionTail(step * (count + 1), step, -1.0))
        return cls(div, 0, tuple(tails))

    @property
    def singular_points(self) -> np.ndarray:
        pts = self.divisor.locs
        return np.append(pts, 0j) if self.monomial else pts

    @property
    def truncation_radius(self) -> float:
        return self.divisor.horizon()

    def evaluate(self, z) -> ProductValue | list:
        """log|f(z)| with an absolute error estimate."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        vals, errs = self._evaluate(zz)
        if np.ndim(z) == 0:
            return ProductValue(float(vals[0]), float(errs[0]), bool(np.isneginf(vals[0])))
        return [ProductValue(float(v), float(e), bool(np.isneginf(v))) for v, e in zip(vals, errs)]

    def _evaluate(self, z: np.ndarray):
        locs, mult = self.divisor.locs, self.divisor.mult.astype(float)
        out = np.zeros(z.shape)
        scale = np.zeros(z.shape)
        chunk = max(1, 2_000_000 // max(locs.size, 1))
        for s in range(0, z.size, chunk):
            zs = z[s : s + chunk]
            if locs.size:
                terms = _log_abs_E1(zs[:, None] / locs[None, :]) * mult
                out[s : s + chunk] = terms.sum(axis=1)
                with np.errstate(invalid="ignore"):
                    scale[s : s + chunk] = np.abs(terms).sum(axis=1)
        if self.monomial:
            with np.errstate(divide="ignore"):
                out += self.monomial * np.log(np.abs(z))
        err = 8 * np.finfo(float).eps * np.nan_to_num(scale, posinf=0.0)
        for tail in self.tails:
            val, bound = tail.contribution(z)
            out = out + val
            err = err + bound
        return out, err

    def log_abs(self, z):
        if np.ndim(z) == 0 and not self.tails:
            w = complex(z) / self.divisor.locs
            x = w.real
            with np.errstate(divide="ignore"):
                val = float(np.dot(self.divisor.mult, 0.5 * np.log1p(x * x + w.imag * w.imag - 2 * x) + x))
                if self.monomial:
                    val += self.monomial * math.log(abs(z)) if z != 0 else -math.inf
            return val
        vals, _ = self._evaluate(np.atleast_1d(np.asarray(z, dtype=complex)))
        return float(vals[0]) if np.ndim(z) == 0 else vals

    __call__ = log_abs


def log_abs(product: CanonicalProduct, z):
    return product.log_abs(z)


def _vectorized(v: Evaluator):
    """Wrap ``v`` so that it maps complex arrays to float arrays."""

    def f(z):
        z = np.asarray(z, dtype=complex)
        try:
            out = np.asarray(v(z), dtype=float)
            if out.shape == z.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(v(complex(p))) for p in z.ravel()]).reshape(z.shape)

    return f


def _singular_points(v) -> np.ndarray | None:
    pts = getattr(v, "singular_points", None)
    return None if pts is None else np.asarray(pts, dtype=complex)


def circle_mean(v: Evaluator, z: complex = 0j, r: float = 1.0, *, tol: float = 1e-8, max_level: int = 8) -> float:
    """C_v(z, r), the mean of v over the circle |zeta - z| = r.

    The periodic trapezoid rule is doubled until two levels agree. When
    singular points lie close to the circle (known from a
    ``singular_points`` attribute, else detected as deep dips in the
    samples) the circle is split at their angles and integrated adaptively.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    f = _vectorized(v)
    z = complex(z)
    sing = _singular_points(v)
    if sing is not None and sing.size:
        near = sing[np.abs(np.abs(sing - z) - r) < 0.02 * r]
        if near.size:
            return _circle_mean_split(f, z, r, tol, np.angle(near - z), v)
    n = 64
    prev = None
    thetas = vals = None
    for _ in range(max_level):
        thetas = 2 * math.pi * np.arange(n) / n
        vals = f(z + r * np.exp(1j * thetas))
        if not np.all(np.isfinite(vals)):
            break
        cur = float(np.mean(vals))
        if prev is not None and abs(cur - prev) <= tol:
            return cur
        prev = cur
        n *= 2
    finite = np.isfinite(vals)
    if np.any(vals[~finite] > 0):
        raise ValueError("evaluator returned +inf on the circle")
    spread = np.nan_to_num(vals, neginf=-1e300)
    med = float(np.median(vals[finite])) if finite.any() else 0.0
    dips = spread < med - 5.0
    order = np.argsort(spread[dips])[:50]
    return _circle_mean_split(f, z, r, tol, thetas[dips][order], v)


def _scalar(v, f):
    """Fast scalar call of ``v``, falling back to the vectorized wrapper."""
    try:
        float(v(0.5 + 0.25j))
        return lambda p: float(v(p))
    except (TypeError, ValueError):
        return lambda p: float(f(np.array([p]))[0])


def _circle_mean_split(f, z, r, tol, angles, v=None):
    h = _scalar(v, f) if v is not None else (lambda p: float(f(np.array([p]))[0]))
    g = lambda t: h(z + r * cmath.exp(1j * t))
    base = float(np.min(angles)) if len(angles) else 0.0
    cuts = np.unique(np.concatenate([(np.asarray(angles) - base) % (2 * math.pi), [0.0, 2 * math.pi]]))
    total, err = 0.0, 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-14:
            continue
        val, e = quad(lambda t: g(t + base), a, b, epsabs=tol / 4, epsrel=0, limit=500)
        total += val
        err += e
    if not math.isfinite(total) or err > 100 * tol * 2 * math.pi:
        raise ValueError("circle mean did not converge (non-integrable evaluator?)")
    return total / (2 * math.pi)


def disk_mean(v: Evaluator, z: complex = 0j, r: float = 1.0, *, tol: float = 1e-7) -> float:
    """B_v(z, r) = (2/r^2) * integral over t in (0, r) of C_v(z, t) t dt.

    The t-integral is split at the distances from z to known singular points.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    inner = tol / 10
    sing = _singular_points(v)
    pts = None
    if sing is not None and sing.size:
        d = np.abs(sing - complex(z))
        d = np.unique(d[(d > 0) & (d < r)])
        pts = d[:100].tolist() or None
    val = quad(
        lambda t: circle_mean(v, z, t, tol=inner) * t if t > 0 else 0.0,
        0,
        r,
        epsabs=tol * r * r / 2,
        epsrel=0,
        limit=200,
        points=pts,
    )[0]
    return 2 * val / r**2


def sup_on_circle(v: Evaluator, z: complex = 0j, r: float = 1.0, samples: int = 720, *, detail: bool = False):
    """M_v(z, r), a lower bound from a theta grid plus local refinement."""
    if not r > 0:
        raise ValueError("radius must be positive")
    f = _vectorized(v)
    z = complex(z)
    thetas = 2 * math.pi * np.arange(samples) / samples
    vals = f(z + r * np.exp(1j * thetas))
    h = 2 * math.pi / samples
    best_t, best = float(thetas[np.argmax(vals)]), float(np.max(vals))
    for k in np.argsort(vals)[::-1][:4]:
        res = minimize_scalar(
            lambda t: -float(f(np.array([z + r * np.exp(1j * t)]))[0]),
            bounds=(thetas[k] - h, thetas[k] + h),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > best:
            best, best_t = float(-res.fun), float(res.x % (2 * math.pi))
    if detail:
        return {"value": best, "theta": best_t, "samples": samples, "lower_bound": True}
    return best


@dataclass(frozen=True)
class GrowthReport:
    type1: float
    order: float
    indicator: dict
    radii: list
    profile: dict

    def indicator_at(self, theta: float) -> float:
        """Indicator at the tabulated angle closest to ``theta`` (mod 2 pi)."""
        keys = np.array(list(self.indicator))
        d = np.abs((keys - theta + math.pi) % (2 * math.pi) - math.pi)
        return self.indicator[float(keys[np.argmin(d)])]

    def to_dict(self) -> dict:
        return {
            "type1": self.type1,
            "order": self.order,
            "indicator": {f"{k:.17g}": val for k, val in self.indicator.items()},
            "radii": self.radii,
            "profile": self.profile,
        }


def _tail(radii: np.ndarray) -> np.ndarray:
    return radii >= math.sqrt(radii.min() * radii.max())


def growth_report(v: Evaluator, radii: Sequence[float], thetas: Sequence[float] | None = None, *, samples: int = 720) -> GrowthReport:
    """Type, order and indicator as tail suprema over the outer half of ``radii``."""
    radii = np.asarray(sorted(radii), dtype=float)
    if radii.size == 0:
        raise ValueError("empty radius grid")
    if thetas is None:
        thetas = np.linspace(-math.pi, math.pi, 9)[:-1]
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size == 0:
        raise ValueError("empty angle grid")
    f = _vectorized(v)
    M = np.array([sup_on_circle(v, 0j, r, samples) for r in radii])
    tail = _tail(radii)
    type1 = max(0.0, float(np.max(M[tail] / radii[tail])))
    big = tail & (radii > 1)
    order = float(np.max(np.log1p(np.maximum(M[big], 0)) / np.log(radii[big]))) if np.any(big) else math.nan
    pts = radii[:, None] * np.exp(1j * thetas[None, :])
    vals = f(pts) / radii[:, None]
    ind = vals[tail].max(axis=0)
    norm = (thetas + math.pi) % (2 * math.pi) - math.pi
    indicator = {float(t): float(val) for t, val in zip(norm, ind)}
    profile = {"M": M.tolist(), "M_over_r": (M / radii).tolist()}
    return GrowthReport(type1, order, indicator, radii.tolist(), profile)


@dataclass(frozen=True)
class CheckResult:
    verdict: Verdict
    max_violation: float
    witness: dict
    profile: dict

    def __bool__(self) -> bool:
        return self.verdict is Verdict.YES

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "max_violation": self.max_violation,
            "witness": self.witness,
            "profile": self.profile,
        }


def _as_q(q) -> Callable[[float], float]:
    if callable(q):
        return lambda y: float(q(y))
    c = float(q)
    return lambda y: c


def _default_ys(y0: float, y_max: float, n: int) -> np.ndarray:
    pos = np.geomspace(y0, y_max, n)
    return np.concatenate([-pos[::-1], pos])


def _validate_q(q, ys: np.ndarray, tol: float) -> dict:
    qs = np.array([q(y) for y in ys])
    if np.any(~np.isfinite(qs)) or np.any(qs <= 0):
        raise ValueError("q must be positive and finite on the samples")
    pos, neg = ys > 0, ys < 0
    order_pos = np.argsort(ys[pos])
    order_neg = np.argsort(ys[neg])
    if np.any(np.diff(qs[pos][order_pos]) < 0) or np.any(np.diff(qs[neg][order_neg]) > 0):
        raise ValueError("q must increase on the positive and decrease on the negative half-axis")
    J = J_tail(lambda z: q(z.imag), tol=tol)
    if not J.converged or not math.isfinite(J.value):
        raise ValueError("logarithmic integral of q does not converge")
    return {"J_q": J.value, "J_error": J.error}


def _samples(f, ys):
    return f(1j * np.asarray(ys, dtype=float))


def check_a3(
    U: Evaluator,
    M: Evaluator,
    q=1.0,
    y0: float = 1.0,
    ys: Sequence[float] | None = None,
    *,
    y_max: float = 100.0,
    n: int = 24,
    tol: float = 1e-6,
) -> CheckResult:
    """U(iy) <= C_M(iy, q(iy)) + q(iy) at the samples with |y| >= y0."""
    qf = _as_q(q)
    ys = _default_ys(y0, y_max, n) if ys is None else np.asarray(ys, dtype=float)
    ys = ys[np.abs(ys) >= y0]
    qinfo = _validate_q(qf, ys, 1e-8)
    u = _samples(_vectorized(U), ys)
    means = np.array([circle_mean(M, 1j * y, qf(y)) for y in ys])
    qs = np.array([qf(y) for y in ys])
    gap = u - means - qs
    return _verdict_from_gap(gap, ys, tol, qinfo)


def _verdict_from_gap(gap, ys, tol, extra: dict) -> CheckResult:
    k = int(np.argmax(gap))
    worst = float(gap[k])
    verdict = Verdict.YES if worst <= tol else Verdict.NO
    witness = {"argmax_y": float(ys[k]), "tol": tol, **extra}
    return CheckResult(verdict, worst, witness, {"y": np.asarray(ys).tolist(), "violation": np.asarray(gap).tolist()})


def check_b3_c3(
    U: Evaluator,
    M: Evaluator,
    q=None,
    mode: str = "c3",
    eps: float = 0.1,
    ys: Sequence[float] | None = None,
    *,
    y0: float = 1.0,
    y_max: float = 100.0,
    n: int = 24,
    tol: float = 1e-6,
    threshold: float = 0.05,
) -> CheckResult:
    """U(iy) <= C_M(iy, q(iy)) + slack at the samples.

    ``c3``: q(iy) = eps|y| and slack eps|y|, checked as a hard inequality.
    ``b3``: q must be o(|y|) (default sqrt(1 + |y|)); the slack
    s(y) = max(0, U - C_M) is fitted and s(y)/|y| must decay below
    ``threshold`` on the tail.
    """
    ys = _default_ys(y0, y_max, n) if ys is None else np.asarray(ys, dtype=float)
    ys = ys[ys != 0]
    u = _samples(_vectorized(U), ys)
    if mode == "c3":
        if not eps > 0:
            raise ValueError("eps must be positive")
        means = np.array([circle_mean(M, 1j * y, eps * abs(y)) for y in ys])
        gap = u - means - eps * np.abs(ys)
        return _verdict_from_gap(gap, ys, tol, {"mode": "c3", "eps": eps})
    if mode != "b3":
        raise ValueError("mode must be 'b3' or 'c3'")
    qf = _as_q(q) if q is not None else (lambda y: math.sqrt(1 + abs(y)))
    qs = np.array([qf(y) for y in ys])
    if np.any(qs <= 0):
        raise ValueError("q must be positive")
    ay = np.abs(ys)
    ratio = qs / ay
    far, near = ratio[np.argmax(ay)], ratio[np.argmin(ay)]
    if not (far < near and far <= 0.25):
        raise ValueError("q does not look like o(|y|) on the sample grid")
    means = np.array([circle_mean(M, 1j * y, qf(y)) for y in ys])
    slack = np.maximum(u - means, 0.0)
    rel = slack / ay
    order = np.argsort(ay)
    envelope = np.maximum.accumulate(rel[order][::-1])[::-1]
    tail_value = float(envelope[-1])
    if float(slack.max()) <= tol or tail_value < threshold:
        verdict = Verdict.YES
    elif tail_value >= 0.8 * float(envelope[0]):
        verdict = Verdict.NO
    else:
        verdict = Verdict.INCONCLUSIVE
    witness = {"mode": "b3", "slack_over_y_tail": tail_value, "threshold": threshold, "max_slack": float(slack.max())}
    profile = {"y": ys.tolist(), "slack": slack.tolist(), "slack_over_y_envelope": envelope.tolist()}
    return CheckResult(verdict, float(np.max(u - means)), witness, profile)


def check_a1_bound(
    u: Evaluator,
    f: CanonicalProduct,
    M: Evaluator,
    p: float = 0.0,
    ys: Sequence[float] | None = None,
    *,
    y_max: float = 50.0,
    n: int = 41,
    tol: float = 1e-6,
    growth_radii: Sequence[float] | None = None,
) -> CheckResult:
    """u(iy) + log|f(iy)| <= B_M(iy, (1 + |y|)^-p) at the samples.

    Samples where f vanishes are excluded (the bound holds trivially there).
    The finite-type part is reported through :func:`growth_report` of
    u + log|f|.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    ys = np.linspace(-y_max, y_max, n) if ys is None else np.asarray(ys, dtype=float)
    vals = [f.evaluate(1j * y) for y in ys]
    logf = np.array([v.value for v in vals])
    errs = np.array([v.error for v in vals])
    keep = np.isfinite(logf)
    uf = _vectorized(u)
    lhs = _samples(uf, ys[keep]) + logf[keep]
    rhs = np.array([disk_mean(M, 1j * y, (1 + abs(y)) ** -p) for y in ys[keep]])
    gap = lhs - rhs
    allowance = tol + float(errs[keep].max(initial=0.0))
    if growth_radii is None:
        growth_radii = np.geomspace(1, max(2.0, y_max), 6)
    g = growth_report(lambda z: uf(z) + f.log_abs(z), growth_radii, samples=180)
    extra = {"p": p, "excluded_y": ys[~keep].tolist(), "type1": g.type1, "order": g.order, "eval_error": allowance - tol}
    if gap.size == 0:
        return CheckResult(Verdict.YES, -math.inf, extra, {"y": [], "violation": []})
    return _verdict_from_gap(gap, ys[keep], allowance, extra)

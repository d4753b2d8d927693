import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from balax.entire import (
    CanonicalProduct,
    ProgressionTail,
    check_a1_bound,
    check_a3,
    check_b3_c3,
    circle_mean,
    disk_mean,
    growth_report,
    sup_on_circle,
)
from balax.grids import Verdict
from balax.measures import Divisor
from oracles import jensen_circle_mean, jensen_disk_mean, log_abs_sin_pi, log_abs_sinc_pi, log_product

SINC = CanonicalProduct.arithmetic(1.0, 2000)


def test_log_abs_examples():
    for z in (1j + 1e-6, 1j - 1e-6):
        v = SINC.evaluate(z)
        assert v.value == pytest.approx(math.log(math.sinh(math.pi) / math.pi), abs=1e-4)
        assert v.error < 1e-6
    two = CanonicalProduct(Divisor.from_points([2.0]))
    assert two(1.0) == pytest.approx(math.log(0.5) + 0.5, abs=1e-12)
    assert CanonicalProduct(Divisor.empty())(3 + 4j) == 0


def test_zero_hit_and_monomial():
    v = SINC.evaluate(3.0)
    assert v.hit and v.value == -math.inf
    p = CanonicalProduct(Divisor.empty(), monomial=2)
    assert p(2j) == pytest.approx(2 * math.log(2))
    assert p(0) == -math.inf
    with pytest.raises(ValueError):
        CanonicalProduct(Divisor.from_points([0.0]))


def test_against_sinc_at_random_points():
    rng = np.random.default_rng(7)
    z = rng.uniform(-20, 20, 100) + 1j * rng.uniform(-20, 20, 100)
    vals = SINC.evaluate(z)
    ref = log_abs_sinc_pi(z)
    for v, r in zip(vals, ref):
        assert abs(v.value - r) <= max(v.error, 1e-12) + 1e-9


def test_tail_contribution_is_certified():
    z = 3.3 + 2.1j
    tail = ProgressionTail(51.0, 1.0)
    val, bound = tail.contribution(np.array([z]))
    direct = math.fsum(math.log(abs(1 - z / k)) + (z / k).real for k in range(51, 2_000_000))
    # the direct sum misses terms beyond 2e6, of size ~ |z|^2 / (2 * 2e6)
    assert abs(val[0] - direct) <= bound[0] + 3e-6
    with pytest.raises(ValueError):
        tail.contribution(np.array([60.0]))


def test_finite_product_matches_direct():
    pts = [1 + 1j, -2.5, 3j, 0.7 - 4j]
    P = CanonicalProduct(Divisor.from_points(pts))
    for z in (0.3 + 0.2j, -5 + 2j, 10j):
        assert P(z) == pytest.approx(log_product(pts, z), abs=1e-12)


def test_circle_mean_jensen_examples():
    assert circle_mean(SINC, 0j, 0.5) == pytest.approx(0.0, abs=1e-12)
    pts = [1.0, 2j, -3.0]
    P = CanonicalProduct(Divisor.from_points(pts))
    for z, r in ((0j, 2.5), (0.5 + 0.5j, 1.3), (1.0, 0.5)):
        assert circle_mean(P, z, r) == pytest.approx(jensen_circle_mean(pts, z, r), abs=1e-7)


def test_disk_mean_jensen():
    pts = [1.0, 2j, -3.0]
    P = CanonicalProduct(Divisor.from_points(pts))
    for z, r in ((0j, 2.5), (0.5 + 0.5j, 1.3)):
        assert disk_mean(P, z, r) == pytest.approx(jensen_disk_mean(pts, z, r), abs=1e-6)


def test_means_reject_bad_radius():
    with pytest.raises(ValueError):
        circle_mean(SINC, 0j, 0)
    with pytest.raises(ValueError):
        sup_on_circle(SINC, 0j, -1)


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False).filter(lambda a: abs(a) > 0.2), min_size=1, max_size=5),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    st.floats(0.2, 3),
)
def test_mean_chain(pts, z, r):
    P = CanonicalProduct(Divisor.from_points(pts))
    B, C, M = disk_mean(P, z, r), circle_mean(P, z, r), sup_on_circle(P, z, r)
    assert B <= C + 1e-6
    assert C <= M + 1e-9
    assert C == pytest.approx(jensen_circle_mean(pts, z, r), abs=1e-6)


def test_sup_on_circle_examples():
    sin = lambda z: log_abs_sin_pi(z)
    assert sup_on_circle(sin, 0j, 10) == pytest.approx(10 * math.pi - math.log(2), abs=0.1)
    assert sup_on_circle(lambda z: np.real(z), 0j, 1) == pytest.approx(1, abs=1e-9)
    d = sup_on_circle(lambda z: np.zeros(np.shape(z)), 0j, 1, detail=True)
    assert d["value"] == 0 and d["lower_bound"]


def test_growth_report_examples():
    g = growth_report(lambda z: np.real(z), [1, 2, 4, 8, 16], thetas=[0, math.pi / 2, math.pi])
    assert g.type1 == pytest.approx(1, abs=1e-9)
    assert g.indicator_at(0) == pytest.approx(1)
    assert g.indicator_at(math.pi) == pytest.approx(-1)
    assert g.indicator_at(math.pi / 2) == pytest.approx(0, abs=1e-12)
    z = growth_report(lambda z: np.zeros(np.shape(z)), [1, 2, 4])
    assert z.type1 == 0
    with pytest.raises(ValueError):
        growth_report(lambda z: np.real(z), [])


def test_check_a3_examples():
    sin = lambda z: log_abs_sin_pi(z)
    zero = lambda z: np.zeros(np.shape(z))
    assert check_a3(sin, zero, 1.0).verdict is Verdict.NO
    assert check_a3(lambda z: -np.ones(np.shape(z)), zero, 1.0).verdict is Verdict.YES
    with pytest.raises(ValueError):
        check_a3(zero, zero, lambda y: 1 / (1 + abs(y)) if y > 0 else 1.0)
    with pytest.raises(ValueError):
        check_a3(zero, zero, lambda y: 1 + abs(y))


def test_check_c3_examples():
    U = lambda z: log_abs_sin_pi(z) + math.log(2)
    M = lambda z: log_abs_sin_pi(z)
    assert check_b3_c3(U, M, mode="c3", eps=0.2, y0=10).verdict is Verdict.YES
    assert check_b3_c3(U, M, mode="c3", eps=0.01, y0=10).verdict is Verdict.NO
    with pytest.raises(ValueError):
        check_b3_c3(U, M, mode="c3", eps=0)
    with pytest.raises(ValueError):
        check_b3_c3(U, M, mode="x")


def test_check_b3():
    M = lambda z: log_abs_sin_pi(z)
    assert check_b3_c3(M, M, mode="b3").verdict is Verdict.YES
    # U exceeds M by a quarter of |y|: the relative slack never decays
    U = lambda z: log_abs_sin_pi(z) + 0.25 * np.abs(np.imag(z))
    assert check_b3_c3(U, M, mode="b3").verdict is Verdict.NO
    with pytest.raises(ValueError):
        check_b3_c3(M, M, q=lambda y: abs(y), mode="b3")


def test_check_a1_examples():
    f = CanonicalProduct.arithmetic(1.0, 500)
    zero = lambda z: np.zeros(np.shape(z))
    ys = np.linspace(5, 40, 8)
    res = check_a1_bound(zero, f, f, p=1.0, ys=ys)
    assert res.verdict is Verdict.YES
    # finite radii (<= 50) underestimate the type by about log(2 pi r) / r
    assert math.pi - 0.2 <= res.witness["type1"] <= math.pi
    res = check_a1_bound(lambda z: np.ones(np.shape(z)), f, f, p=1.0, ys=ys)
    assert res.verdict is Verdict.NO and res.max_violation == pytest.approx(1, abs=1e-3)
    g = CanonicalProduct(Divisor.from_points([7j]))
    res = check_a1_bound(zero, g, g, ys=[0.0, 7.0])
    assert res.witness["excluded_y"] == [7.0]
    with pytest.raises(ValueError):
        check_a1_bound(zero, f, f, p=-1)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from balax.measures import (
    AtomicCharge,
    Divisor,
    InputError,
    counting_radial,
    distribution_on_line,
    parse_atoms,
    upper_density_profile,
)


def test_counting_radial_examples():
    assert counting_radial(Divisor.from_points([1, 2, 3]), 2.5) == 2
    assert counting_radial(AtomicCharge.from_atoms([1, -1], [1, -1]), 1) == 0
    assert counting_radial(Divisor.progression(1, 1, 10), 10) == 10


def test_counting_radial_closed_disk_and_empty():
    assert counting_radial(Divisor.from_points([2j]), 2.0) == 1
    assert counting_radial(AtomicCharge.empty(), 5.0) == 0


def test_divisor_canonicalization_sums_multiplicities():
    d = Divisor.from_points([1, 1, 2 + 1j], [1, 2, 1])
    assert d.count() == 4
    assert sorted(d.mult.tolist()) == [1, 3]


def test_divisor_rejects_zero_and_bad_multiplicity():
    with pytest.raises(ValueError):
        Divisor.from_points([0, 1])
    with pytest.raises(ValueError):
        Divisor.from_points([1], [0])
    with pytest.raises(ValueError):
        Divisor.from_points([1], [1.5])
    assert len(Divisor.from_points([0, 1], allow_zero=True)) == 2


def test_atomic_charge_parts():
    c = AtomicCharge.from_atoms([1, 2, 3j], [2.0, -1.0, 0.5])
    assert c.total_variation() == pytest.approx(3.5)
    assert c.total_mass() == pytest.approx(1.5)
    assert c.positive.total_mass() == pytest.approx(2.5)
    assert c.negative.total_mass() == pytest.approx(1.0)
    assert len(c.on_axis()) == 1 and len(c.off_axis()) == 2


def test_cancelling_atoms_are_dropped():
    c = AtomicCharge.from_atoms([1, 1], [1.0, -1.0])
    assert len(c) == 0


def test_distribution_on_line_examples():
    F = distribution_on_line(AtomicCharge.from_atoms([1j]))
    assert F.distribution(0.5) == 0 and F.distribution(1.0) == 1 and F.distribution(3) == 1
    G = distribution_on_line(AtomicCharge.from_atoms([-1j]))
    assert G.distribution(-2.0) == -1
    assert G.distribution(-1.0) == -1
    assert G.distribution(-0.5) == 0
    E = distribution_on_line(AtomicCharge.empty())
    assert np.all(E.distribution(np.linspace(-3, 3, 7)) == 0)


def test_distribution_on_line_rejects_off_axis():
    with pytest.raises(ValueError):
        distribution_on_line(AtomicCharge.from_atoms([1e-300 + 1j]))


def test_upper_density_profile_examples():
    assert upper_density_profile(Divisor.progression(1, 1, 100), [100])[0] == pytest.approx(1.0)
    assert upper_density_profile(AtomicCharge.from_atoms([1], [5.0]), [10])[0] == pytest.approx(0.5)
    squares = Divisor.from_points(np.arange(1, 101, dtype=float) ** 2)
    assert upper_density_profile(squares, [1e4])[0] == pytest.approx(0.01)


def test_parse_atoms_examples():
    d = parse_atoms("1 0\n2 0\n")
    assert isinstance(d, Divisor) and d.count() == 2
    c = parse_atoms("0 1 2.5")
    assert isinstance(c, AtomicCharge)
    assert c.locs[0] == 1j and c.masses[0] == 2.5
    with pytest.raises(InputError, match=":1:"):
        parse_atoms("x y")


def test_parse_atoms_comments_and_zero():
    d = parse_atoms("# header\n3 4 2  # double zero\n\n")
    assert isinstance(d, Divisor) and d.count() == 2
    assert isinstance(parse_atoms("0 0\n1 0"), AtomicCharge)
    with pytest.raises(InputError, match=":2:"):
        parse_atoms("1 0\n0 0", allow_zero=False)
    with pytest.raises(InputError):
        parse_atoms("1 0 0")


atoms = st.lists(
    st.tuples(
        st.floats(-50, 50, allow_nan=False),
        st.floats(-50, 50, allow_nan=False),
        st.floats(-3, 3, allow_nan=False).filter(lambda m: abs(m) > 1e-3),
    ),
    min_size=0,
    max_size=25,
)


def _charge(spec):
    if not spec:
        return AtomicCharge.empty()
    return AtomicCharge.from_atoms([complex(a, b) for a, b, _ in spec], [m for _, _, m in spec])


@settings(max_examples=60, deadline=None)
@given(atoms, st.floats(0, 80), st.floats(0, 80))
def test_counting_radial_signed_split(spec, r1, r2):
    c = _charge(spec)
    r = sorted([r1, r2])
    var = c.variation
    lhs = counting_radial(var, r[1])
    rhs = counting_radial(c.positive, r[1]) + counting_radial(c.negative, r[1])
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert counting_radial(var, r[0]) <= counting_radial(var, r[1]) + 1e-12


@settings(max_examples=60, deadline=None)
@given(atoms)
def test_canonicalization_idempotent(spec):
    c = _charge(spec)
    again = AtomicCharge.from_atoms(c.locs, c.masses)
    assert np.array_equal(again.locs, c.locs) and np.array_equal(again.masses, c.masses)
    raw = math.fsum(m for *_, m in spec)
    assert c.total_mass() == pytest.approx(raw, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-20, 20, allow_nan=False).filter(lambda y: y != 0), st.floats(-3, 3).filter(lambda m: abs(m) > 1e-3)), max_size=15),
    st.floats(-25, 25),
    st.floats(-25, 25),
)
def test_line_jumps_reproduce_segment_charge(spec, a, b):
    a, b = sorted([a, b])
    if not spec:
        return
    c = AtomicCharge.from_atoms([1j * y for y, _ in spec], [m for _, m in spec])
    F = distribution_on_line(c)
    def counted(y):
        # closed at 0, closed toward 0 on each side, open away from it
        if b < 0:
            return a <= y < b
        if a >= 0:
            return a < y <= b
        return a <= y <= b

    inside = [(y, m) for y, m in zip(c.locs.imag, c.masses) if counted(y)]
    assert F.mass_between(a, b) == pytest.approx(math.fsum(m for _, m in inside), abs=1e-9)

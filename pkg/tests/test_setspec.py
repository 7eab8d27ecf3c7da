from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sumsetlab.errors import SpecError, WindowOverflowError
from sumsetlab.setspec import (BitsetSet, FolnerWindowFamily, PeriodicSet, UnionSet,
                               density_along, folner_defect, format_set_spec,
                               membership, parse_set_spec, parse_window_spec)

SQUARES = BitsetSet.from_members([n * n for n in range(10)], 100)


def windows(*pairs):
    return FolnerWindowFamily(tuple(pairs))


def test_membership_examples():
    assert membership(PeriodicSet(2, [1]), 7)
    assert not membership(PeriodicSet(3, [0]), 7)
    with pytest.raises(WindowOverflowError):
        membership(SQUARES, 100)


def test_periodic_answers_past_nominal_window():
    assert membership(PeriodicSet(2, [1], window_size=10), 10**9 + 1)


def test_negative_query_rejected():
    with pytest.raises(SpecError):
        membership(PeriodicSet(2, [1]), -1)


def test_density_examples():
    rep = density_along(PeriodicSet(3, [0]), windows((0, 3), (0, 9), (0, 27)))
    assert rep.values == (Fraction(1, 3),) * 3
    assert rep.estimate == Fraction(1, 3)
    assert not rep.non_monotone
    assert density_along(PeriodicSet(4, [0, 1]), windows((0, 8))).estimate == Fraction(1, 2)
    assert density_along(SQUARES, windows((0, 100))).estimate == Fraction(10, 100)


def test_density_window_overflow():
    with pytest.raises(WindowOverflowError):
        density_along(SQUARES, windows((0, 101)))


def test_density_flags_oscillation():
    a = BitsetSet.from_members([0, 5, 6, 7], 10)
    rep = density_along(a, windows((0, 2), (0, 5), (0, 10)))
    assert rep.values == (Fraction(1, 2), Fraction(1, 5), Fraction(2, 5))
    assert rep.non_monotone


def test_folner_defect_examples():
    assert folner_defect(windows((0, 10)), 1) == [Fraction(9, 10)]
    assert folner_defect(windows((0, 10)), 10) == [0]
    assert folner_defect(windows((5, 25)), 4) == [Fraction(16, 20)]
    with pytest.raises(SpecError):
        folner_defect(windows((0, 10)), 0)


@given(st.integers(0, 50), st.integers(1, 60), st.integers(1, 80))
def test_folner_defect_matches_set_intersection(lo, length, t):
    window = set(range(lo, lo + length))
    shifted = {n - t for n in window}
    assert folner_defect(windows((lo, lo + length)), t) == \
        [Fraction(len(window & shifted), length)]


def test_window_family_invariants():
    with pytest.raises(SpecError):
        windows((0, 10), (0, 10))
    with pytest.raises(SpecError):
        windows((3, 3))
    with pytest.raises(SpecError):
        windows((-1, 4))


@settings(max_examples=60)
@given(st.integers(1, 12), st.data())
def test_periodic_density_exact_on_whole_periods(m, data):
    residues = data.draw(st.sets(st.integers(0, m - 1)))
    c = data.draw(st.integers(1, 20))
    s = PeriodicSet(m, residues)
    rep = density_along(s, windows(*((0, j * m) for j in range(1, c + 1))))
    assert all(v == Fraction(len(residues), m) for v in rep.values)


@settings(max_examples=60)
@given(st.integers(1, 9), st.data())
def test_periodic_count_and_mask_against_brute_force(m, data):
    residues = data.draw(st.sets(st.integers(0, m - 1)))
    lo = data.draw(st.integers(0, 200))
    hi = data.draw(st.integers(lo, 400))
    s = PeriodicSet(m, residues)
    brute = [n for n in range(lo, hi) if n % m in residues]
    assert s.count(lo, hi) == len(brute)
    assert s.members(lo, hi) == brute


@settings(max_examples=40)
@given(st.sets(st.integers(0, 299)), st.integers(1, 7), st.data())
def test_union_membership_is_disjunction(members, m, data):
    residues = data.draw(st.sets(st.integers(0, m - 1)))
    a, b = BitsetSet.from_members(members, 300), PeriodicSet(m, residues)
    u = UnionSet([a, b])
    assert u.window_size == 300
    for n in range(300):
        assert u.contains(n) == (a.contains(n) or b.contains(n))
    assert u.count(0, 300) == len(members | {n for n in range(300) if n % m in residues})


def test_parse_set_specs(tmp_path):
    p = parse_set_spec("periodic:3:0,2@50")
    assert (p.modulus, p.residues, p.window_size) == (3, (0, 2), 50)
    assert format_set_spec(parse_set_spec("periodic:3:0")) == "periodic:3:0@10000"
    s = parse_set_spec("list:0,1,4,9@16")
    assert s.members() == [0, 1, 4, 9] and s.window_size == 16
    assert parse_set_spec("list:@5").members() == []
    f = tmp_path / "a.txt"
    f.write_text("2\n3\n\n7\n")
    assert parse_set_spec(f"file:{f}@8").members() == [2, 3, 7]
    u = parse_set_spec("union(list:1@10;union(periodic:5:0;list:3@12))")
    assert u.members() == [0, 1, 3, 5]


@pytest.mark.parametrize("bad", ["", "periodic:x", "periodic:3:5", "periodic:3:1,1",
                                 "list:1,2", "list:a@5", "bogus:1", "union(list:1@5",
                                 "periodic:0:"])
def test_parse_set_spec_rejects(bad):
    with pytest.raises(SpecError):
        parse_set_spec(bad)


def test_list_member_outside_window():
    with pytest.raises(WindowOverflowError):
        parse_set_spec("list:1,20@10")


def test_parse_window_spec():
    assert tuple(parse_window_spec("intervals:0-3,0-9,2-30")) == ((0, 3), (0, 9), (2, 30))
    for bad in ("intervals:", "boxes:0-3", "intervals:3", "intervals:0-3,0-2"):
        with pytest.raises(SpecError):
            parse_window_spec(bad)


@given(st.sets(st.integers(0, 63)), st.integers(64, 80))
def test_format_round_trip(members, n):
    s = BitsetSet.from_members(members, n)
    assert parse_set_spec(format_set_spec(s)) == s

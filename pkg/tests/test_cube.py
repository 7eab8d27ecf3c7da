import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from sumsetlab.cube import (CubeConfig, classify_cube, complement, diagonal_cube,
                            digit_permutation, forget_first, indices, lower_face,
                            permute_entries, q2_membership_skew, qk_membership_rotation,
                            rank, transposition, upper_face, verify_axis,
                            verify_erdos_cube)
from sumsetlab.dynsys import (FiniteRotation, ProductPower, SkewProduct, TorusRotation,
                              to_fixed)
from sumsetlab.errors import SpecError

Z5 = FiniteRotation(5, 1)
GOLDEN_SKEW = SkewProduct(to_fixed("golden"))


def labels(k):
    """Entries named by their index string, e.g. '010'."""
    return tuple("".join(map(str, e)) for e in indices(k))


def sym_cube(k):
    return CubeConfig(FiniteRotation(2 ** k), tuple(range(2 ** k)))


def names(x, k):
    lab = labels(k)
    return tuple(lab[i] for i in x.entries)


def skew_cube(*firsts, seconds=(0, 0, 0, 0)):
    return CubeConfig(GOLDEN_SKEW, tuple((to_fixed(a), to_fixed(b))
                                         for a, b in zip(firsts, seconds)))


def test_indexing():
    assert indices(2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert rank((0, 0, 0)) == 0 and rank((1, 1, 1)) == 7 and rank((1, 0, 0)) == 4
    assert complement((1, 0, 1)) == (0, 1, 0)


def test_face_examples():
    x = sym_cube(2)
    assert names(lower_face(x, 1), 2) == ("00", "01")
    assert names(lower_face(x, 2), 2) == ("00", "10")
    assert names(upper_face(x, 1), 2) == ("10", "11")
    assert names(upper_face(x, 2), 2) == ("01", "11")
    assert names(lower_face(sym_cube(3), 3), 3) == ("000", "010", "100", "110")
    assert names(upper_face(sym_cube(1), 1), 1) == ("1",)
    with pytest.raises(SpecError):
        lower_face(x, 3)


def test_forget_first():
    assert [labels(2)[i] for i in forget_first(sym_cube(2))] == ["01", "10", "11"]
    assert forget_first(sym_cube(1)) == (1,)
    x = sym_cube(3)
    assert (x.entries[0],) + forget_first(x) == x.entries


def test_permutation_examples():
    x = sym_cube(2)
    assert names(digit_permutation((2, 1), x), 2) == ("00", "10", "01", "11")
    for k in (1, 2, 3):
        assert digit_permutation(tuple(range(1, k + 1)), sym_cube(k)) == sym_cube(k)
    x3 = sym_cube(3)
    assert upper_face(digit_permutation((2, 1, 3), x3), 1) == upper_face(x3, 2)
    with pytest.raises(SpecError):
        digit_permutation((1, 1), x)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_transposition_moves_faces_to_axis_one(k):
    # literal equality for i <= 2; beyond that the swap also reorders the
    # remaining digits, so both faces agree up to one shared relabelling
    x = sym_cube(k)
    for i in range(1, k + 1):
        y = digit_permutation(transposition(i, k), x)
        if i <= 2:
            assert upper_face(y, 1) == upper_face(x, i)
            assert lower_face(y, 1) == lower_face(x, i)
            continue
        shared = [psi for psi in itertools.permutations(range(1, k))
                  if digit_permutation(psi, upper_face(x, i)) == upper_face(y, 1)
                  and digit_permutation(psi, lower_face(x, i)) == lower_face(y, 1)]
        assert len(shared) == 1


@pytest.mark.parametrize("k", [2, 3])
def test_permutation_definition_by_brute_force(k):
    # (phi x)_eps = x_{phi(eps)}, (phi eps)_i = eps_{phi(i)}
    x = labels(k)
    for phi in itertools.permutations(range(1, k + 1)):
        out = permute_entries(phi, x)
        for eps in indices(k):
            moved = "".join(str(eps[phi[i] - 1]) for i in range(k))
            assert out[rank(eps)] == moved


def test_cube_json_round_trip():
    x = CubeConfig(GOLDEN_SKEW, ((1, 2), (3, 4), (5, 6), (7, 8)))
    assert CubeConfig.from_json(x.to_json()) == x
    doc = json.loads(CubeConfig(Z5, (0, 1, 2, 3)).to_json())
    assert doc == {"k": 2, "system": "finrot:5:1", "entries": [0, 1, 2, 3]}
    for bad in ("{", "[]", '{"entries": [0, 1, 2]}', '{"system": "finrot:5:1"}',
                '{"k": 3, "system": "finrot:5:1", "entries": [0,1,2,3]}',
                '{"system": "finrot:5:1", "entries": [0,1,2,9]}'):
        with pytest.raises(SpecError):
            CubeConfig.from_json(bad, None if "system" in bad else Z5)
    with pytest.raises(SpecError):
        CubeConfig.from_json(doc and json.dumps(doc), FiniteRotation(6))


def test_erdos_examples():
    v = verify_erdos_cube(CubeConfig(Z5, (0, 1, 2, 3)), 0.5, 20, 2)
    assert v.is_erdos
    assert v.axes[0].witnesses == (2, 7)
    assert not verify_erdos_cube(CubeConfig(Z5, (0, 1, 2, 4)), 0.5, 20, 2).is_erdos
    half = skew_cube(0, 0, 0, 0, seconds=(0, 0, 0, "1/2"))
    assert not verify_erdos_cube(half, 0.2, 10**6, 2).is_erdos
    assert q2_membership_skew(half, 1e-12)


def test_erdos_verdict_json():
    doc = verify_erdos_cube(CubeConfig(Z5, (0, 1, 2, 3)), 0.5, 20, 2).to_dict()
    assert doc["schema_version"] == 1
    assert (doc["eps"], doc["horizon"], doc["min_hits"]) == (0.5, 20, 2)
    assert [a["witnesses"] for a in doc["axes"]] == [[2, 7], [1, 6]]


def brute_erdos_axis(x, i, horizon, min_hits):
    n = x.system.size
    lo, hi = lower_face(x, i).entries, upper_face(x, i).entries
    hits = [t for t in range(1, horizon + 1)
            if all((a + t * x.system.shift) % n == b for a, b in zip(lo, hi))]
    return len(hits) >= min_hits


def q_closure(n, k):
    """Diagonal points (x + eps.m) over all x, m: closed already for Z/n."""
    return {tuple((x + sum(e * m for e, m in zip(eps, ms))) % n for eps in indices(k))
            for x in range(n) for ms in itertools.product(range(n), repeat=k)}


@pytest.mark.parametrize("n,k", [(5, 2), (3, 3), (4, 2), (2, 3)])
def test_qk_matches_brute_force_closure(n, k):
    system = FiniteRotation(n, 1)
    closure = q_closure(n, k)
    for entries in itertools.product(range(n), repeat=2 ** k):
        assert qk_membership_rotation(CubeConfig(system, entries)) == (entries in closure)


def test_erdos_matches_brute_force_and_closure_z5():
    closure = q_closure(5, 2)
    for entries in itertools.product(range(5), repeat=4):
        x = CubeConfig(Z5, entries)
        got = verify_erdos_cube(x, 0.5, 50, 2).is_erdos
        assert got == all(brute_erdos_axis(x, i, 50, 2) for i in (1, 2))
        assert got == (entries in closure)


def test_qk_examples():
    assert qk_membership_rotation(CubeConfig(Z5, (0, 1, 2, 3)))
    assert not qk_membership_rotation(CubeConfig(Z5, (0, 1, 2, 4)))
    assert all(qk_membership_rotation(CubeConfig(Z5, (a, b)))
               for a in range(5) for b in range(5))


def test_qk_rejections():
    with pytest.raises(SpecError):
        qk_membership_rotation(CubeConfig(FiniteRotation(6, 2), (0, 1, 2, 3)))
    with pytest.raises(SpecError):
        qk_membership_rotation(CubeConfig(Z5, tuple(range(16))[:16] and (0,) * 16))
    with pytest.raises(SpecError):
        qk_membership_rotation(CubeConfig(TorusRotation((to_fixed("1/8"),)), ((0,),) * 4))
    with pytest.raises(SpecError):
        qk_membership_rotation(skew_cube(0, 0, 0, 0))


def test_qk_torus_with_tolerance():
    t = TorusRotation((to_fixed("golden"),))
    good = CubeConfig(t, tuple((to_fixed(v),) for v in ("0.1", "0.3", "0.5", "0.7")))
    bad = CubeConfig(t, tuple((to_fixed(v),) for v in ("0", "0.25", "0.5", "0.8")))
    assert qk_membership_rotation(good, 1e-12)
    assert not qk_membership_rotation(bad, 1e-12)
    assert qk_membership_rotation(bad, 0.06)


def test_q2_examples():
    assert q2_membership_skew(skew_cube("0.1", "0.3", "0.5", "0.7"), 1e-12)
    assert q2_membership_skew(skew_cube(0, 0, 0, 0, seconds=("0.3", "0.9", 0, "0.1")), 0)
    assert not q2_membership_skew(skew_cube(0, "0.25", "0.5", "0.8"), 1e-12)
    with pytest.raises(SpecError):
        q2_membership_skew(CubeConfig(Z5, (0, 1, 2, 3)), 0)


@settings(max_examples=100)
@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.integers(0, 10**6),
       st.integers(0, 10**6))
def test_diagonal_skew_cubes_pass_q2(x, y, n, m):
    assert q2_membership_skew(diagonal_cube(GOLDEN_SKEW, (x, y), (n, m)), 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.tuples(*[st.integers(0, 6)] * 8))
def test_permutation_invariance_of_verdicts(entries):
    # relabelling axes preserves both the Erdős and the dynamical verdicts
    x = CubeConfig(FiniteRotation(7, 3), entries)
    base = verify_erdos_cube(x, 0.5, 60, 2).is_erdos
    for phi in itertools.permutations((1, 2, 3)):
        y = digit_permutation(phi, x)
        assert verify_erdos_cube(y, 0.5, 60, 2).is_erdos == base
        assert qk_membership_rotation(y) == qk_membership_rotation(x)


def test_axis_verification_through_transposition():
    x = CubeConfig(FiniteRotation(7, 3), (0, 1, 2, 3, 4, 5, 6, 0))
    for i in (1, 2, 3):
        direct = verify_axis(x, i, 0.5, 60, 2)
        moved = verify_axis(digit_permutation(transposition(i, 3), x), 1, 0.5, 60, 2)
        assert direct.member == moved.member and direct.witnesses == moved.witnesses


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.tuples(*[st.integers(0, 6)] * 3))
def test_faces_of_erdos_cubes_are_erdos(x0, steps):
    x = diagonal_cube(FiniteRotation(7, 2), x0, steps)
    assert verify_erdos_cube(x, 0.5, 60, 2).is_erdos
    for i in (1, 2, 3):
        for face in (lower_face(x, i), upper_face(x, i)):
            assert verify_erdos_cube(face, 0.5, 60, 2).is_erdos


def test_erdos_implies_q2_on_skew():
    s = SkewProduct(to_fixed("sqrt2"))
    x = diagonal_cube(s, (to_fixed("0.2"), to_fixed("0.6")), (3, 5))
    v = verify_erdos_cube(x, 0.05, 10**5, 2)
    assert v.is_erdos
    assert q2_membership_skew(x, 0.05 * 2)


def test_classify_cube():
    out = classify_cube(CubeConfig(Z5, (0, 1, 2, 3)), 0.5, 20, 2)
    assert out["erdos"] and out["dynamical"] and out["nil"]
    out = classify_cube(CubeConfig(ProductPower(Z5, 2), ((0, 0),) * 4), 0.5, 20, 2)
    assert out["dynamical"] is None

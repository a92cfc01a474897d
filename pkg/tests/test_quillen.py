"""Quillen cohomology and the obstruction calculus.

Frozen tables below were computed once and cross-checked against the
linearized Hom complex and against a second (padded) resolution.
"""

import itertools
import random

import pytest
from conftest import resolution
from hypothesis import given, settings
from hypothesis import strategies as st

from ucr.coalg import (
    cofree_coalgebra,
    divided_power,
    ground,
    rp2,
    sphere,
    suspension_comodule,
    trivial_coalgebra,
)
from ucr.cosimplicial import EdgeUndefined
from ucr.galgebra import Field, GradedSpace, Matrix, TruncationOverflow
from ucr.quillen import (
    CofreeComplex,
    QuillenComplex,
    all_liftings,
    auto_lifting,
    brute_force_characteristic,
    brute_force_difference,
    characteristic_cocycle,
    cohomology,
    difference_cocycle,
    extension_comparison,
    extension_from_twist,
    linearized_complex,
    obstruction_groups,
    perturb,
    quillen_table,
    twist_from_terms,
    twist_space,
    twist_terms,
    validate_extension,
    vanishing_liftings,
    verify_representatives,
)
from ucr.resolution import PreconditionError, build_resolution

Z = [0] * 9

FROZEN = {
    "ground": {1: [Z, Z, Z], 2: [Z, Z, Z]},
    "s2": {1: [Z, [0, 0, 0, 1, 1, 1, 1, 1, 1], Z],
           2: [[0, 0, 1, 1, 1, 1, 1, 1, 1], [0, 0, 0, 0, 1, 1, 1, 1, 1], [0, 0, 0, 0, 1, 1, 1, 1, 1]]},
    "rp2": {1: [[0, 1, 1, 0, 0, 0, 0, 0, 0], Z, Z],
            2: [Z, [0, 0, 0, 1, 1, 1, 1, 1, 1], [0, 0, 0, 0, 1, 1, 1, 1, 1]]},
    "triv24": {1: [Z, [0, 0, 0, 1, 1, 2, 2, 2, 2], [0, 0, 0, 0, 0, 1, 1, 1, 1]],
               2: [[0, 0, 1, 1, 2, 2, 1, 1, 1], [0, 0, 0, 0, 1, 1, 2, 2, 2], [0, 0, 0, 0, 1, 1, 3, 3, 3]]},
}

MAKERS = {"ground": lambda N: ground(trunc=N), "s2": lambda N: sphere(2, trunc=N), "rp2": rp2,
          "triv24": lambda N: trivial_coalgebra([2, 4], trunc=N)}


@pytest.mark.parametrize("name", list(FROZEN))
def test_frozen_tables(name):
    tables = quillen_table(MAKERS[name](8))
    for t, tab in tables.items():
        assert [tab.dims[s] for s in range(3)] == FROZEN[name][t]


@pytest.mark.parametrize("name", ["s2", "rp2", "triv24"])
def test_support_bound_matches_full_resolution(name):
    full = resolution(name, 3, 8)
    for t, tab in quillen_table(MAKERS[name](8), res=full).items():
        assert [tab.dims[s] for s in range(3)] == FROZEN[name][t]


@pytest.mark.parametrize("K", [sphere(2, trunc=5), rp2(5), trivial_coalgebra([2, 4], trunc=5), sphere(1, trunc=5),
                               sphere(3, Field.Q, trunc=5), trivial_coalgebra([2, 3], Field.Q, trunc=5)],
                         ids=["s2", "rp2", "triv24", "s1", "s3_Q", "triv23_Q"])
def test_adjunction_complex_matches_hom_complex(K):
    res = build_resolution(K, 3, 5)
    for t in (1, 2):
        M = suspension_comodule(res.base, t, trunc=5)
        cx = QuillenComplex(res, M)
        cx.check_square_zero()
        lin = linearized_complex(res, M)
        lin.check_square_zero()
        assert [cx.cohomology_dims(s)[-1] for s in range(3)] == lin.cohomology_dims()[:3]


@pytest.mark.parametrize("degrees,t", [([2], 1), ([1], 2), ([2, 3], 1)])
def test_cofree_coalgebras_have_no_higher_cohomology(degrees, t):
    N = 6
    G, _ = cofree_coalgebra(GradedSpace.from_degrees(Field.F2, N, [(f"a{d}", d) for d in degrees]), N)
    tab = cohomology(G, suspension_comodule(G, t, trunc=N), s_max=2, N=N)
    assert not any(tab.dims[1]) and not any(tab.dims[2])


def test_representatives_are_nontrivial_cocycles():
    res = resolution("triv24", 3, 8)
    M = suspension_comodule(res.base, 2, trunc=8)
    cx = QuillenComplex(res, M)
    tab = cohomology(res.base, M, 2, 8, res=res)
    verify_representatives(tab, cx)
    assert len(tab.representatives[2]) == 3


def test_coboundary_test_needs_a_cocycle():
    res = resolution("rp2", 3, 8)
    cx = QuillenComplex(res, suspension_comodule(res.base, 2, trunc=8))
    assert not cx.is_cocycle(1, 1)
    with pytest.raises(PreconditionError):
        cx.is_coboundary(1, 1)


def test_edges_and_truncation():
    res = resolution("s2", 3, 8)
    cx = QuillenComplex(res, suspension_comodule(res.base, 1, trunc=8))
    with pytest.raises(EdgeUndefined):
        cx.delta(3)
    with pytest.raises(TruncationOverflow):
        quillen_table(sphere(2, trunc=6), N=8)
    tab = quillen_table(sphere(2))[1]
    assert tab.markers[2]


def test_obstruction_groups():
    tabs = obstruction_groups(trivial_coalgebra([2, 4]), n_max=2)
    assert [(r["n"], r["s"], r["dim"]) for r in tabs["A"]] == [(1, 3, 1), (2, 4, 1)]
    assert [(r["n"], r["s"], r["dim"]) for r in tabs["B"]] == [(1, 2, 1), (2, 3, 1)]
    for K in (ground(), sphere(2), rp2()):
        tabs = obstruction_groups(K, n_max=2)
        assert all(r["dim"] == 0 and "vanishes" in r["verdict"] for r in tabs["A"] + tabs["B"])


# extensions -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def micro():
    """Stage-1 extensions over small trivial and divided-power coalgebras, N = 5."""
    out = {}
    for name, K in (("triv24", trivial_coalgebra([2, 4], trunc=5)), ("dp2", divided_power(2, trunc=5))):
        res = build_resolution(K, 4, 5)
        cc = CofreeComplex(res, 3)
        out[name] = (res, cc, twist_space(cc, 1))
    return out


def _twists(space):
    for bits in itertools.product((0, 1), repeat=len(space)):
        yield [sum(b * x for b, x in zip(bits, col)) % 2 for col in zip(*space)] if space else None


def test_split_extension_has_zero_class(micro):
    for res, cc, _ in micro.values():
        ext = extension_from_twist(cc, 1)
        assert validate_extension(ext).ok
        assert characteristic_cocycle(ext).is_zero_class


def test_class_matches_brute_force(micro):
    classes = []
    for res, cc, space in micro.values():
        for tw in _twists(space):
            ext = extension_from_twist(cc, 1, tw)
            assert validate_extension(ext).ok
            r = characteristic_cocycle(ext)
            assert r.is_zero_class == brute_force_characteristic(ext)
            classes.append(r.is_zero_class)
    assert True in classes and False in classes


def test_twists_outside_the_solution_space_are_rejected():
    cc = CofreeComplex(build_resolution(trivial_coalgebra([1, 3], trunc=5), 4, 5), 3)
    space = twist_space(cc, 1)
    nvars = len(space[0])
    rejected = 0
    for k in range(nvars):
        tw = [1 if j == k else 0 for j in range(nvars)]
        if Matrix.from_lists(Field.F2, space + [tw], nvars).rank() > len(space):
            assert not validate_extension(extension_from_twist(cc, 1, tw)).ok
            rejected += 1
    assert rejected


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32))
def test_class_independent_of_lifting(micro, seed):
    rng = random.Random(seed)
    res, cc, space = micro["triv24"]
    for tw in _twists(space):
        ext = extension_from_twist(cc, 1, tw)
        cx = QuillenComplex(res, ext.M)
        base = characteristic_cocycle(ext, cx=cx)
        lam = perturb(ext, auto_lifting(ext), rng.getrandbits(len(cx.coords[2])), cx)
        other = characteristic_cocycle(ext, lam, cx)
        assert other.is_zero_class == base.is_zero_class
        assert cx.is_coboundary(3, base.cochain ^ other.cochain)[0]


def test_difference_obstruction(micro):
    res, cc, _ = micro["triv24"]
    ext = extension_from_twist(cc, 1)
    cx = QuillenComplex(res, ext.M)
    lifts = vanishing_liftings(ext)
    assert lifts
    seen = set()
    for a in lifts:
        assert difference_cocycle(ext, a, a, cx).is_zero_class
        for b in lifts:
            d = difference_cocycle(ext, a, b, cx)
            assert d.is_zero_class == brute_force_difference(ext, a, b)
            seen.add(d.is_zero_class)
            if d.is_zero_class:
                extension_comparison(ext, a, b, d.witness, cx)  # raises unless every square commutes
    assert seen == {True, False}


def test_liftings_are_enumerated_exactly(micro):
    res, cc, _ = micro["dp2"]
    ext = extension_from_twist(cc, 1)
    lifts = all_liftings(ext)
    assert len({tuple(sorted((d, m) for d, m in f.blocks.items() if not m.is_zero())) for f in lifts}) == len(lifts)


def test_twist_document_round_trip(micro):
    res, cc, space = micro["triv24"]
    for tw in _twists(space):
        ext = extension_from_twist(cc, 1, tw)
        assert twist_from_terms(cc, 1, twist_terms(ext)) == list(ext.twist)

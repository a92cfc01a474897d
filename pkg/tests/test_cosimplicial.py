import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucr.cosimplicial import (
    CosimplicialObject,
    EdgeUndefined,
    check_identities,
    cochains,
    cohomotopy,
    colatching,
    comatching,
    compose_surj,
    degen_of,
    face_of,
    moore_complex,
    normalization,
    random_module_object,
    surjections,
)
from ucr.galgebra import Field, GradedSpace, compose, identity, zero_map

seeds = st.integers(0, 2 ** 32)


@settings(max_examples=40)
@given(seeds)
def test_random_objects_satisfy_identities(seed):
    X = random_module_object(random.Random(seed))
    assert check_identities(X).ok


@settings(max_examples=40)
@given(seeds)
def test_normalization_is_an_isomorphism(seed):
    X = random_module_object(random.Random(seed))
    for n in range(X.D + 1):
        phi, inv = normalization(X, n)
        assert compose(inv, phi) == identity(phi.source)
        assert compose(phi, inv) == identity(phi.target)


@settings(max_examples=40)
@given(seeds)
def test_cohomotopy_equals_moore_cohomology(seed):
    X = random_module_object(random.Random(seed))
    cx = moore_complex(X)
    for n in range(X.D):
        assert list(cohomotopy(X, n).dims()) == cx.cohomology_dims(n)


@settings(max_examples=20)
@given(seeds)
def test_latching_and_matching_dimensions(seed):
    X = random_module_object(random.Random(seed), scramble=False)
    for n in range(X.D + 1):
        L, _ = colatching(X, n)
        M, _ = comatching(X, n)
        C, _ = cochains(X, n, "C")
        for d in range(X.space(n).trunc + 1):
            assert L.dim(d) + C.dim(d) == X.space(n).dim(d)
            assert M.dim(d) <= X.space(n).dim(d)


def test_constant_object():
    V = GradedSpace.from_dims(Field.F2, [1, 2])
    C = CosimplicialObject.constant(V, 3)
    assert check_identities(C).ok
    assert [list(cohomotopy(C, n).dims()) for n in range(3)] == [[1, 2], [0, 0], [0, 0]]
    with pytest.raises(EdgeUndefined):
        cohomotopy(C, 3)


def test_broken_identity_is_located():
    C = CosimplicialObject.constant(GradedSpace.from_dims(Field.F2, [1, 2]), 3)
    bad = C.replace(cofaces={(2, 1): zero_map(C.space(1), C.space(2))})
    failures = check_identities(bad).failures()
    assert failures
    assert failures[0].witness["operation"]


def test_surjection_combinatorics():
    assert [len(surjections(n)) for n in range(5)] == [1, 2, 4, 8, 16]
    for n in range(1, 4):
        for sigma in surjections(n):
            for j in range(n + 1):
                tau = degen_of(sigma, j)
                assert len(tau) == n + 2
                # the face that deletes a repeated entry undoes the degeneracy
                back, extra = face_of(tau, j)
                assert back == sigma and extra is None
    ident = (0, 1, 2)
    assert compose_surj(ident, (0, 0, 1, 2)) == (0, 0, 1, 2)

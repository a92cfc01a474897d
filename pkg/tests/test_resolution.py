import random

import pytest
from conftest import resolution
from hypothesis import given, settings
from hypothesis import strategies as st

from ucr.coalg import cofree_coalgebra, ground, rp2, sphere, trivial_coalgebra
from ucr.cosimplicial import check_identities, random_module_object
from ucr.galgebra import Field, GradedSpace
from ucr.resolution import (
    PreconditionError,
    build_resolution,
    cogenerator_object,
    derived_cobase,
    extract_cw_basis,
    forget_basis_seeds,
    is_cofree,
    psi_formula_words,
    psi_map,
    psi_oracle_words,
    resolution_from_json,
    resolution_to_json,
    unstable_generators,
    verify_resolution,
)


@pytest.mark.parametrize("strategy", ["gu", "min", "padded"])
@pytest.mark.parametrize("K", [ground(trunc=6), sphere(2, trunc=6), rp2(6), trivial_coalgebra([2, 4], trunc=6)],
                         ids=["ground", "s2", "rp2", "triv24"])
def test_every_strategy_resolves(K, strategy):
    res = build_resolution(K, 3, 6, strategy)
    rep = verify_resolution(res)
    assert rep.ok, [c.witness for c in rep.failures()]
    assert check_identities(cogenerator_object(res)).ok


def test_sphere_fresh_cogenerators():
    res = build_resolution(sphere(2, trunc=6), 3, 6)
    assert res.fresh_dims()[:2] == [[0, 0, 1, 0, 0, 0, 0], [0, 0, 0, 1, 1, 2, 2]]


def test_min_strategy_is_smaller_than_padded():
    K = rp2(6)
    small = build_resolution(K, 3, 6, "min").fresh_dims()
    big = build_resolution(K, 3, 6, "padded").fresh_dims()
    assert small[0] == big[0]
    for a, b in zip(small[1:], big[1:]):
        assert all(x <= y for x, y in zip(a, b))


def _corrupt(res):
    res._faces.clear()
    res._substitutions.clear()
    return res


def test_dropped_attaching_map_is_detected():
    res = build_resolution(rp2(6), 3, 6)
    res.fresh[2][3].attach = {}
    rep = verify_resolution(_corrupt(res))
    assert not rep.ok
    assert {"attaching", "exactness"} <= {c.name for c in rep.failures()}


def test_json_round_trip():
    res = resolution("s2", 3, 6)
    doc = resolution_to_json(res, "verified")
    again = resolution_from_json(doc, res.base)
    assert again.fresh_dims() == res.fresh_dims()
    assert verify_resolution(again).ok
    assert resolution_to_json(again, "verified") == doc


def test_psi_index_set_matches_product_formula():
    for n in range(1, 7):
        assert psi_formula_words(n) == psi_oracle_words(n)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32))
def test_psi_contract_on_random_objects(seed):
    X = random_module_object(random.Random(seed))
    for n in range(1, X.D + 1):
        psi_map(X, n)  # raises if s^j ψ^n != s^j


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32))
def test_cw_basis_recovered_from_random_basis(seed):
    rng = random.Random(seed)
    X = random_module_object(rng, scramble=False)
    expected = {n: [sum(1 for (sigma, k, _) in X.tags[n][d] if k == n) for d in range(X.space(n).trunc + 1)]
                for n in range(X.D + 1)}
    got = extract_cw_basis(X, forget_basis_seeds(X, rng))
    for b in got:
        dims = b.dims() + [0] * (len(expected[b.level]) - len(b.dims()))
        assert dims == expected[b.level]


def test_cw_extraction_rejects_broken_objects():
    rng = random.Random(3)
    X = random_module_object(rng)
    while not X.space(0).total_dim:
        X = random_module_object(rng)
    bad = X.replace(codegens={(0, 0): X.s(0, 0).scale(0)})  # breaks s^0 d^0 = id
    assert not check_identities(bad).ok
    with pytest.raises(PreconditionError):
        extract_cw_basis(bad)


def test_cofree_input_is_its_own_resolution():
    G, tag = cofree_coalgebra(GradedSpace.from_degrees(Field.F2, 6, [("i2", 2)]), 6)
    assert is_cofree(G)
    assert not is_cofree(rp2(6))
    table = derived_cobase(G, 3, 6)
    assert table["dims"][0] == [0, 0, 1, 0, 0, 0, 0]
    assert all(not any(row) for row in table["dims"][1:])
    assert table["projective_dimension_within_truncation"] == 0


def test_unstable_generators():
    # x^2 is a product in H*(RP^2); the trivial coalgebra's dual has zero products
    assert [d for d, _ in unstable_generators(rp2(6))] == [1]
    assert [d for d, _ in unstable_generators(trivial_coalgebra([2, 4], trunc=6))] == [2, 4]

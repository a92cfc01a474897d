import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucr.coalg import (
    cofree_coalgebra,
    cofree_comodule,
    cofree_extend,
    cogenerator_projection,
    comodule_hom,
    divided_power,
    ground,
    is_coalgebra_map,
    is_comodule_map,
    primitives,
    rp2,
    sphere,
    square_zero_extension,
    suspension_comodule,
    trivial_coalgebra,
    validate,
    validate_comodule,
)
from ucr.documents import coalgebra_from_document
from ucr.galgebra import Field, GradedMap, GradedSpace, Matrix, compose, identity
from ucr.steenrod import is_admissible


def _doc(gens, diag=(), sq=(), trunc=6):
    return {"field": "F2", "truncation": trunc,
            "generators": [{"name": n, "degree": d} for n, d in gens],
            "diagonal": [{"on": o, "terms": t} for o, t in diag],
            "sq": [{"op": i, "on": o, "value": v} for i, o, v in sq]}


@pytest.mark.parametrize("K", [ground(), sphere(2), rp2(), trivial_coalgebra([2, 4]), divided_power(1),
                               divided_power(2), sphere(3, Field.Q), trivial_coalgebra([1, 2], Field.Q)])
def test_examples_validate(K):
    rep = validate(K)
    assert rep.ok, [c.witness for c in rep.failures()]


BROKEN = {
    "cocommutativity": _doc([("a", 1), ("b", 2), ("c", 3)], [("c", [["a", "b"]])]),
    "coassociativity": _doc([("a", 1), ("b", 2), ("c", 3), ("d", 4)],
                            [("c", [["a", "b"], ["b", "a"]]), ("d", [["a", "c"], ["c", "a"]])]),
    "instability": _doc([("a", 1), ("b", 2)], sq=[(2, "b", [["1", 1]])]),
    "adem": _doc([("c", 3), ("d", 4), ("e", 5)], sq=[(1, "e", [["d", 1]]), (1, "d", [["c", 1]])]),
    "cartan": _doc([("a", 1), ("b", 2), ("c", 3)], [("b", [["a", "a"]]), ("c", [["a", "b"], ["b", "a"]])],
                   [(1, "b", [["a", 1]]), (1, "c", [["b", 1]])]),
    "verschiebung": _doc([("b1", 1), ("b2", 2)], [("b2", [["b1", "b1"]])]),
}


@pytest.mark.parametrize("axiom", list(BROKEN))
def test_broken_axioms_are_reported_with_witness(axiom):
    rep = validate(coalgebra_from_document(BROKEN[axiom]))
    failed = {c.name: c for c in rep.failures()}
    assert axiom in failed
    w = failed[axiom].witness
    assert w["element"] and w["operation"] and w["discrepancy"]


def test_rp3_model_is_valid():
    doc = _doc([("a", 1), ("b", 2), ("c", 3)], [("b", [["a", "a"]]), ("c", [["a", "b"], ["b", "a"]])],
               [(1, "b", [["a", 1]])])
    assert validate(coalgebra_from_document(doc)).ok


# Cofree coalgebras ------------------------------------------------------------

def _generator_degrees(degrees, N):
    """Degrees of Sq^I v with I admissible of excess < |v| (the unstable free module's generators)."""
    out = []

    def comps(d):
        if d == 0:
            yield ()
            return
        for f in range(1, d + 1):
            for rest in comps(d - f):
                yield (f,) + rest

    for n in degrees:
        for e in range(N - n + 1):
            for I in comps(e):
                if is_admissible(I) and (not I or I[0] - sum(I[1:]) < n):
                    out.append(n + e)
    return out


def _monomial_counts(gen_degrees, N, exterior=()):
    counts = [1] + [0] * N
    for g in gen_degrees:
        for d in range(N, g - 1, -1) if g in exterior else range(g, N + 1):
            counts[d] += counts[d - g]
    return counts


def test_cofree_on_degree_two_class():
    V = GradedSpace.from_degrees(Field.F2, 6, [("i2", 2)])
    G, tag = cofree_coalgebra(V, 6)
    assert list(G.space.dims()) == [1, 0, 1, 1, 1, 2, 2]
    assert list(G.space.dims()) == _monomial_counts(_generator_degrees([2], 6), 6)
    assert validate(G).ok
    GQ, _ = cofree_coalgebra(GradedSpace.from_degrees(Field.Q, 6, [("i2", 2)]), 6)
    assert list(GQ.space.dims()) == [1, 0, 1, 0, 1, 0, 1]
    assert validate(GQ).ok


@settings(max_examples=12)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=2))
def test_cofree_dims_match_monomial_count(degrees):
    N = 6
    V = GradedSpace.from_degrees(Field.F2, N, [(f"v{k}", d) for k, d in enumerate(degrees)])
    G, tag = cofree_coalgebra(V, N)
    assert list(G.space.dims()) == _monomial_counts(_generator_degrees(degrees, N), N)
    assert validate(G).ok


def test_rational_cofree_has_exterior_odd_part():
    V = GradedSpace.from_degrees(Field.Q, 8, [("a", 1), ("b", 2), ("c", 3)])
    G, _ = cofree_coalgebra(V, 8)
    exterior = {1, 3}
    assert list(G.space.dims()) == _monomial_counts([1, 2, 3], 8, exterior)
    assert validate(G).ok


def test_primitives_of_cofree_are_its_generators():
    G, tag = cofree_coalgebra(GradedSpace.from_degrees(Field.F2, 8, [("i2", 2)]))
    P, inc = primitives(G)
    assert list(P.space.dims()) == [0, 0, 1, 1, 0, 1, 0, 0, 0]
    assert tag.generator_counts()[:6] == [0, 0, 1, 1, 0, 1]


def test_cofree_universal_property():
    G, tag = cofree_coalgebra(GradedSpace.from_degrees(Field.F2, 7, [("a", 1), ("b", 2)]))
    K = rp2(7)
    C = tag.cogenerators
    phi = GradedMap(K.space, C, 0, {d: Matrix.from_entries(Field.F2, C.dim(d), K.space.dim(d),
                                                           {(0, 0): 1} if d in (1, 2) else {})
                                    for d in range(8)})
    f = cofree_extend(phi, G, tag, K)
    assert is_coalgebra_map(f, K, G).ok
    assert compose(cogenerator_projection(G, tag), f) == phi
    assert f.apply("b2") == {"[a]^2": 1, "[b]": 1}


# Comodules ----------------------------------------------------------------------

def test_suspension_and_cofree_comodules():
    K = rp2()
    M = suspension_comodule(K, 1)
    assert list(M.space.dims()) == [0, 1, 1, 1, 0, 0, 0, 0, 0]
    assert M.space.basis[2] == ("σb1",)
    assert validate_comodule(M).ok
    C = cofree_comodule(GradedSpace.from_degrees(Field.F2, 8, [("v", 1)]), K)
    assert validate_comodule(C).ok
    assert comodule_hom(M, M).dim == 1
    assert comodule_hom(M, C).dim == 1
    assert is_comodule_map(identity(M.space), M, M)
    assert suspension_comodule(K, 2).space.basis[3] == ("σ^2b1",)


def test_comodule_hom_elements_are_maps():
    K = trivial_coalgebra([2, 4])
    M = suspension_comodule(K, 1)
    C = cofree_comodule(GradedSpace.from_degrees(Field.F2, 8, [("v", 3)]), K)
    H = comodule_hom(M, C)
    for k in range(H.dim):
        coeffs = [1 if j == k else 0 for j in range(H.dim)]
        assert is_comodule_map(H.evaluate(coeffs), M, C)


def test_square_zero_extension_is_a_coalgebra():
    M = suspension_comodule(rp2(), 1)
    E = square_zero_extension(M)
    assert validate(E).ok
    assert list(E.space.dims()) == [1, 2, 2, 1, 0, 0, 0, 0, 0]

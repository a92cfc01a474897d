import json
from fractions import Fraction

import pytest
from conftest import FIXTURES
from hypothesis import given
from hypothesis import strategies as st

from ucr.coalg import cofree_coalgebra, rp2, sphere, trivial_coalgebra, validate
from ucr.documents import (
    DocumentError,
    canonical_json,
    coalgebra_from_document,
    coalgebra_to_document,
    digest,
)
from ucr.galgebra import Field, GradedSpace


def _load(name):
    return json.loads((FIXTURES / name).read_text())


@pytest.mark.parametrize("name", ["ground", "s2", "rp2", "triv24"])
def test_fixture_round_trip(name):
    doc = _load(f"{name}.json")
    K = coalgebra_from_document(doc)
    assert validate(K).ok
    again = coalgebra_to_document(K)
    assert coalgebra_to_document(coalgebra_from_document(again)) == again


def test_round_trip_keeps_structure():
    for K in (rp2(), sphere(3, Field.Q), trivial_coalgebra([2, 4]),
              cofree_coalgebra(GradedSpace.from_degrees(Field.F2, 6, [("i2", 2)]), 6)[0]):
        L = coalgebra_from_document(coalgebra_to_document(K))
        assert L.space.dims() == K.space.dims()
        assert validate(L).ok
        for d in range(1, K.trunc + 1):
            for k in range(K.space.dim(d)):
                assert L.reduced((d, k)) == K.reduced((d, k))


def test_rational_coefficients():
    doc = {"field": "Q", "truncation": 4, "generators": [{"name": "a", "degree": 2}, {"name": "b", "degree": 4}],
           "diagonal": [{"on": "b", "terms": [["a", "a", "3/2"]]}]}
    K = coalgebra_from_document(doc)
    assert K.reduced((4, 0)) == {((2, 0), (2, 0)): Fraction(3, 2)}
    assert coalgebra_to_document(K)["diagonal"][0]["terms"] == [["a", "a", "3/2"]]


BAD = [
    ([], "root must be a JSON object"),
    ({"schema": "ucr/9", "field": "F2", "truncation": 2, "generators": []}, "unsupported schema"),
    ({"field": "F3", "truncation": 2, "generators": []}, "field"),
    ({"field": "F2", "truncation": "8", "generators": []}, "coalgebra.truncation"),
    ({"field": "F2", "truncation": 2, "generators": [{"name": "a", "degree": 0}]}, "generators[0].degree"),
    ({"field": "F2", "truncation": 2, "generators": [{"name": "a", "degree": 3}]}, "exceeds the truncation"),
    ({"field": "F2", "truncation": 2, "generators": [{"name": "a", "degree": 1}, {"name": "a", "degree": 2}]},
     "duplicate"),
    ({"field": "F2", "truncation": 2, "generators": [{"name": "a", "degree": 1}],
      "diagonal": [{"on": "z", "terms": []}]}, "diagonal[0].on"),
    ({"field": "F2", "truncation": 3, "generators": [{"name": "a", "degree": 1}, {"name": "b", "degree": 3}],
      "diagonal": [{"on": "b", "terms": [["a", "a"]]}]}, "diagonal[0].terms[0]"),
    ({"field": "F2", "truncation": 2, "generators": [{"name": "a", "degree": 1}, {"name": "b", "degree": 2}],
      "sq": [{"op": 1, "on": "b", "value": [["q", 1]]}]}, "sq[0].value[0]"),
    ({"field": "Q", "truncation": 2, "generators": [{"name": "a", "degree": 1}, {"name": "b", "degree": 2}],
      "sq": [{"op": 1, "on": "b", "value": [["a", 1]]}]}, "only allowed over F2"),
    ({"field": "Q", "truncation": 2, "generators": [{"name": "a", "degree": 1}, {"name": "b", "degree": 2}],
      "diagonal": [{"on": "b", "terms": [["a", "a", "x/y"]]}]}, "bad coefficient"),
]


@pytest.mark.parametrize("doc,fragment", BAD, ids=[f for _, f in BAD])
def test_malformed_documents_name_the_place(doc, fragment):
    with pytest.raises(DocumentError) as exc:
        coalgebra_from_document(doc)
    assert fragment in str(exc.value)


@given(st.recursive(st.none() | st.integers() | st.text(max_size=5),
                    lambda c: st.lists(c, max_size=3) | st.dictionaries(st.text(max_size=4), c, max_size=3),
                    max_leaves=10))
def test_arbitrary_json_never_crashes_the_parser(doc):
    try:
        coalgebra_from_document(doc)
    except DocumentError:
        pass


def test_canonical_json_and_digest():
    assert canonical_json({"a": [1, "σ"]}) == '{\n  "a": [\n    1,\n    "σ"\n  ]\n}\n'
    assert digest(b"") == "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"

import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucr.galgebra import (
    Field,
    GradedMap,
    GradedSpace,
    Matrix,
    NoSolution,
    StructuralError,
    TruncationOverflow,
    cokernel,
    compose,
    f2_rank,
    identity,
    kernel,
    tensor,
)


def f2_matrices(max_rows=6, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r)))


def q_matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c), min_size=r, max_size=r)))


def span_size(rows):
    """Brute force: count distinct F2 combinations of the rows."""
    vecs = set()
    for coeffs in product((0, 1), repeat=len(rows)):
        vecs.add(tuple(sum(c * x for c, x in zip(coeffs, col)) % 2 for col in zip(*rows)))
    return len(vecs)


@given(f2_matrices())
def test_f2_rank_matches_span_count(rows):
    A = Matrix.from_lists(Field.F2, rows)
    assert 2 ** A.rank() == span_size(rows)


@given(f2_matrices())
def test_rank_nullity_f2(rows):
    A = Matrix.from_lists(Field.F2, rows)
    null = A.nullspace()
    assert A.rank() + len(null) == A.ncols
    for x in null:
        assert not any(A.apply(x))


@given(q_matrices())
def test_rank_nullity_q(rows):
    A = Matrix.from_lists(Field.Q, rows)
    null = A.nullspace()
    assert A.rank() + len(null) == A.ncols
    for x in null:
        assert all(v == 0 for v in A.apply(x))


@given(q_matrices(), st.data())
def test_solve_consistent_systems(rows, data):
    A = Matrix.from_lists(Field.Q, rows)
    x = data.draw(st.lists(st.integers(-2, 2), min_size=A.ncols, max_size=A.ncols))
    b = A.apply([Fraction(v) for v in x])
    y = A.solve(b)
    assert A.apply(y) == b


def test_solve_inconsistent():
    A = Matrix.from_lists(Field.F2, [[1, 1], [1, 1]])
    with pytest.raises(NoSolution):
        A.solve([1, 0])


@given(f2_matrices(5, 5), st.integers(1, 5), st.integers(0, 2 ** 25))
def test_product_rank_bound(a, k, bits):
    A = Matrix.from_lists(Field.F2, a)
    B = Matrix.from_lists(Field.F2, [[(bits >> (5 * r + c)) & 1 for c in range(k)] for r in range(A.ncols)], k)
    assert (A @ B).rank() <= min(A.rank(), B.rank())


@settings(max_examples=50)
@given(st.integers(1, 6), st.integers(0, 2 ** 32))
def test_inverse(n, seed):
    rng = random.Random(seed)
    for fld in (Field.F2, Field.Q):
        while True:
            A = Matrix.from_lists(fld, [[rng.randrange(2) for _ in range(n)] for _ in range(n)], n)
            if A.rank() == n:
                break
        assert A @ A.inverse() == Matrix.identity(fld, n)


def test_singular_inverse():
    with pytest.raises(NoSolution):
        Matrix.from_lists(Field.Q, [[1, 2], [2, 4]]).inverse()


def test_q_arithmetic_is_exact():
    A = Matrix.from_lists(Field.Q, [[Fraction(1, 3), 1], [1, 3]])
    assert A.rank() == 1
    assert Field.Q.parse("3/2") == Fraction(3, 2)
    assert Field.Q.format(Fraction(-3, 2)) == "-3/2"
    assert f2_rank([0b101, 0b011, 0b110]) == 2


def test_graded_space_names_and_truncation():
    V = GradedSpace.from_degrees(Field.F2, 4, [("a", 1), ("b", 3), ("c", 3)])
    assert V.dims() == (0, 1, 0, 2, 0)
    assert V.locate("c") == (3, 1)
    assert "b" in V and "z" not in V
    assert V.truncate(2).dims() == (0, 1, 0)
    with pytest.raises(StructuralError):
        GradedSpace.from_degrees(Field.F2, 2, [("a", 1), ("a", 2)])


def _random_map(rng, V, W):
    blocks = {d: Matrix.from_lists(Field.F2, [[rng.randrange(2) for _ in range(V.dim(d))] for _ in range(W.dim(d))],
                                   V.dim(d)) for d in range(V.trunc + 1)}
    return GradedMap(V, W, 0, blocks)


@settings(max_examples=40)
@given(st.lists(st.integers(0, 3), min_size=4, max_size=4), st.lists(st.integers(0, 3), min_size=4, max_size=4),
       st.integers(0, 2 ** 32))
def test_kernel_and_cokernel_are_exact(dv, dw, seed):
    rng = random.Random(seed)
    V, W = GradedSpace.from_dims(Field.F2, dv, "v"), GradedSpace.from_dims(Field.F2, dw, "w")
    f = _random_map(rng, V, W)
    Kr, inc = kernel(f)
    Q, proj = cokernel(f)
    assert compose(f, inc).is_zero()
    assert compose(proj, f).is_zero()
    for d in range(4):
        r = f.block(d).rank()
        assert Kr.dim(d) == V.dim(d) - r
        assert Q.dim(d) == W.dim(d) - r
        assert proj.block(d).rank() == Q.dim(d)


def test_kernel_needs_target_degrees():
    V = GradedSpace.from_dims(Field.F2, [0, 1, 1], "v")
    W = GradedSpace.from_dims(Field.F2, [0, 1], "w")
    f = GradedMap(V, W, 0, {0: Matrix.zeros(Field.F2, 0, 0), 1: Matrix.identity(Field.F2, 1)})
    with pytest.raises(TruncationOverflow):
        kernel(f)


def test_identity_and_tensor():
    V = GradedSpace.from_degrees(Field.Q, 3, [("x", 1), ("y", 2)])
    assert compose(identity(V), identity(V)) == identity(V)
    T = tensor(V, V)
    assert T.dims() == (0, 0, 1, 2)
    assert T.basis[3] == ("x⊗y", "y⊗x")

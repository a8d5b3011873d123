import random

import numpy as np
import pytest

from datacomplex.errors import FaceClosureError, IndexOutOfRangeError, InvalidInclusionError, InvalidPermutationError
from datacomplex.simpattr import (
    AttributeInclusion,
    Chain2,
    apply_faces,
    boundary_chain,
    check_permutation,
    compose_permutations,
    concat_sum,
    degeneracy_list,
    enumerate_inclusions,
    face_closure,
    face_inclusion,
    face_list,
    gf2_rank,
    homology_rank,
    inclusion_to_faces,
    invert_permutation,
    is_degenerate_cell,
    is_nondegenerate,
    merge_lists,
    permute_list,
    quotient,
    validate_inclusion,
)

BIG = tuple("aaaaabccd")
SMALL = tuple("aaacd")
PAPER_INCLUSION = AttributeInclusion(SMALL, BIG, (0, 1, 3, 7, 8))


def _random_list(rng, max_len=5):
    return tuple(rng.choice("abcd") for _ in range(rng.randint(1, max_len)))


# ----------------------------------------
# Faces and degeneracies
# ----------------------------------------
def test_face_and_degeneracy_examples():
    assert face_list("abc", 1) == ("a", "c")
    assert face_list("a", 0) == ()
    assert face_list(face_list("abc", 2), 0) == face_list(face_list("abc", 0), 1) == ("b",)
    assert degeneracy_list("ab", 0) == ("a", "a", "b")
    assert face_list(degeneracy_list("a", 0), 0) == ("a",)
    with pytest.raises(IndexOutOfRangeError):
        face_list("ab", 2)
    with pytest.raises(IndexError):
        degeneracy_list((), 0)


@pytest.mark.parametrize("seed", range(10))
def test_simplicial_identities_on_lists(seed):
    rng = random.Random(seed)
    for _ in range(50):
        t = _random_list(rng)
        n = len(t) - 1
        for j in range(n + 1):
            s = degeneracy_list(t, j)
            # d_j s_j = d_{j+1} s_j = id
            assert face_list(s, j) == face_list(s, j + 1) == t
            for i in range(n + 2):
                if i < j:
                    assert face_list(s, i) == degeneracy_list(face_list(t, i), j - 1)
                elif i > j + 1:
                    assert face_list(s, i) == degeneracy_list(face_list(t, i - 1), j)
            for i in range(j + 1):
                assert degeneracy_list(s, i) == degeneracy_list(degeneracy_list(t, i), j + 1)
            for i in range(j):
                assert face_list(face_list(t, j), i) == face_list(face_list(t, i), j - 1)


def test_nondegenerate_and_degenerate_cells():
    assert is_nondegenerate("abc")
    assert not is_nondegenerate("aba")
    assert not is_degenerate_cell("aba")
    assert is_degenerate_cell("abb")


# ----------------------------------------
# Inclusions
# ----------------------------------------
def test_validate_inclusion():
    assert validate_inclusion(PAPER_INCLUSION)
    assert validate_inclusion(AttributeInclusion.identity("abc"))
    assert not validate_inclusion(AttributeInclusion(("b", "a"), ("a", "b"), (1, 0)))
    assert not validate_inclusion(AttributeInclusion(("a",), ("a", "b"), (1,)))


def test_from_map_rejects_bad_maps():
    with pytest.raises(InvalidInclusionError):
        AttributeInclusion.from_map("abc", [2, 1])
    with pytest.raises(InvalidInclusionError):
        AttributeInclusion.from_map("abc", [3])


def test_quotient_examples():
    rest, complement = quotient(PAPER_INCLUSION)
    assert rest == tuple("aabc")
    assert complement.index_map == (2, 4, 5, 6)

    rest, complement = quotient(AttributeInclusion.identity("abc"))
    assert rest == () and complement.index_map == ()

    rest, complement = quotient(AttributeInclusion.empty("abc"))
    assert rest == tuple("abc") and complement.index_map == (0, 1, 2)


def test_concat_sum():
    total, left, right = concat_sum(SMALL, tuple("aabc"))
    assert total == tuple("aaacdaabc")
    assert left.index_map == (0, 1, 2, 3, 4)
    assert right.index_map == (5, 6, 7, 8)
    assert quotient(left)[1] == right
    assert concat_sum((), "ab")[0] == ("a", "b")
    assert concat_sum("ab", ())[0] == ("a", "b")


def test_compose_and_face_inclusion():
    inner = AttributeInclusion.from_map("ac", [1])
    outer = face_inclusion("abc", 1)
    assert outer.source == ("a", "c")
    composed = outer.compose(inner)
    assert composed.source == ("c",) and composed.index_map == (2,)
    with pytest.raises(InvalidInclusionError):
        inner.compose(outer)


def test_merge_reproduces_worked_example():
    t01 = ("p", "a", "q", "r", "b", "s")
    t02 = ("u", "a", "v", "b", "w")
    i01 = AttributeInclusion.from_map(t01, [1, 4])
    i02 = AttributeInclusion.from_map(t02, [1, 3])
    result = merge_lists(t01, t02, i01, i02)
    assert result.mu01.index_map == (0, 2, 3, 4, 6, 7)
    assert result.mu02.index_map == (1, 2, 5, 6, 8)
    assert result.iota0.index_map == (2, 6)
    assert result.iota1.index_map == (0, 3, 4, 7)
    assert result.iota2.index_map == (1, 5, 8)
    assert result.merged == ("p", "u", "a", "q", "r", "v", "b", "s", "w")


def test_merge_edge_cases():
    empty = merge_lists("ab", "cd", AttributeInclusion.empty("ab"), AttributeInclusion.empty("cd"))
    assert empty.merged == tuple("abcd")

    same = merge_lists("ab", "ab", AttributeInclusion.identity("ab"), AttributeInclusion.identity("ab"))
    assert same.merged == ("a", "b")
    assert same.mu01.index_map == same.mu02.index_map == same.iota0.index_map == (0, 1)

    with pytest.raises(InvalidInclusionError):
        merge_lists("ab", "bc", AttributeInclusion.from_map("ab", [0]), AttributeInclusion.from_map("bc", [0]))


def test_inclusion_to_faces():
    faces = inclusion_to_faces(PAPER_INCLUSION)
    assert sorted(faces) == [2, 4, 5, 6]
    assert apply_faces(BIG, faces) == SMALL
    assert inclusion_to_faces(AttributeInclusion.identity("abc")) == []
    faces = inclusion_to_faces(AttributeInclusion.empty("ab"))
    assert apply_faces("ab", faces) == ()


def test_enumerate_inclusions_counts_and_order():
    found = list(enumerate_inclusions(SMALL, BIG))
    assert len(found) == 20
    assert PAPER_INCLUSION in found
    maps = [i.index_map for i in found]
    assert maps == sorted(maps)
    assert all(i.is_valid() for i in found)
    assert list(enumerate_inclusions("ab", "ba")) == []
    assert [i.index_map for i in enumerate_inclusions((), "ab")] == [()]


# ----------------------------------------
# Permutations
# ----------------------------------------
def test_permutations():
    assert permute_list("abc", [1, 2, 0]) == ("c", "a", "b")
    perm = (2, 0, 1)
    assert compose_permutations(invert_permutation(perm), perm) == (0, 1, 2)
    outer, inner = (1, 0, 2), (0, 2, 1)
    assert permute_list(permute_list("abc", inner), outer) == permute_list("abc", compose_permutations(outer, inner))
    with pytest.raises(InvalidPermutationError):
        check_permutation([0, 0], 2)
    with pytest.raises(InvalidPermutationError):
        permute_list("ab", [0])


# ----------------------------------------
# Chains and homology
# ----------------------------------------
def test_boundary_chain_examples():
    assert boundary_chain(Chain2.of(["abc"])).cells == {("b", "c"), ("a", "c"), ("a", "b")}
    assert boundary_chain(boundary_chain(Chain2.of(["abcd"]))).cells == frozenset()
    assert boundary_chain(Chain2.of(["aa"])).cells == frozenset()
    assert Chain2.of(["ab", "ab"], level=1).cells == frozenset()


@pytest.mark.parametrize("seed", range(5))
def test_boundary_squares_to_zero(seed):
    rng = random.Random(seed)
    for level in range(1, 5):
        cells = [tuple(rng.choice("abcd") for _ in range(level + 1)) for _ in range(6)]
        chain = Chain2.of(cells, level=level)
        assert boundary_chain(boundary_chain(chain)).cells == frozenset()


def test_face_closure():
    closed = face_closure(["abc"])
    assert closed == {("a", "b", "c"), ("b", "c"), ("a", "c"), ("a", "b"), ("a",), ("b",), ("c",)}


def test_gf2_rank():
    assert gf2_rank(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)) == 2
    assert gf2_rank(np.eye(3, dtype=np.uint8)) == 3
    assert gf2_rank(np.zeros((2, 2), dtype=np.uint8)) == 0


def test_homology_examples():
    circle = face_closure(["ab", "bc", "ac"])
    assert homology_rank(circle, 1) == 1
    assert homology_rank(circle, 0) == 1
    disk = face_closure(["abc"])
    assert homology_rank(disk, 1) == 0
    assert homology_rank(face_closure(["a", "b"]), 0) == 2
    with pytest.raises(FaceClosureError):
        homology_rank([("a", "b")], 1)

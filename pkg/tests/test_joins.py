import random
from fractions import Fraction

import pytest

from datacomplex.errors import IncompatibleHornError, InconsistentOverlapError, ListMismatchError
from datacomplex.joins import (
    FALLBACK,
    FILLED,
    HornProblem,
    JoinProblem,
    conditional_glue,
    fill_boundary,
    fill_horn_constructive,
    fill_horn_lp,
    joins_feasible,
    minimize_boundary_slack,
    overlap_consistent,
    trivial_join,
)
from datacomplex.lp import INFEASIBLE
from datacomplex.measures import independent_product, marginalize, permute, point_mass, reduce
from datacomplex.simpattr import AttributeInclusion, face_list
from tests.conftest import anti_pair, damped_pair, discrete_space, make_schema, random_table, table

HALF = Fraction(1, 2)
XYZ = ("X", "Y", "Z")


def _anti_boundary():
    return HornProblem(XYZ, {0: anti_pair("Y", "Z"), 1: anti_pair("X", "Z"), 2: anti_pair("X", "Y")})


def _faces_of(t, skip=None):
    return {i: marginalize(t, i) for i in range(len(t.attributes)) if i != skip}


# ----------------------------------------
# Joins
# ----------------------------------------
def test_overlap_consistency_examples():
    a, b = table("X", {"0": 1}), table("Y", {"1": 1})
    assert overlap_consistent(JoinProblem.over(a, b, [], []))
    assert overlap_consistent(JoinProblem.over(a, a, [0], [0]))
    inconsistent = JoinProblem.over(table("XY", {"00": 1}), table("XZ", {"10": 1}), [0], [0])
    assert not overlap_consistent(inconsistent)
    assert not joins_feasible(inconsistent)
    with pytest.raises(InconsistentOverlapError):
        conditional_glue(inconsistent)


def test_glue_over_empty_overlap_is_the_independent_product():
    t1 = table("XY", {"01": HALF, "10": HALF})
    t2 = table("Z", {"0": "1/3", "1": "2/3"})
    assert conditional_glue(JoinProblem.over(t1, t2, [], [])) == independent_product(t1, t2)
    assert trivial_join(t1, t2) == independent_product(t1, t2)


def test_glue_is_idempotent_on_full_overlap():
    t = table("XY", {"01": "1/3", "11": "2/3"})
    assert conditional_glue(JoinProblem.over(t, t, [0, 1], [0, 1])) == t


def test_glue_of_chain_by_hand():
    ab = table("XY", {"00": "1/4", "01": "1/4", "11": "1/2"})
    bc = table("YZ", {"00": "1/4", "10": "1/4", "11": "1/2"})
    problem = JoinProblem.over(ab, bc, [1], [0])
    assert joins_feasible(problem)
    glued = conditional_glue(problem)
    assert glued.attributes == XYZ
    assert glued == table(XYZ, {
        "000": "1/4",
        "010": "1/12", "011": "1/6",
        "110": "1/6", "111": "1/3",
    })
    merge = problem.merge()
    assert reduce(glued, merge.mu01) == ab and reduce(glued, merge.mu02) == bc


@pytest.mark.parametrize("seed", range(25))
def test_glue_reproduces_random_consistent_inputs(binary_schema, seed):
    rng = random.Random(seed)
    for _ in range(20):
        joint = random_table(rng, binary_schema, ("X", "Y", "Z", "W"))
        left = reduce(joint, AttributeInclusion.from_map(joint.attributes, [0, 1, 2]))
        right = reduce(joint, AttributeInclusion.from_map(joint.attributes, [1, 3]))
        problem = JoinProblem.over(left, right, [1], [0])
        glued = conditional_glue(problem)
        merge = problem.merge()
        assert reduce(glued, merge.mu01) == left
        assert reduce(glued, merge.mu02) == right
        # swapping the inputs only moves entries around the merged list
        swapped = conditional_glue(JoinProblem.over(right, left, [0], [1]))
        assert sorted(m for _, m in swapped.atoms) == sorted(m for _, m in glued.atoms)


def _order_keeping_scatter(rng, size, anchors):
    # the images of the overlap positions must stay increasing
    while True:
        perm = list(range(size))
        rng.shuffle(perm)
        images = [perm[j] for j in anchors]
        if images == sorted(images):
            return perm


def _merged_permutation(merge, target, left_perm, right_perm):
    perm = [0] * len(merge.merged)
    for k, pos in enumerate(merge.mu01.index_map):
        perm[pos] = target.mu01.index_map[left_perm[k]]
    for k, pos in enumerate(merge.mu02.index_map):
        perm[pos] = target.mu02.index_map[right_perm[k]]
    return perm


@pytest.mark.parametrize("seed", range(15))
def test_glue_commutes_with_permutations(binary_schema, seed):
    rng = random.Random(seed)
    for _ in range(10):
        joint = random_table(rng, binary_schema, ("X", "Y", "Z", "W"))
        left = reduce(joint, AttributeInclusion.from_map(joint.attributes, [0, 1, 2]))
        right = reduce(joint, AttributeInclusion.from_map(joint.attributes, [1, 2, 3]))
        problem = JoinProblem.over(left, right, [1, 2], [0, 1])
        glued = conditional_glue(problem)
        merge = problem.merge()

        s1 = _order_keeping_scatter(rng, 3, [1, 2])
        s2 = _order_keeping_scatter(rng, 3, [0, 1])
        moved = JoinProblem.over(permute(left, s1), permute(right, s2), [s1[1], s1[2]], [s2[0], s2[1]])
        perm = _merged_permutation(merge, moved.merge(), s1, s2)
        assert permute(glued, perm) == conditional_glue(moved)

        swapped = JoinProblem.over(right, left, [0, 1], [1, 2])
        target = swapped.merge()
        perm = [0] * len(merge.merged)
        for k, pos in enumerate(merge.mu01.index_map):
            perm[pos] = target.mu02.index_map[k]
        for k, pos in enumerate(merge.mu02.index_map):
            perm[pos] = target.mu01.index_map[k]
        assert permute(glued, perm) == conditional_glue(swapped)

# ----------------------------------------
# Boundaries
# ----------------------------------------
def test_boundary_of_a_glue_fills_exactly(binary_schema):
    rng = random.Random(7)
    joint = random_table(rng, binary_schema, XYZ)
    result = fill_boundary(binary_schema, HornProblem(XYZ, _faces_of(joint)))
    assert result.status == FILLED
    assert all(v == 0 for v in result.achieved_slacks.values())
    assert _faces_of(result.table) == _faces_of(joint)


def test_anti_triangle_needs_one_third(binary_schema):
    blocked = fill_boundary(binary_schema, _anti_boundary(), slack=0)
    assert blocked.status == INFEASIBLE
    assert blocked.certificate is not None

    filled = fill_boundary(binary_schema, _anti_boundary(), slack=Fraction(1, 3))
    assert filled.filled
    assert max(filled.achieved_slacks.values()) <= Fraction(1, 3)

    assert fill_boundary(binary_schema, _anti_boundary(), slack=Fraction(1, 4)).status == INFEASIBLE
    assert minimize_boundary_slack(binary_schema, _anti_boundary()).slack == Fraction(1, 3)


@pytest.mark.parametrize("weight, expected", [
    (Fraction(0), Fraction(1, 3)),
    (Fraction(1, 2), Fraction(1, 12)),
    (Fraction(1), Fraction(0)),
])
def test_damped_triangle_minimal_slack(binary_schema, weight, expected):
    h = HornProblem(XYZ, {0: damped_pair("Y", "Z", weight), 1: damped_pair("X", "Z", weight),
                          2: damped_pair("X", "Y", weight)})
    result = minimize_boundary_slack(binary_schema, h)
    assert result.slack == expected
    assert max(result.achieved_slacks.values()) == expected


def test_boundary_rejects_missing_face(binary_schema):
    h = HornProblem(XYZ, {1: anti_pair("X", "Z"), 2: anti_pair("X", "Y")})
    with pytest.raises(ListMismatchError):
        fill_boundary(binary_schema, h)


# ----------------------------------------
# Horns
# ----------------------------------------
def test_anti_triangle_horn_fills(binary_schema):
    h = HornProblem(XYZ, {1: anti_pair("X", "Z"), 2: anti_pair("X", "Y")})
    result = fill_horn_lp(binary_schema, h)
    assert result.filled
    assert marginalize(result.table, 1) == anti_pair("X", "Z")
    assert marginalize(result.table, 2) == anti_pair("X", "Y")


def test_incompatible_horn_is_an_error(binary_schema):
    h = HornProblem(XYZ, {1: table("XZ", {"00": 1}), 2: table("XY", {"10": 1})})
    with pytest.raises(IncompatibleHornError):
        fill_horn_lp(binary_schema, h)
    with pytest.raises(ListMismatchError):
        HornProblem(XYZ, {1: table("XY", {"00": 1}), 2: table("XY", {"00": 1})})
    with pytest.raises(ListMismatchError):
        HornProblem(("X",), {})


def test_constructive_two_faces(binary_schema):
    xy = table("XY", {"00": "1/4", "01": "1/4", "11": "1/2"})
    xz = table("XZ", {"01": "1/2", "10": "1/4", "11": "1/4"})
    h = HornProblem(XYZ, {1: xz, 2: xy})
    result = fill_horn_constructive(binary_schema, h)
    assert result.status == FILLED and result.method == "constructive"
    assert result.table == conditional_glue(JoinProblem.over(xy, xz, [0], [0]))


def test_constructive_single_face(binary_schema):
    h = HornProblem(("X", "Y"), {1: table("X", {"0": "1/3", "1": "2/3"})})
    result = fill_horn_constructive(binary_schema, h)
    assert result.filled
    assert marginalize(result.table, 1) == table("X", {"0": "1/3", "1": "2/3"})


@pytest.mark.parametrize("seed", range(20))
def test_random_exact_horns_fill(binary_schema, seed):
    rng = random.Random(seed)
    for _ in range(10):
        size = rng.randint(2, 4)
        full = ("X", "Y", "Z", "W")[:size]
        joint = random_table(rng, binary_schema, full)
        missing = rng.randrange(size)
        h = HornProblem(full, _faces_of(joint, skip=missing))

        by_lp = fill_horn_lp(binary_schema, h)
        assert by_lp.filled
        assert all(marginalize(by_lp.table, i) == t for i, t in h.faces.items())

        built = fill_horn_constructive(binary_schema, h)
        assert built.status in (FILLED, FALLBACK)
        assert all(marginalize(built.table, i) == t for i, t in h.faces.items())
        assert face_list(full, missing) == marginalize(built.table, missing).attributes


def test_constructive_filler_falls_back_to_the_lp():
    schema = make_schema(("X", "Y", "Z", "W"), discrete_space("tri", ("0", "1", "2")))
    full = ("X", "Y", "Z", "W")
    rng = random.Random(7)
    found = None
    for _ in range(400):
        joint = random_table(rng, schema, full, max_atoms=12)
        for missing in range(4):
            h = HornProblem(full, _faces_of(joint, skip=missing))
            built = fill_horn_constructive(schema, h)
            if built.status == FALLBACK:
                found = h, built
                break
        if found:
            break

    assert found is not None
    h, built = found
    assert built.method == "lp-fallback"
    assert built.filled
    assert all(marginalize(built.table, i) == t for i, t in h.faces.items())

def test_zero_mass_horn(binary_schema):
    empty_xy = table("XY", {})
    h = HornProblem(XYZ, {1: table("XZ", {}), 2: empty_xy})
    assert fill_horn_constructive(binary_schema, h).table == table(XYZ, {})


def test_point_mass_horn(binary_schema):
    h = HornProblem(XYZ, {0: point_mass("YZ", "11"), 2: point_mass("XY", "01")})
    result = fill_horn_lp(binary_schema, h)
    assert result.table == point_mass(XYZ, "011")

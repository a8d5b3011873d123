import itertools
import random
from fractions import Fraction

import pytest

from datacomplex.errors import ListMismatchError, MassMismatchError
from datacomplex.measures import diagonal, marginalize, point_mass
from datacomplex.schema import product_distance
from datacomplex.transport import optimal_coupling, wasserstein
from tests.conftest import discrete_space, make_schema, random_table, table


@pytest.fixture
def bits():
    return make_schema(("X", "Y"), discrete_space("bit", ("0", "1")))


def _tree_vertex_minimum(schema, attributes, t1, t2):
    """
    Minimum cost over the basic solutions of the transportation polytope:
    every spanning tree of the row/column graph, solved by peeling leaves.
    """
    rows, cols = t1.atoms, t2.atoms
    cells = list(itertools.product(range(len(rows)), range(len(cols))))
    size = len(rows) + len(cols) - 1
    best = None
    for basis in itertools.combinations(cells, size):
        supply = {("r", i): m for i, (_, m) in enumerate(rows)}
        supply.update({("c", j): m for j, (_, m) in enumerate(cols)})
        edges = set(basis)
        flow = {}
        while edges:
            degree = {}
            for i, j in edges:
                degree.setdefault(("r", i), []).append((i, j))
                degree.setdefault(("c", j), []).append((i, j))
            leaf = next((node for node, es in sorted(degree.items()) if len(es) == 1), None)
            if leaf is None:
                break
            edge = degree[leaf][0]
            amount = supply[leaf]
            flow[edge] = amount
            supply[("r", edge[0])] -= amount
            supply[("c", edge[1])] -= amount
            edges.remove(edge)
        if edges or any(v != 0 for v in supply.values()) or any(v < 0 for v in flow.values()):
            continue
        cost = sum(m * product_distance(schema, attributes, rows[i][0], cols[j][0]) for (i, j), m in flow.items())
        best = cost if best is None else min(best, cost)
    return best


def test_identical_tables_are_at_distance_zero(line_schema):
    rng = random.Random(1)
    t = random_table(rng, line_schema, ("A", "B"))
    assert wasserstein(line_schema, t, t) == 0
    coupling = optimal_coupling(line_schema, t, t)
    assert all(x == y for (x, y), _ in coupling.atoms)


def test_point_masses(line_schema):
    x, y = point_mass(("A", "B"), ("0", "3")), point_mass(("A", "B"), ("2", "1"))
    assert wasserstein(line_schema, x, y) == 2
    coupling = optimal_coupling(line_schema, x, y)
    assert coupling.atoms == (((("0", "3"), ("2", "1")), Fraction(1)),)


def test_two_point_example(bits):
    t1 = table("X", {"0": "3/4", "1": "1/4"})
    t2 = table("X", {"0": "1/4", "1": "3/4"})
    assert wasserstein(bits, t1, t2) == Fraction(1, 2)
    coupling = optimal_coupling(bits, t1, t2)
    moved = sum(m for (x, y), m in coupling.atoms if x != y)
    assert moved == Fraction(1, 2)
    assert coupling.first_marginal() == t1
    assert coupling.second_marginal() == t2
    assert coupling.interleaved_list == ("X", "X")


def test_mismatches_are_errors(bits):
    with pytest.raises(MassMismatchError):
        wasserstein(bits, table("X", {"0": 1}), table("X", {"0": 2}))
    with pytest.raises(ListMismatchError):
        wasserstein(bits, table("X", {"0": 1}), table("Y", {"0": 1}))


@pytest.mark.parametrize("seed", range(15))
def test_lp_value_matches_vertex_enumeration(line_schema, seed):
    rng = random.Random(seed)
    attrs = ("A", "B")[: rng.randint(1, 2)]
    t1 = random_table(rng, line_schema, attrs, max_atoms=4, mass=Fraction(1))
    t2 = random_table(rng, line_schema, attrs, max_atoms=4, mass=Fraction(1))
    value = wasserstein(line_schema, t1, t2)
    assert value == _tree_vertex_minimum(line_schema, attrs, t1, t2)
    coupling = optimal_coupling(line_schema, t1, t2)
    assert coupling.cost(line_schema) == value
    assert coupling.first_marginal() == t1 and coupling.second_marginal() == t2


@pytest.mark.parametrize("seed", range(10))
def test_metric_axioms(line_schema, seed):
    rng = random.Random(seed)
    attrs = ("A", "B")
    for _ in range(20):
        t1, t2, t3 = (random_table(rng, line_schema, attrs, max_atoms=3, mass=Fraction(2)) for _ in range(3))
        d12 = wasserstein(line_schema, t1, t2)
        assert d12 == wasserstein(line_schema, t2, t1)
        assert wasserstein(line_schema, t1, t3) <= d12 + wasserstein(line_schema, t2, t3)
        assert (d12 == 0) == (t1 == t2)


@pytest.mark.parametrize("seed", range(10))
def test_faces_and_degeneracies_do_not_expand(line_schema, seed):
    rng = random.Random(seed)
    for _ in range(50):
        attrs = tuple(rng.choice("ABC") for _ in range(rng.randint(1, 3)))
        t1 = random_table(rng, line_schema, attrs, max_atoms=3, mass=Fraction(1))
        t2 = random_table(rng, line_schema, attrs, max_atoms=3, mass=Fraction(1))
        d = wasserstein(line_schema, t1, t2)
        i = rng.randrange(len(attrs))
        assert wasserstein(line_schema, marginalize(t1, i), marginalize(t2, i)) <= d
        assert wasserstein(line_schema, diagonal(t1, i), diagonal(t2, i)) <= d

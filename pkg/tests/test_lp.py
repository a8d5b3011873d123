import itertools
import random
from fractions import Fraction

import pytest

from datacomplex.config import override_settings
from datacomplex.lp import (
    BUDGET_EXCEEDED,
    EQ,
    FEASIBLE,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    minimize,
    solve_feasibility,
)


def test_single_equality_is_feasible():
    p = LinearProgram("eq")
    x = p.add_variable("x")
    p.add_constraint({x: 1}, EQ, 1)
    result = solve_feasibility(p)
    assert result.status == FEASIBLE
    assert result.value("x") == 1


def test_contradiction_carries_a_verified_certificate():
    p = LinearProgram("contradiction")
    x = p.add_variable("x")
    p.add_constraint({x: 1}, GE, 1, "low")
    p.add_constraint({x: 1}, LE, 0, "high")
    result = solve_feasibility(p)
    assert result.status == INFEASIBLE
    assert result.certificate.verify(p)
    assert set(result.certificate.to_dict()) <= {"low", "high"}


def test_minimize_examples():
    p = LinearProgram("bound")
    t = p.add_variable("t")
    p.add_constraint({t: 1}, GE, 3)
    p.set_objective({t: 1})
    result = minimize(p)
    assert result.status == OPTIMAL and result.optimum == 3

    p = LinearProgram("sum")
    x, y = p.add_variable("x"), p.add_variable("y")
    p.add_constraint({x: 1, y: 1}, GE, 2)
    p.set_objective({x: 1, y: 1})
    assert minimize(p).optimum == 2


def test_free_variables_and_unbounded():
    p = LinearProgram("free")
    z = p.add_variable("z", free=True)
    p.add_constraint({z: 1}, LE, -5)
    p.set_objective({z: -1})
    result = minimize(p)
    assert result.status == OPTIMAL and result.value("z") == -5

    p = LinearProgram("unbounded")
    z = p.add_variable("z", free=True)
    p.set_objective({z: 1})
    assert minimize(p).status == UNBOUNDED


def test_minimize_needs_objective():
    with pytest.raises(ValueError):
        minimize(LinearProgram("none"))


def test_program_rejects_bad_input():
    p = LinearProgram("bad")
    p.add_variable("x")
    with pytest.raises(ValueError):
        p.add_variable("x")
    with pytest.raises(ValueError):
        p.add_constraint({"y": 1}, EQ, 0)
    with pytest.raises(ValueError):
        p.add_constraint({"x": 1}, "<", 0)
    p.add_constraint({"x": 1}, EQ, 0, "only")
    with pytest.raises(ValueError):
        p.add_constraint({"x": 1}, EQ, 0, "only")


def test_budget_exceeded_reports_sizes():
    p = LinearProgram("big")
    for k in range(3):
        p.add_variable(f"x{k}")
    with override_settings(variable_budget=2):
        result = solve_feasibility(p)
    assert result.status == BUDGET_EXCEEDED
    assert result.sizes["variables"] == 3


def test_text_dump(tmp_path):
    p = LinearProgram("dump")
    x = p.add_variable("x")
    z = p.add_variable("z", free=True)
    p.add_constraint({x: Fraction(1, 2), z: -1}, LE, Fraction(3, 4), "row")
    p.set_objective({x: 1})
    assert p.to_text() == "lp dump\nvar x\nvar z free\nmin 0 + 1 x\nrow: 1/2 x + -1 z <= 3/4\n"

    with override_settings(lp_dump_dir=tmp_path):
        minimize(p)
    dumped = list(tmp_path.glob("dump-*.lp"))
    assert len(dumped) == 1
    assert dumped[0].read_text(encoding="utf-8") == p.to_text()


def _northwest_corner(supply, demand):
    """Independent feasible transport plan."""
    supply, demand = list(supply), list(demand)
    plan = {}
    i = j = 0
    while i < len(supply) and j < len(demand):
        amount = min(supply[i], demand[j])
        plan[(i, j)] = amount
        supply[i] -= amount
        demand[j] -= amount
        if supply[i] == 0:
            i += 1
        else:
            j += 1
    return plan


def _transport_program(supply, demand, cost=None):
    p = LinearProgram("transport")
    names = {(i, j): p.add_variable(f"x{i}_{j}") for i in range(len(supply)) for j in range(len(demand))}
    for i, s in enumerate(supply):
        p.add_constraint({names[i, j]: 1 for j in range(len(demand))}, EQ, s, f"row{i}")
    for j, d in enumerate(demand):
        p.add_constraint({names[i, j]: 1 for i in range(len(supply))}, EQ, d, f"col{j}")
    if cost is not None:
        p.set_objective({names[k]: cost[k] for k in names})
    return p, names


@pytest.mark.parametrize("seed", range(10))
def test_transportation_polytope_is_feasible(seed):
    rng = random.Random(seed)
    supply = [Fraction(rng.randint(1, 5)) for _ in range(rng.randint(1, 4))]
    demand = [Fraction(rng.randint(1, 5)) for _ in range(rng.randint(1, 4))]
    demand[-1] += sum(supply) - sum(demand)
    if demand[-1] <= 0:
        supply[-1] += 1 - demand[-1]
        demand[-1] = Fraction(1)
    plan = _northwest_corner(supply, demand)
    p, names = _transport_program(supply, demand)
    assert p.violations({names[k]: v for k, v in plan.items()}) == []
    assert solve_feasibility(p).status == FEASIBLE

    demand[0] += 1
    p, _ = _transport_program(supply, demand)
    result = solve_feasibility(p)
    assert result.status == INFEASIBLE
    assert result.certificate.verify(p)


@pytest.mark.parametrize("seed", range(10))
def test_two_by_two_cost_matches_vertex_enumeration(seed):
    rng = random.Random(seed)
    supply = [Fraction(rng.randint(1, 4)), Fraction(rng.randint(1, 4))]
    demand = [Fraction(rng.randint(0, int(sum(supply))))]
    demand.append(sum(supply) - demand[0])
    cost = {k: Fraction(rng.randint(0, 5)) for k in itertools.product(range(2), range(2))}
    # the polytope is a segment parametrized by x00
    low = max(Fraction(0), supply[0] - demand[1], demand[0] - supply[1])
    high = min(supply[0], demand[0])
    best = None
    for x00 in (low, high):
        plan = {(0, 0): x00, (0, 1): supply[0] - x00, (1, 0): demand[0] - x00}
        plan[(1, 1)] = supply[1] - plan[(1, 0)]
        value = sum(cost[k] * plan[k] for k in plan)
        best = value if best is None else min(best, value)
    p, _ = _transport_program(supply, demand, cost)
    assert minimize(p).optimum == best

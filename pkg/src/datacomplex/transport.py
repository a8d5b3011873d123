"""
Wasserstein-1 transport between equal-mass tables on the same list, with the
L-infinity product metric as ground cost.

The helpers at the bottom add transport blocks to an existing LinearProgram.
Joins and obstruction queries use them to bound the distance between a
table built from LP variables and a prescribed table.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from .errors import BudgetExceededError, ListMismatchError, MassMismatchError, SolverInvariantError
from .lp import BUDGET_EXCEEDED, EQ, LE, OPTIMAL, LinearProgram, minimize
from .measures import DataTable, total_mass
from .schema import Schema, ValueTuple, product_distance
from .simpattr import AttributeInclusion, AttributeList

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass(frozen=True)
class Coupling:
    """
    A measure on T ⊕ T. The two copies are interleaved: position 2i is entry i
    of the first copy, position 2i+1 entry i of the second.
    """
    attributes: AttributeList
    atoms: Tuple[Tuple[Tuple[ValueTuple, ValueTuple], Fraction], ...]

    @classmethod
    def from_mapping(cls, attributes: Sequence[str], masses: Mapping[Tuple[ValueTuple, ValueTuple], Fraction]):
        return cls(tuple(attributes), tuple(sorted((k, m) for k, m in masses.items() if m != 0)))

    @property
    def interleaved_list(self) -> AttributeList:
        return tuple(a for a in self.attributes for _ in range(2))

    @property
    def first_inclusion(self) -> AttributeInclusion:
        return AttributeInclusion.from_map(self.interleaved_list, range(0, 2 * len(self.attributes), 2))

    @property
    def second_inclusion(self) -> AttributeInclusion:
        return AttributeInclusion.from_map(self.interleaved_list, range(1, 2 * len(self.attributes), 2))

    def as_table(self) -> DataTable:
        masses = {}
        for (x, y), m in self.atoms:
            masses[tuple(v for pair in zip(x, y) for v in pair)] = m
        return DataTable.from_mapping(self.interleaved_list, masses)

    def first_marginal(self) -> DataTable:
        masses: Dict[ValueTuple, Fraction] = {}
        for (x, _), m in self.atoms:
            masses[x] = masses.get(x, ZERO) + m
        return DataTable.from_mapping(self.attributes, masses)

    def second_marginal(self) -> DataTable:
        masses: Dict[ValueTuple, Fraction] = {}
        for (_, y), m in self.atoms:
            masses[y] = masses.get(y, ZERO) + m
        return DataTable.from_mapping(self.attributes, masses)

    def cost(self, schema: Schema) -> Fraction:
        return sum((m * product_distance(schema, self.attributes, x, y) for (x, y), m in self.atoms), ZERO)

    def to_dict(self) -> dict:
        return {
            "list": list(self.interleaved_list),
            "atoms": [{"first": list(x), "second": list(y), "mass": str(m)} for (x, y), m in self.atoms],
        }


def _check_pair(t1: DataTable, t2: DataTable) -> None:
    if t1.attributes != t2.attributes:
        raise ListMismatchError(f"tables are on different lists: {list(t1.attributes)} vs {list(t2.attributes)}")
    m1, m2 = total_mass(t1), total_mass(t2)
    if m1 != m2:
        raise MassMismatchError(f"no coupling between masses {m1} and {m2}")


def _trivial_coupling(t1: DataTable, t2: DataTable) -> Optional[Coupling]:
    if t1 == t2:
        return Coupling.from_mapping(t1.attributes, {(x, x): m for x, m in t1.atoms})
    if len(t2.atoms) == 1:
        y = t2.atoms[0][0]
        return Coupling.from_mapping(t1.attributes, {(x, y): m for x, m in t1.atoms})
    if len(t1.atoms) == 1:
        x = t1.atoms[0][0]
        return Coupling.from_mapping(t1.attributes, {(x, y): m for y, m in t2.atoms})
    return None


def optimal_coupling(schema: Schema, t1: DataTable, t2: DataTable) -> Coupling:
    _check_pair(t1, t2)
    coupling = _trivial_coupling(t1, t2)
    if coupling is not None:
        return coupling

    program = LinearProgram("transport")
    first, second = table_expr(t1), table_expr(t2)
    pairs = add_coupling(program, schema, t1.attributes, first, second, bound=None, prefix="pi")
    program.set_objective({name: d for name, d in pairs.costs.items()})
    result = minimize(program)
    if result.status == BUDGET_EXCEEDED:
        raise BudgetExceededError("transport problem exceeds the variable budget", result.sizes)
    if result.status != OPTIMAL:
        raise SolverInvariantError(f"transport LP between equal-mass tables returned {result.status}")
    masses = {pair: result.value(name) for pair, name in pairs.variables.items()}
    coupling = Coupling.from_mapping(t1.attributes, masses)
    if coupling.first_marginal() != t1 or coupling.second_marginal() != t2:
        raise SolverInvariantError("optimal coupling does not reproduce its marginals")
    return coupling


def wasserstein(schema: Schema, t1: DataTable, t2: DataTable) -> Fraction:
    """Exact W1 distance under the L-infinity product metric."""
    return optimal_coupling(schema, t1, t2).cost(schema)


# ----------------------------------------
# LP building blocks
# ----------------------------------------
# An affine expression: (coefficients by variable name, constant).
Affine = Tuple[Dict[str, Fraction], Fraction]
# A measure whose masses are affine in LP variables, keyed by tuple.
MeasureExpr = Dict[ValueTuple, Affine]


def table_expr(t: DataTable) -> MeasureExpr:
    return {x: ({}, m) for x, m in t.atoms}


def variable_table(program: LinearProgram, schema: Schema, attributes: Sequence[str], prefix: str) -> Tuple[MeasureExpr, Dict[ValueTuple, str]]:
    """One nonnegative variable per tuple of Val(T), in declared point order."""
    expr: MeasureExpr = {}
    names: Dict[ValueTuple, str] = {}
    for x in schema.values(attributes):
        name = program.add_variable(f"{prefix}[{','.join(x)}]")
        names[x] = name
        expr[x] = ({name: Fraction(1)}, ZERO)
    return expr, names


def reduce_expr(expr: MeasureExpr, index_map: Sequence[int]) -> MeasureExpr:
    out: MeasureExpr = {}
    for x, (coeffs, constant) in expr.items():
        y = tuple(x[j] for j in index_map)
        acc_coeffs, acc_constant = out.get(y, ({}, ZERO))
        acc_coeffs = dict(acc_coeffs)
        for name, c in coeffs.items():
            acc_coeffs[name] = acc_coeffs.get(name, ZERO) + c
        out[y] = (acc_coeffs, acc_constant + constant)
    return out


def evaluate_expr(expr: MeasureExpr, assignment: Mapping[str, Fraction], attributes: Sequence[str]) -> DataTable:
    masses = {}
    for x, (coeffs, constant) in expr.items():
        masses[x] = constant + sum((c * assignment.get(n, ZERO) for n, c in coeffs.items()), ZERO)
    return DataTable.from_mapping(attributes, masses)


def _affine_difference(p: Affine, q: Affine) -> Tuple[Dict[str, Fraction], Fraction]:
    coeffs = dict(p[0])
    for name, c in q[0].items():
        coeffs[name] = coeffs.get(name, ZERO) - c
    return coeffs, q[1] - p[1]


def constrain_equal(program: LinearProgram, p: MeasureExpr, q: MeasureExpr, label: str) -> None:
    """p = q atom by atom."""
    empty: Affine = ({}, ZERO)
    for x in sorted(set(p) | set(q)):
        coeffs, rhs = _affine_difference(p.get(x, empty), q.get(x, empty))
        if any(c != 0 for c in coeffs.values()) or rhs != 0:
            program.add_constraint(coeffs, EQ, rhs, f"{label}[{','.join(x)}]")


@dataclass
class CouplingBlock:
    variables: Dict[Tuple[ValueTuple, ValueTuple], str]
    costs: Dict[str, Fraction]


def add_coupling(
    program: LinearProgram,
    schema: Schema,
    attributes: Sequence[str],
    p: MeasureExpr,
    q: MeasureExpr,
    bound: Union[None, Fraction, str],
    prefix: str,
) -> CouplingBlock:
    """
    Coupling variables between p and q with exact marginal rows. When bound is
    a rational or a variable name, the transport cost is constrained to be at
    most that bound.
    """
    block = CouplingBlock({}, {})
    for x in sorted(p):
        for y in sorted(q):
            name = program.add_variable(f"{prefix}[{','.join(x)}|{','.join(y)}]")
            block.variables[(x, y)] = name
            d = product_distance(schema, attributes, x, y)
            if d != 0:
                block.costs[name] = d
    for x in sorted(p):
        coeffs = {block.variables[(x, y)]: Fraction(1) for y in q}
        for name, c in p[x][0].items():
            coeffs[name] = coeffs.get(name, ZERO) - c
        program.add_constraint(coeffs, EQ, p[x][1], f"{prefix}.first[{','.join(x)}]")
    for y in sorted(q):
        coeffs = {block.variables[(x, y)]: Fraction(1) for x in p}
        for name, c in q[y][0].items():
            coeffs[name] = coeffs.get(name, ZERO) - c
        program.add_constraint(coeffs, EQ, q[y][1], f"{prefix}.second[{','.join(y)}]")
    if bound is not None:
        coeffs: Dict[str, Fraction] = dict(block.costs)
        rhs = ZERO
        if isinstance(bound, str):
            coeffs[bound] = coeffs.get(bound, ZERO) - 1
        else:
            rhs = Fraction(bound)
        program.add_constraint(coeffs, LE, rhs, f"{prefix}.cost")
    return block


def constrain_within(
    program: LinearProgram,
    schema: Schema,
    attributes: Sequence[str],
    p: MeasureExpr,
    q: MeasureExpr,
    bound: Union[Fraction, str],
    prefix: str,
) -> Optional[CouplingBlock]:
    """
    W(p, q) <= bound. A zero rational bound becomes atom-wise equality,
    which needs no coupling variables.
    """
    if not isinstance(bound, str) and Fraction(bound) == 0:
        constrain_equal(program, p, q, prefix)
        return None
    return add_coupling(program, schema, attributes, p, q, bound, prefix)


def block_coupling(block: CouplingBlock, attributes: Sequence[str], assignment: Mapping[str, Fraction]) -> Coupling:
    masses = {pair: assignment.get(name, ZERO) for pair, name in block.variables.items()}
    return Coupling.from_mapping(attributes, masses)

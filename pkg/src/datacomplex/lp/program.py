"""
Linear programs over exact rationals and the results the solver returns.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from ..utils.rationals import format_rational

LE = "<="
GE = ">="
EQ = "=="
SENSES = (LE, GE, EQ)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
BUDGET_EXCEEDED = "budget_exceeded"

LinearExpr = Dict[str, Fraction]


@dataclass(frozen=True)
class Constraint:
    coeffs: Tuple[Tuple[str, Fraction], ...]
    sense: str
    rhs: Fraction
    label: str

    def lhs(self, assignment: Mapping[str, Fraction]) -> Fraction:
        return sum((c * assignment.get(name, Fraction(0)) for name, c in self.coeffs), Fraction(0))

    def holds(self, assignment: Mapping[str, Fraction]) -> bool:
        value = self.lhs(assignment)
        if self.sense == LE:
            return value <= self.rhs
        if self.sense == GE:
            return value >= self.rhs
        return value == self.rhs


class LinearProgram:
    """
    Named variables (nonnegative unless declared free), linear constraints
    and an optional objective to minimize. Variables keep insertion order,
    which fixes the column order the solver sees.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self.variables: Dict[str, bool] = {}
        self.constraints: List[Constraint] = []
        self._labels = set()
        self.objective: Optional[LinearExpr] = None
        self.objective_constant = Fraction(0)

    def add_variable(self, name: str, free: bool = False) -> str:
        if name in self.variables:
            raise ValueError(f"variable {name!r} declared twice")
        self.variables[name] = free
        return name

    def add_constraint(self, coeffs: Mapping[str, Fraction], sense: str, rhs, label: Optional[str] = None) -> Constraint:
        if sense not in SENSES:
            raise ValueError(f"unknown constraint sense {sense!r}")
        terms = []
        for name, c in coeffs.items():
            if name not in self.variables:
                raise ValueError(f"constraint references undeclared variable {name!r}")
            c = Fraction(c)
            if c != 0:
                terms.append((name, c))
        label = label or f"c{len(self.constraints)}"
        if label in self._labels:
            raise ValueError(f"constraint label {label!r} used twice")
        self._labels.add(label)
        constraint = Constraint(tuple(terms), sense, Fraction(rhs), label)
        self.constraints.append(constraint)
        return constraint

    def set_objective(self, coeffs: Mapping[str, Fraction], constant=Fraction(0)) -> None:
        for name in coeffs:
            if name not in self.variables:
                raise ValueError(f"objective references undeclared variable {name!r}")
        self.objective = {name: Fraction(c) for name, c in coeffs.items() if c != 0}
        self.objective_constant = Fraction(constant)

    def objective_value(self, assignment: Mapping[str, Fraction]) -> Optional[Fraction]:
        if self.objective is None:
            return None
        return self.objective_constant + sum(
            (c * assignment.get(name, Fraction(0)) for name, c in self.objective.items()), Fraction(0)
        )

    def violations(self, assignment: Mapping[str, Fraction]) -> List[str]:
        bad = [f"{name} < 0" for name, free in self.variables.items()
               if not free and assignment.get(name, Fraction(0)) < 0]
        bad.extend(c.label for c in self.constraints if not c.holds(assignment))
        return bad

    @property
    def sizes(self) -> Dict[str, int]:
        return {"variables": len(self.variables), "constraints": len(self.constraints)}

    def to_text(self) -> str:
        """
        Plain-text dump, one item per line, rationals as p/q:

            lp NAME
            var NAME [free]
            min CONSTANT + COEF NAME + ...
            LABEL: COEF NAME + COEF NAME ... SENSE RHS
        """
        lines = [f"lp {self.name}"]
        for name, free in self.variables.items():
            lines.append(f"var {name} free" if free else f"var {name}")
        if self.objective is not None:
            terms = " + ".join(f"{format_rational(c)} {name}" for name, c in self.objective.items())
            lines.append(f"min {format_rational(self.objective_constant)}" + (f" + {terms}" if terms else ""))
        for c in self.constraints:
            terms = " + ".join(f"{format_rational(v)} {name}" for name, v in c.coeffs) or "0"
            lines.append(f"{c.label}: {terms} {c.sense} {format_rational(c.rhs)}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FarkasCertificate:
    """
    Multipliers lam (one per constraint label) such that the combination
    sum lam_k * (a_k x - b_k) proves infeasibility: lam_k <= 0 on <= rows,
    lam_k >= 0 on >= rows, the combined coefficients are <= 0 on nonnegative
    variables and 0 on free ones, and sum lam_k b_k > 0.
    """
    multipliers: Dict[str, Fraction]

    def verify(self, program: LinearProgram) -> bool:
        combined: Dict[str, Fraction] = {name: Fraction(0) for name in program.variables}
        beta = Fraction(0)
        for c in program.constraints:
            lam = self.multipliers.get(c.label, Fraction(0))
            if c.sense == LE and lam > 0:
                return False
            if c.sense == GE and lam < 0:
                return False
            for name, coeff in c.coeffs:
                combined[name] += lam * coeff
            beta += lam * c.rhs
        for name, free in program.variables.items():
            if free and combined[name] != 0:
                return False
            if not free and combined[name] > 0:
                return False
        return beta > 0

    def to_dict(self) -> dict:
        return {label: format_rational(v) for label, v in self.multipliers.items() if v != 0}


@dataclass
class LPResult:
    status: str
    assignment: Dict[str, Fraction] = field(default_factory=dict)
    optimum: Optional[Fraction] = None
    certificate: Optional[FarkasCertificate] = None
    sizes: Dict[str, int] = field(default_factory=dict)
    pivots: int = 0

    @property
    def ok(self) -> bool:
        return self.status in (FEASIBLE, OPTIMAL)

    def value(self, name: str) -> Fraction:
        return self.assignment.get(name, Fraction(0))

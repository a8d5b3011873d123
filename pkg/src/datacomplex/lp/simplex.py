"""
Two-phase dense-tableau simplex over Fractions with Bland's rule.

Every assignment is checked against the original program before it is
returned, and every infeasibility verdict carries a Farkas certificate
that is checked the same way.
"""
import hashlib
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..config import get_settings
from ..errors import SolverInvariantError
from .program import (
    BUDGET_EXCEEDED,
    FEASIBLE,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    FarkasCertificate,
    LinearProgram,
    LPResult,
)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

# column kinds
_VAR, _SLACK, _ART = 0, 1, 2


class _Tableau:
    """
    Standard form A x = b, x >= 0, b >= 0. Free variables are split into
    a positive and a negative column. Each row starts with a unit basic
    column: its slack when that has coefficient +1, else an artificial.
    """

    def __init__(self, program: LinearProgram):
        self.program = program
        self.columns: List[Tuple[int, str, int]] = []
        var_columns: Dict[str, List[Tuple[int, int]]] = {}
        for name, free in program.variables.items():
            var_columns[name] = [(len(self.columns), 1)]
            self.columns.append((_VAR, name, 1))
            if free:
                var_columns[name].append((len(self.columns), -1))
                self.columns.append((_VAR, name, -1))
        self.var_columns = var_columns

        m = len(program.constraints)
        self.row_sign: List[int] = []
        row_terms: List[Dict[int, Fraction]] = []
        rhs: List[Fraction] = []
        slack_of_row: List[Optional[int]] = []
        for r, c in enumerate(program.constraints):
            terms: Dict[int, Fraction] = {}
            for name, coeff in c.coeffs:
                for col, sign in var_columns[name]:
                    terms[col] = terms.get(col, ZERO) + coeff * sign
            slack = None
            if c.sense in (LE, GE):
                slack = len(self.columns)
                self.columns.append((_SLACK, c.label, r))
                terms[slack] = ONE if c.sense == LE else -ONE
            sign = -1 if c.rhs < 0 else 1
            if sign < 0:
                terms = {j: -v for j, v in terms.items()}
            self.row_sign.append(sign)
            row_terms.append(terms)
            rhs.append(c.rhs * sign)
            slack_of_row.append(slack)

        self.initial_basis: List[int] = []
        for r in range(m):
            slack = slack_of_row[r]
            if slack is not None and row_terms[r][slack] == ONE:
                self.initial_basis.append(slack)
            else:
                art = len(self.columns)
                self.columns.append((_ART, f"a{r}", r))
                row_terms[r][art] = ONE
                self.initial_basis.append(art)

        width = len(self.columns)
        self.rows: List[List[Fraction]] = []
        for r in range(m):
            row = [ZERO] * (width + 1)
            for j, v in row_terms[r].items():
                row[j] = v
            row[width] = rhs[r]
            self.rows.append(row)
        self.basis = list(self.initial_basis)
        self.costs: List[Fraction] = [ZERO] * width
        self.reduced: List[Fraction] = [ZERO] * (width + 1)
        self.pivots = 0

    @property
    def width(self) -> int:
        return len(self.columns)

    def set_costs(self, costs: List[Fraction]) -> None:
        self.costs = costs
        reduced = list(costs) + [ZERO]
        for i, row in enumerate(self.rows):
            cb = costs[self.basis[i]]
            if cb != 0:
                for j, v in enumerate(row):
                    if v != 0:
                        reduced[j] -= cb * v
        # last entry holds minus the objective value
        self.reduced = reduced

    def objective(self) -> Fraction:
        return -self.reduced[-1]

    def pivot(self, r: int, j: int) -> None:
        row = self.rows[r]
        p = row[j]
        if p != ONE:
            self.rows[r] = row = [v / p if v != 0 else ZERO for v in row]
        nonzero = [k for k, v in enumerate(row) if v != 0]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[j]
            if f != 0:
                for k in nonzero:
                    other[k] -= f * row[k]
        f = self.reduced[j]
        if f != 0:
            for k in nonzero:
                self.reduced[k] -= f * row[k]
        self.basis[r] = j
        self.pivots += 1

    def run(self) -> str:
        """Bland's rule: lowest eligible entering column, lowest basic index on ties."""
        rhs = self.width
        while True:
            entering = next((j for j in range(self.width) if self.reduced[j] < 0), None)
            if entering is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    key = (row[rhs] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], entering)

    def drive_out_artificials(self) -> None:
        r = 0
        while r < len(self.rows):
            if self.columns[self.basis[r]][0] == _ART:
                row = self.rows[r]
                j = next((k for k in range(self.width) if self.columns[k][0] != _ART and row[k] != 0), None)
                if j is None:
                    # redundant row
                    del self.rows[r]
                    del self.basis[r]
                    continue
                self.pivot(r, j)
            r += 1

    def drop_artificial_columns(self) -> None:
        keep = [j for j, col in enumerate(self.columns) if col[0] != _ART]
        remap = {j: k for k, j in enumerate(keep)}
        self.rows = [[row[j] for j in keep] + [row[-1]] for row in self.rows]
        self.basis = [remap[b] for b in self.basis]
        self.columns = [self.columns[j] for j in keep]

    def primal_values(self) -> List[Fraction]:
        x = [ZERO] * self.width
        for i, b in enumerate(self.basis):
            x[b] = self.rows[i][-1]
        return x

    def assignment(self) -> Dict[str, Fraction]:
        x = self.primal_values()
        values = {name: ZERO for name in self.program.variables}
        for j, (kind, name, sign) in enumerate(self.columns):
            if kind == _VAR and x[j] != 0:
                values[name] += x[j] * sign
        return values

    def farkas(self) -> FarkasCertificate:
        """
        Phase-one duals y_r = c(initial basic column) - reduced cost, mapped
        back through the row sign flips to the original constraints.
        """
        multipliers = {}
        for r, c in enumerate(self.program.constraints):
            j = self.initial_basis[r]
            y = self.costs[j] - self.reduced[j]
            multipliers[c.label] = y * self.row_sign[r]
        return FarkasCertificate(multipliers)


def _dump(program: LinearProgram) -> None:
    directory = get_settings().lp_dump_dir
    if directory is None:
        return
    text = program.to_text()
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{program.name}-{digest}.lp"
    path.write_text(text, encoding="utf-8")
    logger.debug("wrote %s", path)


def _solve(program: LinearProgram, minimize_objective: bool) -> LPResult:
    sizes = program.sizes
    budget = get_settings().variable_budget
    if sizes["variables"] > budget:
        logger.warning("%s: %d variables exceed the budget of %d", program.name, sizes["variables"], budget)
        return LPResult(BUDGET_EXCEEDED, sizes=dict(sizes, budget=budget))
    _dump(program)

    tableau = _Tableau(program)
    phase_one = [ONE if kind == _ART else ZERO for kind, _, _ in tableau.columns]
    tableau.set_costs(phase_one)
    tableau.run()

    if tableau.objective() > 0:
        certificate = tableau.farkas()
        if not certificate.verify(program):
            raise SolverInvariantError(f"{program.name}: infeasibility certificate failed verification")
        logger.debug("%s infeasible after %d pivots %s", program.name, tableau.pivots, sizes)
        return LPResult(INFEASIBLE, certificate=certificate, sizes=sizes, pivots=tableau.pivots)

    tableau.drive_out_artificials()
    tableau.drop_artificial_columns()

    status = FEASIBLE
    if minimize_objective:
        costs = [ZERO] * tableau.width
        for j, (kind, name, sign) in enumerate(tableau.columns):
            if kind == _VAR:
                costs[j] = program.objective.get(name, ZERO) * sign
        tableau.set_costs(costs)
        status = tableau.run()
        if status == UNBOUNDED:
            logger.debug("%s unbounded after %d pivots", program.name, tableau.pivots)
            return LPResult(UNBOUNDED, sizes=sizes, pivots=tableau.pivots)

    assignment = tableau.assignment()
    violated = program.violations(assignment)
    if violated:
        raise SolverInvariantError(
            f"{program.name}: solver assignment violates {', '.join(violated[:5])}",
            {"violations": violated},
        )
    optimum = program.objective_value(assignment) if minimize_objective else None
    logger.debug("%s %s after %d pivots %s", program.name, status, tableau.pivots, sizes)
    return LPResult(status, assignment=assignment, optimum=optimum, sizes=sizes, pivots=tableau.pivots)


def solve_feasibility(program: LinearProgram) -> LPResult:
    """feasible / infeasible / budget_exceeded; any objective is ignored."""
    return _solve(program, minimize_objective=False)


def minimize(program: LinearProgram) -> LPResult:
    """optimal / infeasible / unbounded / budget_exceeded."""
    if program.objective is None:
        raise ValueError(f"{program.name}: minimize needs an objective")
    return _solve(program, minimize_objective=True)

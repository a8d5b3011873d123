"""
The Wasserstein filtration F^t of a finitely generated data complex and the
obstruction to extending a data section across the cells of the next level.

A cell Y is trivial at slack t when the section's tables on its faces fill
to a table inside F^t whose faces are each within t of those tables.
Membership in F^t is witnessed position by position: a single-attribute
closure table within t of the filler's marginal at that position.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .config import get_settings
from .errors import BudgetExceededError, DisconnectedComplexError, SectionError, SolverInvariantError
from .joins import FillBlock, achieved_slacks, add_fill_block
from .lp import BUDGET_EXCEEDED, GE, OPTIMAL, LinearProgram, minimize, solve_feasibility
from .measures import (
    DataComplexGen,
    DataTable,
    closure_up_to,
    is_path_connected,
    marginalize,
    path_components,
    single_marginal,
    total_mass,
)
from .simpattr import AttributeList, face_list, is_nondegenerate
from .transport import (
    MeasureExpr,
    constrain_equal,
    constrain_within,
    evaluate_expr,
    reduce_expr,
    table_expr,
    variable_table,
    wasserstein,
)
from .utils.rationals import format_rational

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
INF = math.inf

Slack = Union[Fraction, float]

COBOUNDARY_LABEL = "coboundary (restricted search)"


# ----------------------------------------
# Sections
# ----------------------------------------
@dataclass(frozen=True)
class DataSection:
    level: int
    cells: Mapping[AttributeList, DataTable]

    def __post_init__(self):
        for lst, t in self.cells.items():
            if t.attributes != lst:
                raise SectionError(f"section assigns a table on {list(t.attributes)} to {list(lst)}")
            if len(lst) > self.level + 1:
                raise SectionError(f"section of level {self.level} has a cell {list(lst)} above its level")

    @property
    def domain(self) -> List[AttributeList]:
        return sorted(lst for lst in self.cells if len(lst) == self.level + 1)

    def check_natural(self) -> None:
        for lst, t in sorted(self.cells.items()):
            for i in range(len(lst)):
                face = face_list(lst, i)
                if face in self.cells and marginalize(t, i) != self.cells[face]:
                    raise SectionError(
                        f"section is not natural: d_{i} of the table on {list(lst)} differs from the table on {list(face)}",
                        {"cell": list(lst), "face": i},
                    )

    def table(self, lst: Sequence[str]) -> DataTable:
        try:
            return self.cells[tuple(lst)]
        except KeyError:
            raise SectionError(f"section has no table on {list(lst)}", {"cell": list(lst)}) from None

    def to_dict(self) -> dict:
        return {"level": self.level, "cells": [t.to_dict() for _, t in sorted(self.cells.items())]}


def section_from_complex(c: DataComplexGen, level: int, include_degenerate: bool = False) -> DataSection:
    """
    The closure tables on lists of length level+1, one per list. Lists with
    a repeated attribute are skipped unless include_degenerate is set.
    """
    cells: Dict[AttributeList, DataTable] = {}
    for t in closure_up_to(c, level + 1):
        if len(t.attributes) != level + 1:
            continue
        if not include_degenerate and not is_nondegenerate(t.attributes):
            continue
        if t.attributes in cells:
            raise SectionError(f"the complex carries more than one table on {list(t.attributes)}",
                               {"cell": list(t.attributes)})
        cells[t.attributes] = t
    if not cells:
        raise SectionError(f"the complex has no tables of level {level}")
    return DataSection(level, cells)


def default_cells(section: DataSection, level: int, include_degenerate: bool = False) -> List[AttributeList]:
    """Level-n lists all of whose faces carry a section table."""
    domain = set(section.domain)
    if level != section.level + 1:
        raise SectionError(f"cells of level {level} need a section of level {level - 1}")
    attributes = sorted({a for lst in domain for a in lst})
    found = set()
    for lst in domain:
        for a in attributes:
            for pos in range(len(lst) + 1):
                cell = lst[:pos] + (a,) + lst[pos:]
                if not include_degenerate and not is_nondegenerate(cell):
                    continue
                if all(face_list(cell, i) in domain for i in range(len(cell))):
                    found.add(cell)
    return sorted(found)


# ----------------------------------------
# Filtration membership
# ----------------------------------------
@lru_cache(maxsize=32)
def vertex_candidates(c: DataComplexGen) -> Dict[str, Tuple[DataTable, ...]]:
    """Single-attribute closure tables by attribute."""
    out: Dict[str, List[DataTable]] = {}
    for t in closure_up_to(c, 1):
        if len(t.attributes) == 1:
            out.setdefault(t.attributes[0], []).append(t)
    return {a: tuple(ts) for a, ts in out.items()}


@dataclass
class FiltrationResult:
    member: bool
    witnesses: Dict[int, DataTable] = field(default_factory=dict)
    distances: Dict[int, Fraction] = field(default_factory=dict)
    missing: List[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.member


def in_filtration(t: DataTable, c: DataComplexGen, slack) -> FiltrationResult:
    """
    t is in F^slack when every position has a closure witness within slack.
    Single-attribute witnesses are enough: any longer witness reduces to one.
    """
    slack = Fraction(slack)
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    candidates = vertex_candidates(c)
    mass = total_mass(t)
    result = FiltrationResult(True)
    for position, a in enumerate(t.attributes):
        marginal = single_marginal(t, position)
        best: Optional[Tuple[Fraction, DataTable]] = None
        for cand in candidates.get(a, ()):
            if total_mass(cand) != mass:
                logger.debug("witness on [%s] skipped: mass %s vs %s", a, total_mass(cand), mass)
                continue
            d = wasserstein(c.schema, marginal, cand)
            if best is None or d < best[0]:
                best = (d, cand)
        if best is not None and best[0] <= slack:
            result.witnesses[position] = best[1]
            result.distances[position] = best[0]
        else:
            result.member = False
            result.missing.append(position)
    return result


# ----------------------------------------
# Witness bookkeeping
# ----------------------------------------
def _position_in_face(a: int, i: int) -> int:
    return a if a < i else a - 1


def _implied_positions(
    cell: AttributeList, fixed_faces: Mapping[int, DataTable], candidates: Mapping[str, Sequence[DataTable]]
) -> Dict[int, bool]:
    """
    A position is implied when some fixed face through it has a marginal there
    that is itself a closure table: the face's slack bound then covers it.
    """
    implied = {}
    for a in range(len(cell)):
        implied[a] = False
        for i, face in fixed_faces.items():
            if i == a or face is None:
                continue
            if single_marginal(face, _position_in_face(a, i)) in candidates.get(cell[a], ()):
                implied[a] = True
                break
    return implied


def _candidates_for(a: str, mass: Fraction, candidates: Mapping[str, Sequence[DataTable]]) -> List[DataTable]:
    return [t for t in candidates.get(a, ()) if total_mass(t) == mass]


def _combinations(slots: Sequence[Sequence[DataTable]]) -> Iterable[Tuple[DataTable, ...]]:
    count = 1
    for s in slots:
        count *= len(s)
    limit = get_settings().max_witness_combinations
    if count > limit:
        raise BudgetExceededError(f"{count} witness combinations exceed the limit of {limit}",
                                  {"combinations": count, "limit": limit})
    if count > 1:
        logger.debug("enumerating %d witness combinations", count)
    return itertools.product(*slots)


def _require_connected(c: DataComplexGen) -> None:
    if not is_path_connected(c):
        raise DisconnectedComplexError(path_components(c))


def _cell_faces(section: DataSection, cell: AttributeList) -> Dict[int, DataTable]:
    return {i: section.table(face_list(cell, i)) for i in range(len(cell))}


# ----------------------------------------
# Cocycle evaluation
# ----------------------------------------
@dataclass
class CellVerdict:
    cell: AttributeList
    trivial: bool
    filler: Optional[DataTable] = None
    achieved_slacks: Dict[int, Fraction] = field(default_factory=dict)
    witnesses: Dict[int, DataTable] = field(default_factory=dict)
    combinations_tried: int = 0

    def to_dict(self) -> dict:
        out = {
            "cell": list(self.cell),
            "value": "trivial" if self.trivial else "nontrivial",
            "combinations_tried": self.combinations_tried,
        }
        if self.filler is not None:
            out["filler"] = self.filler.to_dict()
            out["achieved_slacks"] = {str(i): format_rational(v) for i, v in self.achieved_slacks.items()}
            out["witnesses"] = {str(i): w.to_dict() for i, w in self.witnesses.items()}
        return out


@dataclass
class CocycleReport:
    level: int
    slack: Fraction
    values: Dict[AttributeList, CellVerdict]
    basepoint: str = ""

    @property
    def trivial(self) -> bool:
        return all(v.trivial for v in self.values.values())

    @property
    def nontrivial_cells(self) -> List[AttributeList]:
        return [cell for cell, v in sorted(self.values.items()) if not v.trivial]

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "slack": format_rational(self.slack),
            "basepoint": self.basepoint,
            "trivial": self.trivial,
            "cells": [v.to_dict() for _, v in sorted(self.values.items())],
        }


def _fill_cell(c: DataComplexGen, cell: AttributeList, faces: Dict[int, DataTable], slack: Fraction) -> CellVerdict:
    candidates = vertex_candidates(c)
    mass = total_mass(faces[0])
    if any(total_mass(f) != mass for f in faces.values()):
        return CellVerdict(cell, False)
    implied = _implied_positions(cell, faces, candidates)
    open_positions = [a for a in range(len(cell)) if not implied[a]]
    slots = [_candidates_for(cell[a], mass, candidates) for a in open_positions]

    tried = 0
    for combo in _combinations(slots):
        tried += 1
        witnesses = dict(zip(open_positions, combo))
        program = LinearProgram(f"cocycle[{','.join(cell)}]")
        block = add_fill_block(program, c.schema, cell, faces, slack, "cell", witnesses, slack)
        result = solve_feasibility(program)
        if result.status == BUDGET_EXCEEDED:
            raise BudgetExceededError(f"cocycle LP on {list(cell)} exceeds the variable budget", result.sizes)
        if result.ok:
            filler = block.table(result.assignment)
            return CellVerdict(cell, True, filler, achieved_slacks(c.schema, filler, faces),
                               _filler_witnesses(c, filler, slack), tried)
    return CellVerdict(cell, False, combinations_tried=tried)


def _filler_witnesses(c: DataComplexGen, filler: DataTable, slack: Fraction) -> Dict[int, DataTable]:
    membership = in_filtration(filler, c, slack)
    if not membership.member:
        raise SolverInvariantError(f"filler on {list(filler.attributes)} is not in the filtration at slack {slack}")
    return membership.witnesses


def evaluate_cocycle(section: DataSection, c: DataComplexGen, cells: Sequence[Sequence[str]], slack) -> CocycleReport:
    """
    Per cell: trivial iff the faces' section tables fill, within slack, to a
    table in F^slack.
    """
    slack = Fraction(slack)
    _require_connected(c)
    section.check_natural()
    values: Dict[AttributeList, CellVerdict] = {}
    for cell in cells:
        cell = tuple(cell)
        if len(cell) != section.level + 2:
            raise SectionError(f"cell {list(cell)} is not of level {section.level + 1}")
        faces = _cell_faces(section, cell)
        values[cell] = _fill_cell(c, cell, faces, slack)
        logger.debug("cell %s at slack %s: %s", list(cell), slack,
                     "trivial" if values[cell].trivial else "nontrivial")
    return CocycleReport(section.level + 1, slack, values, c.names[0])


def coboundary_value(report: CocycleReport, cell: Sequence[str]) -> int:
    """Z/2 value of the coboundary on a cell one level up: the sum of the cocycle over its faces."""
    cell = tuple(cell)
    if len(cell) != report.level + 2:
        raise SectionError(f"cell {list(cell)} is not of level {report.level + 1}")
    total = 0
    for i in range(len(cell)):
        face = face_list(cell, i)
        if face not in report.values:
            raise SectionError(f"cocycle report has no value on {list(face)}", {"cell": list(face)})
        total ^= 0 if report.values[face].trivial else 1
    return total


# ----------------------------------------
# Coboundary repair
# ----------------------------------------
@dataclass
class CoboundaryResult:
    holds: bool
    section: Optional[DataSection] = None
    fillers: Dict[AttributeList, DataTable] = field(default_factory=dict)
    slack: Optional[Slack] = None
    label: str = COBOUNDARY_LABEL
    combinations_tried: int = 0

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        out = {"holds": self.holds, "label": self.label, "combinations_tried": self.combinations_tried}
        if self.slack is not None:
            out["slack"] = format_rational(self.slack)
        if self.section is not None:
            out["section"] = self.section.to_dict()
            out["fillers"] = [t.to_dict() for _, t in sorted(self.fillers.items())]
        return out


@dataclass
class _RepairPlan:
    lists: List[AttributeList]
    gap: Slack
    slots: List[Tuple[str, object]]
    slot_candidates: List[List[DataTable]]


def _repair_plan(section: DataSection, c: DataComplexGen, cells: Sequence[AttributeList]) -> _RepairPlan:
    """
    Lists to repair are the faces of the queried cells. For lists of length at
    least two the repaired single-attribute marginals are fixed by the
    (n-2)-faces, so their filtration condition is the constant gap below.
    """
    candidates = vertex_candidates(c)
    lists = sorted({face_list(cell, i) for cell in cells for i in range(len(cell))})
    gap: Slack = ZERO
    slots: List[Tuple[str, object]] = []
    slot_candidates: List[List[DataTable]] = []
    for lst in lists:
        t = section.table(lst)
        mass = total_mass(t)
        if len(lst) == 1:
            slots.append(("list", lst))
            slot_candidates.append(_candidates_for(lst[0], mass, candidates))
            continue
        for position, a in enumerate(lst):
            marginal = single_marginal(t, position)
            options = [wasserstein(c.schema, marginal, cand) for cand in _candidates_for(a, mass, candidates)]
            gap = max(gap, min(options) if options else INF)

    for cell in cells:
        fixed = {i: section.table(face_list(cell, i)) if len(cell) > 2 else None for i in range(len(cell))}
        implied = _implied_positions(cell, fixed, candidates)
        mass = total_mass(section.table(face_list(cell, 0)))
        for a in range(len(cell)):
            if not implied[a]:
                slots.append(("cell", (cell, a)))
                slot_candidates.append(_candidates_for(cell[a], mass, candidates))
    return _RepairPlan(lists, gap, slots, slot_candidates)


@dataclass
class _RepairProgram:
    program: LinearProgram
    repaired: Dict[AttributeList, MeasureExpr]
    blocks: Dict[AttributeList, FillBlock]


def _build_repair(
    section: DataSection,
    c: DataComplexGen,
    cells: Sequence[AttributeList],
    plan: _RepairPlan,
    combo: Sequence[DataTable],
    bound: Union[Fraction, str],
    name: str,
    program: Optional[LinearProgram] = None,
) -> _RepairProgram:
    program = program or LinearProgram(name)
    chosen_lists: Dict[AttributeList, DataTable] = {}
    chosen_cells: Dict[AttributeList, Dict[int, DataTable]] = {}
    for (kind, key), cand in zip(plan.slots, combo):
        if kind == "list":
            chosen_lists[key] = cand
        else:
            cell, a = key
            chosen_cells.setdefault(cell, {})[a] = cand

    repaired: Dict[AttributeList, MeasureExpr] = {}
    for k, lst in enumerate(plan.lists):
        expr, _ = variable_table(program, c.schema, lst, f"s{k}")
        original = section.table(lst)
        for j in range(len(lst)):
            constrain_equal(program, reduce_expr(expr, [p for p in range(len(lst)) if p != j]),
                            table_expr(marginalize(original, j)), f"s{k}.d{j}")
        if lst in chosen_lists:
            constrain_within(program, c.schema, lst, expr, table_expr(chosen_lists[lst]), bound, f"s{k}.w")
        repaired[lst] = expr

    blocks: Dict[AttributeList, FillBlock] = {}
    for k, cell in enumerate(cells):
        faces = {i: repaired[face_list(cell, i)] for i in range(len(cell))}
        blocks[cell] = add_fill_block(program, c.schema, cell, faces, bound, f"y{k}",
                                      chosen_cells.get(cell, {}), bound)
    return _RepairProgram(program, repaired, blocks)


def _repaired_section(section: DataSection, built: _RepairProgram, assignment) -> DataSection:
    cells = dict(section.cells)
    for lst, expr in built.repaired.items():
        cells[lst] = evaluate_expr(expr, assignment, lst)
    return DataSection(section.level, cells)


def is_coboundary(section: DataSection, c: DataComplexGen, cells: Sequence[Sequence[str]], slack) -> CoboundaryResult:
    """
    True when some repaired section, agreeing with the original on all
    (n-2)-faces and lying in F^slack, makes every queried cell trivial.
    """
    slack = Fraction(slack)
    cells = [tuple(cell) for cell in cells]
    report = evaluate_cocycle(section, c, cells, slack)
    if report.trivial:
        return CoboundaryResult(True, section, {cell: v.filler for cell, v in report.values.items()}, slack)

    plan = _repair_plan(section, c, cells)
    if plan.gap > slack:
        logger.debug("repair impossible: fixed marginals are %s from the closure", plan.gap)
        return CoboundaryResult(False, slack=slack)

    tried = 0
    for combo in _combinations(plan.slot_candidates):
        tried += 1
        built = _build_repair(section, c, cells, plan, combo, slack, "coboundary")
        result = solve_feasibility(built.program)
        if result.status == BUDGET_EXCEEDED:
            raise BudgetExceededError("coboundary LP exceeds the variable budget", result.sizes)
        if result.ok:
            repaired = _repaired_section(section, built, result.assignment)
            fillers = {cell: b.table(result.assignment) for cell, b in built.blocks.items()}
            check = evaluate_cocycle(repaired, c, cells, slack)
            if not check.trivial:
                logger.warning("repaired section failed re-evaluation on %s", check.nontrivial_cells)
                continue
            return CoboundaryResult(True, repaired, fillers, slack, combinations_tried=tried)
    logger.warning("no repair found after %d witness combinations; only the section's own lists were searched", tried)
    return CoboundaryResult(False, slack=slack, combinations_tried=tried)


# ----------------------------------------
# Trichotomy
# ----------------------------------------
@dataclass
class TrichotomyVerdict:
    case: int
    slack: Fraction
    offending_cells: List[AttributeList]
    cocycle: CocycleReport
    repair: Optional[CoboundaryResult] = None

    def to_dict(self) -> dict:
        out = {
            "case": self.case,
            "slack": format_rational(self.slack),
            "offending_cells": [list(cell) for cell in self.offending_cells],
            "cocycle": self.cocycle.to_dict(),
        }
        if self.repair is not None:
            out["repair"] = self.repair.to_dict()
        return out


def classify_trichotomy(section: DataSection, c: DataComplexGen, cells: Sequence[Sequence[str]], slack) -> TrichotomyVerdict:
    """
    1: the cocycle vanishes. 2: it does not, but a repaired section of the
    previous level makes it vanish. 3: neither; only more slack helps.
    """
    slack = Fraction(slack)
    report = evaluate_cocycle(section, c, cells, slack)
    if report.trivial:
        return TrichotomyVerdict(1, slack, [], report)
    repair = is_coboundary(section, c, cells, slack)
    case = 2 if repair.holds else 3
    return TrichotomyVerdict(case, slack, report.nontrivial_cells, report, repair)


# ----------------------------------------
# Persistence
# ----------------------------------------
@dataclass
class CellMinimum:
    cell: AttributeList
    slack: Slack
    filler: Optional[DataTable] = None
    witnesses: Dict[int, DataTable] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"cell": list(self.cell), "t": format_rational(self.slack)}
        if self.filler is not None:
            out["filler"] = self.filler.to_dict()
            out["witnesses"] = {str(i): w.to_dict() for i, w in self.witnesses.items()}
        return out


def _cell_minimum(c: DataComplexGen, cell: AttributeList, faces: Dict[int, DataTable]) -> CellMinimum:
    candidates = vertex_candidates(c)
    mass = total_mass(faces[0])
    if any(total_mass(f) != mass for f in faces.values()):
        return CellMinimum(cell, INF)
    implied = _implied_positions(cell, faces, candidates)
    open_positions = [a for a in range(len(cell)) if not implied[a]]
    slots = [_candidates_for(cell[a], mass, candidates) for a in open_positions]

    best = CellMinimum(cell, INF)
    for combo in _combinations(slots):
        witnesses = dict(zip(open_positions, combo))
        program = LinearProgram(f"persistence[{','.join(cell)}]")
        t = program.add_variable("t")
        block = add_fill_block(program, c.schema, cell, faces, t, "cell", witnesses, t)
        program.set_objective({t: Fraction(1)})
        result = minimize(program)
        if result.status == BUDGET_EXCEEDED:
            raise BudgetExceededError(f"persistence LP on {list(cell)} exceeds the variable budget", result.sizes)
        if result.status == OPTIMAL and result.optimum < best.slack:
            best = CellMinimum(cell, result.optimum, block.table(result.assignment), witnesses)
    return best


@dataclass
class PersistenceResult:
    t_n: Slack
    t_prime_n: Slack
    cells: List[CellMinimum] = field(default_factory=list)
    repair: Optional[CoboundaryResult] = None

    def to_dict(self) -> dict:
        out = {
            "t_n": format_rational(self.t_n),
            "t_prime_n": format_rational(self.t_prime_n),
            "cells": [m.to_dict() for m in self.cells],
        }
        if self.repair is not None:
            out["repair"] = self.repair.to_dict()
        return out


def persistence_t(section: DataSection, c: DataComplexGen, cells: Sequence[Sequence[str]]) -> Tuple[Slack, List[CellMinimum]]:
    """
    Smallest slack at which every queried cell is trivial: the largest of
    the per-cell minima. math.inf when some cell never fills.
    """
    _require_connected(c)
    section.check_natural()
    minima = []
    for cell in cells:
        cell = tuple(cell)
        minima.append(_cell_minimum(c, cell, _cell_faces(section, cell)))
    value: Slack = max((m.slack for m in minima), default=ZERO)
    return value, minima


def persistence_tprime(
    section: DataSection, c: DataComplexGen, cells: Sequence[Sequence[str]], t_n: Optional[Slack] = None
) -> Tuple[Slack, Optional[CoboundaryResult]]:
    """
    Smallest slack at which the cocycle is a coboundary. Never above t_n,
    since a vanishing cocycle is trivially a coboundary.
    """
    cells = [tuple(cell) for cell in cells]
    if t_n is None:
        t_n, _ = persistence_t(section, c, cells)
    if t_n == 0 or not cells:
        return ZERO, None

    plan = _repair_plan(section, c, cells)
    best: Slack = t_n
    best_repair: Optional[CoboundaryResult] = None
    if plan.gap == INF:
        return best, None
    for combo in _combinations(plan.slot_candidates):
        program = LinearProgram("coboundary_min")
        t = program.add_variable("t")
        program.add_constraint({t: Fraction(1)}, GE, plan.gap, "t.gap")
        built = _build_repair(section, c, cells, plan, combo, t, "coboundary_min", program)
        program.set_objective({t: Fraction(1)})
        result = minimize(program)
        if result.status == BUDGET_EXCEEDED:
            raise BudgetExceededError("coboundary LP exceeds the variable budget", result.sizes)
        if result.status == OPTIMAL and result.optimum < best:
            best = result.optimum
            repaired = _repaired_section(section, built, result.assignment)
            fillers = {cell: b.table(result.assignment) for cell, b in built.blocks.items()}
            best_repair = CoboundaryResult(True, repaired, fillers, best)
    return best, best_repair


def persistence(section: DataSection, c: DataComplexGen, cells: Sequence[Sequence[str]]) -> PersistenceResult:
    t_n, minima = persistence_t(section, c, cells)
    t_prime, repair = persistence_tprime(section, c, cells, t_n)
    return PersistenceResult(t_n, t_prime, minima, repair)

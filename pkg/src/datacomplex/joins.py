"""
Joins of data tables and filling of horns and boundaries.

conditional_glue is the canonical element of the join space. fill_* build
one LinearProgram over the atoms of the full table, with one transport block
per prescribed face, and return the filler with its achieved face slacks.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .config import get_settings
from .errors import (
    BudgetExceededError,
    IncompatibleHornError,
    InconsistentOverlapError,
    InvalidInclusionError,
    ListMismatchError,
    SolverInvariantError,
)
from .lp import BUDGET_EXCEEDED, INFEASIBLE, OPTIMAL, LinearProgram, LPResult, minimize, solve_feasibility
from .measures import (
    DataTable,
    SignedTable,
    independent_product,
    marginalize,
    permute,
    point_mass,
    reduce,
    subtract,
    total_mass,
)
from .schema import Schema, ValueTuple
from .simpattr import (
    AttributeInclusion,
    AttributeList,
    MergeResult,
    face_list,
    invert_permutation,
    merge_lists,
    permute_list,
)
from .transport import (
    CouplingBlock,
    MeasureExpr,
    block_coupling,
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

FILLED = "filled"
FALLBACK = "fallback"


# ----------------------------------------
# Joins
# ----------------------------------------
@dataclass(frozen=True)
class JoinProblem:
    t01: DataTable
    t02: DataTable
    i01: AttributeInclusion
    i02: AttributeInclusion

    def __post_init__(self):
        if self.i01.target != self.t01.attributes or self.i02.target != self.t02.attributes:
            raise InvalidInclusionError("overlap inclusions must target the two tables' lists")
        if self.i01.source != self.i02.source:
            raise InvalidInclusionError(
                f"overlap sources differ: {list(self.i01.source)} vs {list(self.i02.source)}"
            )
        if not (self.i01.is_valid() and self.i02.is_valid()):
            raise InvalidInclusionError("overlap inclusions are not valid")

    @classmethod
    def over(cls, t01: DataTable, t02: DataTable, map01: Sequence[int], map02: Sequence[int]) -> "JoinProblem":
        return cls(t01, t02, AttributeInclusion.from_map(t01.attributes, map01),
                   AttributeInclusion.from_map(t02.attributes, map02))

    @property
    def overlap(self) -> AttributeList:
        return self.i01.source

    def merge(self) -> MergeResult:
        return merge_lists(self.t01.attributes, self.t02.attributes, self.i01, self.i02)


def overlap_consistent(p: JoinProblem) -> bool:
    return reduce(p.t01, p.i01) == reduce(p.t02, p.i02)


def joins_feasible(p: JoinProblem) -> bool:
    """The join space is nonempty exactly when the overlap reductions agree."""
    return overlap_consistent(p)


def conditional_glue(p: JoinProblem) -> DataTable:
    """
    mass(u0, u1, u2) = t01(u0, u1) * t02(u0, u2) / t0(u0), laid out on the
    merged list.
    """
    tau0 = reduce(p.t01, p.i01)
    if tau0 != reduce(p.t02, p.i02):
        raise InconsistentOverlapError(
            f"overlap {list(p.overlap)} reductions differ",
            {"left": tau0.to_dict(), "right": reduce(p.t02, p.i02).to_dict()},
        )
    merge = p.merge()
    by_overlap: Dict[ValueTuple, List[Tuple[ValueTuple, Fraction]]] = {}
    for x2, m2 in p.t02.atoms:
        by_overlap.setdefault(tuple(x2[j] for j in p.i02.index_map), []).append((x2, m2))

    masses: Dict[ValueTuple, Fraction] = {}
    for x1, m1 in p.t01.atoms:
        u0 = tuple(x1[j] for j in p.i01.index_map)
        for x2, m2 in by_overlap.get(u0, []):
            z = [""] * len(merge.merged)
            for k, pos in enumerate(merge.mu01.index_map):
                z[pos] = x1[k]
            for k, pos in enumerate(merge.mu02.index_map):
                z[pos] = x2[k]
            masses[tuple(z)] = m1 * m2 / tau0.mass(u0)
    glued = DataTable.from_mapping(merge.merged, masses)

    if reduce(glued, merge.mu01) != p.t01 or reduce(glued, merge.mu02) != p.t02:
        raise SolverInvariantError("conditional glue does not reproduce its inputs")
    return glued


def trivial_join(t1: DataTable, t2: DataTable) -> DataTable:
    """Glue over the empty overlap: the independent product on T1 ⊕ T2."""
    return conditional_glue(JoinProblem(t1, t2, AttributeInclusion.empty(t1.attributes),
                                        AttributeInclusion.empty(t2.attributes)))


# ----------------------------------------
# Horns
# ----------------------------------------
@dataclass(frozen=True)
class HornProblem:
    full_list: AttributeList
    faces: Mapping[int, DataTable]
    slack: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, "full_list", tuple(self.full_list))
        object.__setattr__(self, "slack", Fraction(self.slack))
        n = len(self.full_list)
        if n < 2:
            raise ListMismatchError(f"horns need a list of length at least 2, got {list(self.full_list)}")
        if self.slack < 0:
            raise ValueError("slack must be nonnegative")
        for i, t in self.faces.items():
            if not 0 <= i < n:
                raise ListMismatchError(f"face index {i} out of range for {list(self.full_list)}")
            if t.attributes != face_list(self.full_list, i):
                raise ListMismatchError(
                    f"face {i} is on {list(t.attributes)}, expected {list(face_list(self.full_list, i))}"
                )
        if len(self.faces) < n - 1:
            raise ListMismatchError(f"a horn on {n} entries needs at least {n - 1} faces")

    @property
    def missing(self) -> Optional[int]:
        absent = [i for i in range(len(self.full_list)) if i not in self.faces]
        return absent[0] if absent else None

    def with_slack(self, slack) -> "HornProblem":
        return HornProblem(self.full_list, self.faces, Fraction(slack))


def check_compatibility(h: HornProblem, exact: bool = True) -> None:
    """
    Faces must have one total mass; with exact, d_i f_j = d_{j-1} f_i for
    every provided pair i < j.
    """
    masses = {total_mass(t) for t in h.faces.values()}
    if len(masses) > 1:
        raise IncompatibleHornError(f"faces carry different total masses: {sorted(masses)}")
    if not exact:
        return
    indices = sorted(h.faces)
    for a, i in enumerate(indices):
        for j in indices[a + 1:]:
            if marginalize(h.faces[j], i) != marginalize(h.faces[i], j - 1):
                raise IncompatibleHornError(
                    f"incompatible horn: faces {i} and {j} disagree on their shared face",
                    {"faces": [i, j]},
                )


@dataclass
class FillResult:
    status: str
    table: Optional[DataTable] = None
    achieved_slacks: Dict[int, Fraction] = field(default_factory=dict)
    slack: Optional[Union[Fraction, float]] = None
    method: str = "lp"
    sizes: Dict[str, int] = field(default_factory=dict)
    couplings: Dict[int, object] = field(default_factory=dict)
    certificate: Optional[object] = None

    @property
    def filled(self) -> bool:
        return self.status in (FILLED, FALLBACK) and self.table is not None

    def to_dict(self) -> dict:
        out = {"status": self.status, "method": self.method, "sizes": dict(self.sizes)}
        if self.slack is not None:
            out["slack"] = format_rational(self.slack)
        if self.table is not None:
            out["table"] = self.table.to_dict()
            out["achieved_slacks"] = {str(i): format_rational(v) for i, v in self.achieved_slacks.items()}
            out["couplings"] = {str(i): cp.to_dict() for i, cp in sorted(self.couplings.items())}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


# ----------------------------------------
# LP filling
# ----------------------------------------
Bound = Union[Fraction, str]


@dataclass
class FillBlock:
    """The part of a LinearProgram that describes one filler."""
    full_list: AttributeList
    joint: MeasureExpr
    face_blocks: Dict[int, Optional[CouplingBlock]]
    witness_blocks: Dict[int, Optional[CouplingBlock]]

    def table(self, assignment: Mapping[str, Fraction]) -> DataTable:
        return evaluate_expr(self.joint, assignment, self.full_list)


def face_map(full_list: Sequence[str], i: int) -> List[int]:
    return [j for j in range(len(full_list)) if j != i]


def add_fill_block(
    program: LinearProgram,
    schema: Schema,
    full_list: Sequence[str],
    faces: Mapping[int, Union[DataTable, MeasureExpr]],
    bound: Bound,
    prefix: str,
    witnesses: Optional[Mapping[int, DataTable]] = None,
    witness_bound: Optional[Bound] = None,
) -> FillBlock:
    """
    Adds joint-table variables on Val(full_list) and, for each prescribed face,
    W(d_i joint, face) <= bound. Each witness pins the marginal at one
    position to within witness_bound of a single-attribute table.
    """
    full_list = tuple(full_list)
    budget = get_settings().variable_budget
    size = schema.product_size(full_list)
    if size > budget:
        raise BudgetExceededError(f"filler on {list(full_list)} needs {size} atoms",
                                  {"atoms": size, "budget": budget})
    joint, _ = variable_table(program, schema, full_list, f"{prefix}.x")
    face_blocks: Dict[int, Optional[CouplingBlock]] = {}
    for i in sorted(faces):
        face = faces[i]
        target = table_expr(face) if isinstance(face, DataTable) else face
        face_blocks[i] = constrain_within(
            program, schema, face_list(full_list, i), reduce_expr(joint, face_map(full_list, i)),
            target, bound, f"{prefix}.f{i}",
        )
    witness_blocks: Dict[int, Optional[CouplingBlock]] = {}
    for position, candidate in sorted((witnesses or {}).items()):
        witness_blocks[position] = constrain_within(
            program, schema, (full_list[position],), reduce_expr(joint, [position]),
            table_expr(candidate), witness_bound if witness_bound is not None else bound,
            f"{prefix}.w{position}",
        )
    return FillBlock(full_list, joint, face_blocks, witness_blocks)


def achieved_slacks(schema: Schema, table: DataTable, faces: Mapping[int, DataTable]) -> Dict[int, Fraction]:
    """Exact W(d_i table, face_i), recomputed independently of the fill LP."""
    return {
        i: wasserstein(schema, marginalize(table, i), face)
        for i, face in sorted(faces.items())
    }


def _result_from_lp(
    schema: Schema, h: HornProblem, block: FillBlock, result: LPResult, slack, method: str = "lp"
) -> FillResult:
    if result.status == BUDGET_EXCEEDED:
        return FillResult(BUDGET_EXCEEDED, sizes=result.sizes, method=method)
    if result.status == INFEASIBLE:
        return FillResult(INFEASIBLE, slack=slack, sizes=result.sizes, method=method, certificate=result.certificate)
    table = block.table(result.assignment)
    achieved = achieved_slacks(schema, table, h.faces)
    if any(v > slack for v in achieved.values()):
        raise SolverInvariantError(f"filler exceeds slack {slack}: {achieved}")
    couplings = {
        i: block_coupling(b, face_list(h.full_list, i), result.assignment)
        for i, b in block.face_blocks.items() if b is not None
    }
    return FillResult(FILLED, table=table, achieved_slacks=achieved, slack=slack,
                      method=method, sizes=result.sizes, couplings=couplings)


def _fill(schema: Schema, h: HornProblem, name: str) -> FillResult:
    program = LinearProgram(name)
    try:
        block = add_fill_block(program, schema, h.full_list, h.faces, h.slack, "fill")
    except BudgetExceededError as e:
        return FillResult(BUDGET_EXCEEDED, sizes=e.sizes)
    return _result_from_lp(schema, h, block, solve_feasibility(program), h.slack)


def fill_boundary(schema: Schema, h: HornProblem, slack=None) -> FillResult:
    """Fills a full boundary: W(d_i X, face_i) <= slack for every face."""
    if slack is not None:
        h = h.with_slack(slack)
    if h.missing is not None:
        raise ListMismatchError(f"boundary is missing face {h.missing}")
    check_compatibility(h, exact=h.slack == 0)
    return _fill(schema, h, "fill_boundary")


def minimize_boundary_slack(schema: Schema, h: HornProblem) -> FillResult:
    """Smallest t at which the boundary fills, with its filler."""
    if h.missing is not None:
        raise ListMismatchError(f"boundary is missing face {h.missing}")
    check_compatibility(h, exact=False)
    program = LinearProgram("minimize_boundary_slack")
    t = program.add_variable("t")
    try:
        block = add_fill_block(program, schema, h.full_list, h.faces, t, "fill")
    except BudgetExceededError as e:
        return FillResult(BUDGET_EXCEEDED, sizes=e.sizes)
    program.set_objective({t: Fraction(1)})
    result = minimize(program)
    if result.status != OPTIMAL:
        return _result_from_lp(schema, h, block, result, float("inf"))
    return _result_from_lp(schema, h, block, result, result.optimum)


def fill_horn_lp(schema: Schema, h: HornProblem) -> FillResult:
    if h.missing is None or len(h.faces) != len(h.full_list) - 1:
        raise ListMismatchError("a horn has exactly one missing face")
    check_compatibility(h, exact=h.slack == 0)
    return _fill(schema, h, "fill_horn")


# ----------------------------------------
# Constructive filling
# ----------------------------------------
def _face_permutation(perm: Sequence[int], removed: int) -> Tuple[int, List[int]]:
    """
    For a scatter perm of the full list and an old face index, returns the new
    face index and the scatter taking the old face list to the new one.
    """
    new_removed = perm[removed]
    kept_new = [perm[j] for j in range(len(perm)) if j != removed]
    order = sorted(kept_new)
    return new_removed, [order.index(p) for p in kept_new]


def _move_to_front(n: int, k: int) -> List[int]:
    """Scatter sending position k to 0 and keeping the others in order."""
    return [0 if j == k else (j + 1 if j < k else j) for j in range(n)]


def fill_horn_constructive(schema: Schema, h: HornProblem) -> FillResult:
    """
    Builds a filler directly: glue the two last faces, then correct the
    faces d_{n-2}, ..., d_1 in turn. Falls back to the LP filler when a
    correction step has no admissible weights.
    """
    if h.missing is None or len(h.faces) != len(h.full_list) - 1:
        raise ListMismatchError("a horn has exactly one missing face")
    if h.slack != 0:
        raise ValueError("the constructive filler works at slack 0 only")
    check_compatibility(h)

    k = h.missing
    size = len(h.full_list)
    perm = _move_to_front(size, k)
    faces: Dict[int, DataTable] = {}
    for i, t in h.faces.items():
        new_i, face_perm = _face_permutation(perm, i)
        faces[new_i] = permute(t, face_perm)
    front_list = permute_list(h.full_list, perm)

    table = _construct(schema, front_list, faces)
    if table is None:
        logger.warning("constructive filler on %s fell back to the LP filler", list(h.full_list))
        result = fill_horn_lp(schema, h)
        if result.filled:
            result.status = FALLBACK
        result.method = "lp-fallback"
        return result

    table = permute(table, invert_permutation(perm))
    for i, t in h.faces.items():
        if marginalize(table, i) != t:
            raise SolverInvariantError(f"constructive filler misses face {i}")
    return FillResult(FILLED, table=table, achieved_slacks={i: ZERO for i in sorted(h.faces)},
                      slack=ZERO, method="constructive")


def _construct(schema: Schema, full_list: AttributeList, faces: Mapping[int, DataTable]) -> Optional[DataTable]:
    n = len(full_list) - 1
    if total_mass(faces[n]) == 0:
        return DataTable.from_mapping(full_list, {})
    if n == 1:
        space = schema.space_of(full_list[1])
        face = faces[1]
        return independent_product(face, point_mass((full_list[1],), (space.points[0],), total_mass(face)))

    # base: glue faces n and n-1 over positions 0..n-2
    overlap = list(range(n - 1))
    current = conditional_glue(JoinProblem.over(faces[n], faces[n - 1], overlap, overlap))
    masses = dict(current.mapping)

    for m in range(n - 1, 1, -1):
        position = m - 1
        tau_m = DataTable.from_mapping(full_list, masses)
        error: SignedTable = subtract(
            SignedTable.from_mapping(face_list(full_list, position), marginalize(tau_m, position).mapping),
            SignedTable.from_mapping(face_list(full_list, position), faces[position].mapping),
        )
        if not error.atoms:
            continue
        positive = [(z, e) for z, e in error.atoms if e > 0]
        weights: Dict[str, Fraction] = {}
        for u in schema.space_of(full_list[position]).points:
            weights[u] = min(masses.get(z[:position] + (u,) + z[position:], ZERO) / e for z, e in positive)
        total = sum(weights.values(), ZERO)
        logger.debug("correction at face %d: weight total %s", position, total)
        if total < 1:
            return None
        for u, w in weights.items():
            rho = w / total
            if rho == 0:
                continue
            for z, e in error.atoms:
                x = z[:position] + (u,) + z[position:]
                masses[x] = masses.get(x, ZERO) - rho * e

    return DataTable.from_mapping(full_list, masses)

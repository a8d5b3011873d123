"""
Data tables as sparse finite measures over attribute lists.

A table stores its atoms as a sorted tuple of (value tuple, mass) pairs with
zero atoms dropped, so two tables are equal exactly when they are the same
measure on the same list.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .errors import IndexOutOfRangeError, InvalidInclusionError, MassMismatchError
from .schema import Schema, ValueTuple
from .simpattr import (
    AttributeInclusion,
    AttributeList,
    Chain2,
    check_permutation,
    degeneracy_list,
    enumerate_inclusions,
    face_list,
    permute_list,
)

logger = logging.getLogger(__name__)

Atom = Tuple[ValueTuple, Fraction]


@dataclass(frozen=True)
class SignedTable:
    attributes: AttributeList
    atoms: Tuple[Atom, ...]

    def __post_init__(self):
        n = len(self.attributes)
        for x, mass in self.atoms:
            if len(x) != n:
                raise ValueError(f"tuple {x!r} does not fit list {list(self.attributes)}")
            if mass == 0:
                raise ValueError("zero atoms are not stored")

    @classmethod
    def from_mapping(cls, attributes: Sequence[str], masses: Mapping[Sequence[str], Fraction]):
        atoms: Dict[ValueTuple, Fraction] = {}
        for x, mass in masses.items():
            x = tuple(x)
            atoms[x] = atoms.get(x, Fraction(0)) + Fraction(mass)
        return cls(tuple(attributes), tuple(sorted((x, m) for x, m in atoms.items() if m != 0)))

    @cached_property
    def mapping(self) -> Dict[ValueTuple, Fraction]:
        return dict(self.atoms)

    def mass(self, x: Sequence[str]) -> Fraction:
        return self.mapping.get(tuple(x), Fraction(0))

    @property
    def support(self) -> List[ValueTuple]:
        return [x for x, _ in self.atoms]

    def to_dict(self) -> dict:
        return {
            "list": list(self.attributes),
            "atoms": [{"tuple": list(x), "mass": str(m)} for x, m in self.atoms],
        }


@dataclass(frozen=True)
class DataTable(SignedTable):
    def __post_init__(self):
        super().__post_init__()
        for x, mass in self.atoms:
            if mass < 0:
                raise ValueError(f"negative mass {mass} at {x!r}")


def trivial_table(mass: Fraction) -> DataTable:
    """The table on the empty list carrying total mass M."""
    return DataTable.from_mapping((), {(): Fraction(mass)})


def point_mass(attributes: Sequence[str], x: Sequence[str], mass: Fraction = Fraction(1)) -> DataTable:
    return DataTable.from_mapping(attributes, {tuple(x): mass})


# ----------------------------------------
# Simplicial operations
# ----------------------------------------
def _pushforward(t: SignedTable, attributes: Sequence[str], fn: Callable[[ValueTuple], ValueTuple]):
    masses: Dict[ValueTuple, Fraction] = {}
    for x, m in t.atoms:
        y = fn(x)
        masses[y] = masses.get(y, Fraction(0)) + m
    return type(t).from_mapping(attributes, masses)


def _check_index(t: SignedTable, i: int) -> None:
    if not 0 <= i < len(t.attributes):
        raise IndexOutOfRangeError(f"index {i} out of range for list of length {len(t.attributes)}")


def total_mass(t: SignedTable) -> Fraction:
    return sum((m for _, m in t.atoms), Fraction(0))


def marginalize(t: SignedTable, i: int):
    _check_index(t, i)
    return _pushforward(t, face_list(t.attributes, i), lambda x: x[:i] + x[i + 1:])


def diagonal(t: SignedTable, i: int):
    _check_index(t, i)
    return _pushforward(t, degeneracy_list(t.attributes, i), lambda x: x[: i + 1] + x[i:])


def reduce(t: SignedTable, inclusion: AttributeInclusion):
    """
    Reduction along S ↪ T: marginalizes every position of T outside the image.
    """
    if inclusion.target != t.attributes:
        raise InvalidInclusionError(
            f"inclusion targets {list(inclusion.target)}, table is on {list(t.attributes)}"
        )
    if not inclusion.is_valid():
        raise InvalidInclusionError(f"invalid inclusion map {list(inclusion.index_map)}")
    index_map = inclusion.index_map
    return _pushforward(t, inclusion.source, lambda x: tuple(x[j] for j in index_map))


def permute(t: SignedTable, perm: Sequence[int]):
    """Reindexes list and tuples; entry i moves to position perm[i]."""
    perm = check_permutation(perm, len(t.attributes))

    def scatter(x: ValueTuple) -> ValueTuple:
        y = [""] * len(x)
        for i, p in enumerate(perm):
            y[p] = x[i]
        return tuple(y)

    return _pushforward(t, permute_list(t.attributes, perm), scatter)


def independent_product(t1: DataTable, t2: DataTable) -> DataTable:
    """(T1 ⊕ T2, τ1 τ2 / M) for tables of equal positive mass M."""
    m1, m2 = total_mass(t1), total_mass(t2)
    if m1 != m2:
        raise MassMismatchError(f"independent product needs equal masses, got {m1} and {m2}")
    if m1 == 0:
        raise MassMismatchError("independent product of zero-mass tables is undefined")
    masses = {x + y: a * b / m1 for x, a in t1.atoms for y, b in t2.atoms}
    return DataTable.from_mapping(t1.attributes + t2.attributes, masses)


def scale(t: SignedTable, factor: Fraction):
    return type(t).from_mapping(t.attributes, {x: m * factor for x, m in t.atoms})


def subtract(t1: SignedTable, t2: SignedTable) -> SignedTable:
    if t1.attributes != t2.attributes:
        raise ValueError(f"lists differ: {list(t1.attributes)} vs {list(t2.attributes)}")
    masses = dict(t1.mapping)
    for x, m in t2.atoms:
        masses[x] = masses.get(x, Fraction(0)) - m
    return SignedTable.from_mapping(t1.attributes, masses)


def single_marginal(t: SignedTable, position: int):
    """Reduction of t onto the one-entry list at the given position."""
    _check_index(t, position)
    return reduce(t, AttributeInclusion.from_map(t.attributes, [position]))


# ----------------------------------------
# Finitely generated complexes
# ----------------------------------------
@dataclass(frozen=True)
class DataComplexGen:
    schema: Schema
    generators: Tuple[DataTable, ...]
    closed_under_permutation: bool = False
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.names:
            object.__setattr__(self, "names", tuple(f"g{i}" for i in range(len(self.generators))))
        if len(self.names) != len(self.generators):
            raise ValueError("one name per generator is required")

    @property
    def basepoint(self) -> DataTable:
        return self.generators[0]


def _table_key(t: SignedTable):
    return (len(t.attributes), t.attributes, t.atoms)


def closure_up_to(c: DataComplexGen, max_len: int) -> List[DataTable]:
    """
    Every table reachable from the generators by faces, degeneracies and
    (when flagged) permutations whose list has length at most max_len.
    Sorted by (length, list, atoms).
    """
    if max_len < 0:
        raise IndexOutOfRangeError(f"max_len must be nonnegative, got {max_len}")
    seen = set(c.generators)
    queue = deque(c.generators)
    kept = set()
    while queue:
        t = queue.popleft()
        n = len(t.attributes)
        derived = [marginalize(t, i) for i in range(n)]
        if n <= max_len:
            kept.add(t)
            if n + 1 <= max_len:
                derived.extend(diagonal(t, i) for i in range(n))
            if c.closed_under_permutation:
                for i in range(n - 1):
                    swap = list(range(n))
                    swap[i], swap[i + 1] = i + 1, i
                    derived.append(permute(t, swap))
        for d in derived:
            if d not in seen:
                seen.add(d)
                queue.append(d)
    result = sorted(kept, key=_table_key)
    logger.debug("closure up to length %d: %d tables", max_len, len(result))
    return result


@dataclass(frozen=True)
class AlignmentWitness:
    attributes: AttributeList
    left: DataTable
    right: DataTable
    left_source: Optional[Tuple[str, AttributeInclusion]] = None
    right_source: Optional[Tuple[str, AttributeInclusion]] = None


@dataclass(frozen=True)
class AlignmentResult:
    aligned: bool
    witness: Optional[AlignmentWitness] = None

    def __bool__(self) -> bool:
        return self.aligned


def _find_source(c: DataComplexGen, t: DataTable) -> Optional[Tuple[str, AttributeInclusion]]:
    for name, g in zip(c.names, c.generators):
        for inclusion in enumerate_inclusions(t.attributes, g.attributes):
            if reduce(g, inclusion) == t:
                return name, inclusion
    return None


def is_well_aligned(c: DataComplexGen, max_len: int) -> AlignmentResult:
    """
    The closure is closed under reductions, so every pair of common reductions
    agrees exactly when no list carries two distinct closure tables.
    """
    by_list: Dict[AttributeList, DataTable] = {}
    for t in closure_up_to(c, max_len):
        other = by_list.get(t.attributes)
        if other is None:
            by_list[t.attributes] = t
            continue
        witness = AlignmentWitness(t.attributes, other, t, _find_source(c, other), _find_source(c, t))
        logger.debug("not well aligned on %s", list(t.attributes))
        return AlignmentResult(False, witness)
    return AlignmentResult(True)


def overlap_graph(c: DataComplexGen) -> nx.Graph:
    """Generators joined when they share an attribute with equal marginals there."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(c.generators)))
    marginals = []
    for g in c.generators:
        by_attribute: Dict[str, DataTable] = {}
        for position, a in enumerate(g.attributes):
            by_attribute.setdefault(a, single_marginal(g, position))
        marginals.append(by_attribute)
    for i in range(len(c.generators)):
        for j in range(i + 1, len(c.generators)):
            shared = set(marginals[i]) & set(marginals[j])
            if any(marginals[i][a] == marginals[j][a] for a in shared):
                graph.add_edge(i, j)
    return graph


def path_components(c: DataComplexGen) -> List[List[str]]:
    graph = overlap_graph(c)
    components = [sorted(comp) for comp in nx.connected_components(graph)]
    components.sort()
    return [[c.names[i] for i in comp] for comp in components]


def is_path_connected(c: DataComplexGen) -> bool:
    if not c.generators:
        return False
    return nx.is_connected(overlap_graph(c))


# ----------------------------------------
# Z/2 table chains
# ----------------------------------------
@dataclass(frozen=True)
class TableChain2:
    level: int
    cells: FrozenSet[DataTable]

    def __post_init__(self):
        for t in self.cells:
            if len(t.attributes) != self.level + 1:
                raise ValueError(f"table on {list(t.attributes)} does not have level {self.level}")

    @classmethod
    def of(cls, tables: Iterable[DataTable], level: int) -> "TableChain2":
        cells = set()
        for t in tables:
            cells ^= {t}
        return cls(level, frozenset(cells))


def boundary_table_chain(chain: TableChain2) -> TableChain2:
    if chain.level < 0:
        raise IndexOutOfRangeError("the boundary of a level -1 chain is undefined")
    cells = set()
    for t in chain.cells:
        for i in range(len(t.attributes)):
            cells ^= {marginalize(t, i)}
    return TableChain2(chain.level - 1, frozenset(cells))


def project_chain(chain: TableChain2) -> Chain2:
    """Forgets the measures: each table contributes its list, counted mod 2."""
    return Chain2.of((t.attributes for t in chain.cells), level=chain.level)

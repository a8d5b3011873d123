"""
Attribute-list combinatorics.

Lists are plain tuples of attribute names. Face maps omit an entry,
degeneracy maps repeat one, and inclusions are order-preserving,
compatible index maps between lists. Chains are taken with Z/2
coefficients, so a chain is a set of lists of one length.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import (
    FaceClosureError,
    IndexOutOfRangeError,
    InvalidInclusionError,
    InvalidPermutationError,
)

logger = logging.getLogger(__name__)

AttributeList = Tuple[str, ...]
Permutation = Tuple[int, ...]


# ----------------------------------------
# Inclusions
# ----------------------------------------
@dataclass(frozen=True)
class AttributeInclusion:
    source: AttributeList
    target: AttributeList
    index_map: Tuple[int, ...]

    def is_valid(self) -> bool:
        if len(self.index_map) != len(self.source):
            return False
        previous = -1
        for i, j in enumerate(self.index_map):
            if j <= previous or j >= len(self.target):
                return False
            if self.source[i] != self.target[j]:
                return False
            previous = j
        return True

    def compose(self, inner: "AttributeInclusion") -> "AttributeInclusion":
        """self ∘ inner, for inner: A ↪ B and self: B ↪ C."""
        if inner.target != self.source:
            raise InvalidInclusionError(f"cannot compose: {inner.target!r} is not {self.source!r}")
        return AttributeInclusion(inner.source, self.target, tuple(self.index_map[j] for j in inner.index_map))

    @classmethod
    def identity(cls, attributes: Sequence[str]) -> "AttributeInclusion":
        attributes = tuple(attributes)
        return cls(attributes, attributes, tuple(range(len(attributes))))

    @classmethod
    def empty(cls, target: Sequence[str]) -> "AttributeInclusion":
        return cls((), tuple(target), ())

    @classmethod
    def from_map(cls, target: Sequence[str], index_map: Sequence[int]) -> "AttributeInclusion":
        """Inclusion into target whose source is read off the selected positions."""
        target = tuple(target)
        index_map = tuple(index_map)
        for j in index_map:
            if not 0 <= j < len(target):
                raise InvalidInclusionError(f"index {j} out of range for a list of length {len(target)}")
        inclusion = cls(tuple(target[j] for j in index_map), target, index_map)
        if not inclusion.is_valid():
            raise InvalidInclusionError(f"index map {list(index_map)} is not strictly increasing")
        return inclusion

    def to_dict(self) -> dict:
        return {"source": list(self.source), "target": list(self.target), "map": list(self.index_map)}


def validate_inclusion(inclusion: AttributeInclusion) -> bool:
    return inclusion.is_valid()


def _require_valid(inclusion: AttributeInclusion) -> None:
    if not inclusion.is_valid():
        raise InvalidInclusionError(
            f"invalid inclusion {list(inclusion.source)} -> {list(inclusion.target)} via {list(inclusion.index_map)}"
        )


# ----------------------------------------
# Faces and degeneracies
# ----------------------------------------
def _check_index(attributes: Sequence[str], i: int) -> None:
    if not 0 <= i < len(attributes):
        raise IndexOutOfRangeError(f"index {i} out of range for list of length {len(attributes)}")


def face_list(attributes: Sequence[str], i: int) -> AttributeList:
    _check_index(attributes, i)
    return tuple(attributes[:i]) + tuple(attributes[i + 1:])


def degeneracy_list(attributes: Sequence[str], i: int) -> AttributeList:
    _check_index(attributes, i)
    return tuple(attributes[: i + 1]) + tuple(attributes[i:])


def face_inclusion(attributes: Sequence[str], i: int) -> AttributeInclusion:
    """The co-face inclusion d_i T ↪ T."""
    _check_index(attributes, i)
    return AttributeInclusion.from_map(attributes, [j for j in range(len(attributes)) if j != i])


def is_nondegenerate(attributes: Sequence[str]) -> bool:
    return len(set(attributes)) == len(attributes)


def is_degenerate_cell(attributes: Sequence[str]) -> bool:
    """True when the list lies in the image of some degeneracy (an adjacent repeat)."""
    return any(attributes[i] == attributes[i + 1] for i in range(len(attributes) - 1))


# ----------------------------------------
# Quotients, sums and merges
# ----------------------------------------
def quotient(inclusion: AttributeInclusion) -> Tuple[AttributeList, AttributeInclusion]:
    """
    Returns T/ι and ι^c: the entries of the target outside the image of ι,
    in order, together with their inclusion into the target.
    """
    _require_valid(inclusion)
    image = set(inclusion.index_map)
    complement = [j for j in range(len(inclusion.target)) if j not in image]
    included = AttributeInclusion.from_map(inclusion.target, complement)
    return included.source, included


def concat_sum(
    first: Sequence[str], second: Sequence[str]
) -> Tuple[AttributeList, AttributeInclusion, AttributeInclusion]:
    total = tuple(first) + tuple(second)
    left = AttributeInclusion.from_map(total, range(len(first)))
    right = AttributeInclusion.from_map(total, range(len(first), len(total)))
    return total, left, right


@dataclass(frozen=True)
class MergeResult:
    merged: AttributeList
    mu01: AttributeInclusion
    mu02: AttributeInclusion
    iota0: AttributeInclusion
    iota1: AttributeInclusion
    iota2: AttributeInclusion

    def to_dict(self) -> dict:
        return {
            "merged": list(self.merged),
            "mu01": list(self.mu01.index_map),
            "mu02": list(self.mu02.index_map),
            "iota0": list(self.iota0.index_map),
            "iota1": list(self.iota1.index_map),
            "iota2": list(self.iota2.index_map),
        }


def merge_lists(
    t01: Sequence[str], t02: Sequence[str], i01: AttributeInclusion, i02: AttributeInclusion
) -> MergeResult:
    """
    Splices T01 and T02 along the shared list T0. Between consecutive anchors
    the T01 entries come first, then the T02 entries, then the anchor itself.
    """
    t01, t02 = tuple(t01), tuple(t02)
    _require_valid(i01)
    _require_valid(i02)
    if i01.source != i02.source:
        raise InvalidInclusionError(f"overlap sources differ: {list(i01.source)} vs {list(i02.source)}")
    if i01.target != t01 or i02.target != t02:
        raise InvalidInclusionError("overlap inclusions do not target the given lists")

    merged: List[str] = []
    mu01: List[int] = []
    mu02: List[int] = []
    iota0: List[int] = []
    iota1: List[int] = []
    iota2: List[int] = []

    def take(entries, start, stop, mu, iota):
        for j in range(start, stop):
            mu.append(len(merged))
            iota.append(len(merged))
            merged.append(entries[j])

    next01 = next02 = 0
    for a01, a02 in zip(i01.index_map, i02.index_map):
        take(t01, next01, a01, mu01, iota1)
        take(t02, next02, a02, mu02, iota2)
        mu01.append(len(merged))
        mu02.append(len(merged))
        iota0.append(len(merged))
        merged.append(t01[a01])
        next01, next02 = a01 + 1, a02 + 1
    take(t01, next01, len(t01), mu01, iota1)
    take(t02, next02, len(t02), mu02, iota2)

    merged_list = tuple(merged)
    return MergeResult(
        merged=merged_list,
        mu01=AttributeInclusion.from_map(merged_list, mu01),
        mu02=AttributeInclusion.from_map(merged_list, mu02),
        iota0=AttributeInclusion.from_map(merged_list, iota0),
        iota1=AttributeInclusion.from_map(merged_list, iota1),
        iota2=AttributeInclusion.from_map(merged_list, iota2),
    )


def inclusion_to_faces(inclusion: AttributeInclusion) -> List[int]:
    """
    Face indices j_0 < ... < j_k with d_{j_0} ... d_{j_k} T = S.
    Apply them last-first (highest index first).
    """
    _, complement = quotient(inclusion)
    return list(complement.index_map)


def apply_faces(attributes: Sequence[str], faces: Sequence[int]) -> AttributeList:
    result = tuple(attributes)
    for j in reversed(faces):
        result = face_list(result, j)
    return result


def enumerate_inclusions(source: Sequence[str], target: Sequence[str]) -> Iterator[AttributeInclusion]:
    """All inclusions source ↪ target, in lexicographic order of index maps."""
    source, target = tuple(source), tuple(target)

    def extend(i: int, start: int, chosen: List[int]):
        if i == len(source):
            yield AttributeInclusion(source, target, tuple(chosen))
            return
        # leave room for the remaining source entries
        for j in range(start, len(target) - (len(source) - i) + 1):
            if target[j] == source[i]:
                chosen.append(j)
                yield from extend(i + 1, j + 1, chosen)
                chosen.pop()

    yield from extend(0, 0, [])


# ----------------------------------------
# Permutations (scatter convention: perm[i] is the new position of entry i)
# ----------------------------------------
def check_permutation(perm: Sequence[int], size: int) -> Permutation:
    perm = tuple(perm)
    if len(perm) != size or sorted(perm) != list(range(size)):
        raise InvalidPermutationError(f"{list(perm)} is not a permutation of {size} positions")
    return perm


def permute_list(attributes: Sequence[str], perm: Sequence[int]) -> AttributeList:
    perm = check_permutation(perm, len(attributes))
    result = [""] * len(attributes)
    for i, p in enumerate(perm):
        result[p] = attributes[i]
    return tuple(result)


def compose_permutations(outer: Sequence[int], inner: Sequence[int]) -> Permutation:
    """outer ∘ inner: scatter by inner first, then by outer."""
    inner = check_permutation(inner, len(inner))
    outer = check_permutation(outer, len(inner))
    return tuple(outer[p] for p in inner)


def invert_permutation(perm: Sequence[int]) -> Permutation:
    perm = check_permutation(perm, len(perm))
    inverse = [0] * len(perm)
    for i, p in enumerate(perm):
        inverse[p] = i
    return tuple(inverse)


# ----------------------------------------
# Z/2 chains and homology
# ----------------------------------------
@dataclass(frozen=True)
class Chain2:
    level: int
    cells: FrozenSet[AttributeList]

    def __post_init__(self):
        for cell in self.cells:
            if len(cell) != self.level + 1:
                raise ValueError(f"cell {list(cell)} does not have level {self.level}")

    @classmethod
    def of(cls, cells: Iterable[Sequence[str]], level: Optional[int] = None) -> "Chain2":
        """Builds a chain, cancelling repeated cells mod 2."""
        result: Set[AttributeList] = set()
        for cell in cells:
            result ^= {tuple(cell)}
        if level is None:
            if not result:
                raise ValueError("level is required for an empty chain")
            level = len(next(iter(result))) - 1
        return cls(level, frozenset(result))


def boundary_chain(chain: Chain2) -> Chain2:
    if chain.level < 0:
        raise IndexOutOfRangeError("the boundary of a level -1 chain is undefined")
    result: Set[AttributeList] = set()
    for cell in chain.cells:
        for i in range(len(cell)):
            result ^= {face_list(cell, i)}
    return Chain2(chain.level - 1, frozenset(result))


def face_closure(lists: Iterable[Sequence[str]]) -> FrozenSet[AttributeList]:
    """Smallest set containing the input that is closed under faces, down to level 0."""
    closed: Set[AttributeList] = set()
    pending = [tuple(cell) for cell in lists]
    while pending:
        cell = pending.pop()
        if len(cell) == 0 or cell in closed:
            continue
        closed.add(cell)
        if len(cell) > 1:
            pending.extend(face_list(cell, i) for i in range(len(cell)))
    return frozenset(closed)


def gf2_rank(matrix: np.ndarray) -> int:
    m = (np.asarray(matrix) % 2).astype(np.uint8)
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivots = np.nonzero(m[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot = rank + pivots[0]
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        below = np.nonzero(m[:, col])[0]
        for r in below:
            if r != rank:
                m[r] ^= m[rank]
        rank += 1
    return rank


def _boundary_matrix(rows: List[AttributeList], cols: List[AttributeList]) -> np.ndarray:
    index = {cell: r for r, cell in enumerate(rows)}
    matrix = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    for c, cell in enumerate(cols):
        for i in range(len(cell)):
            face = face_list(cell, i)
            # degenerate faces vanish in the normalized complex
            if face in index:
                matrix[index[face], c] ^= 1
    return matrix


def homology_rank(complex_: Iterable[Sequence[str]], k: int) -> int:
    """
    Z/2 Betti number at level k of a face-closed set of lists,
    computed on nondegenerate cells.
    """
    if k < 0:
        raise IndexOutOfRangeError(f"homology level must be nonnegative, got {k}")
    cells = {tuple(c) for c in complex_ if len(c) > 0}
    for cell in cells:
        if len(cell) > 1:
            for i in range(len(cell)):
                if face_list(cell, i) not in cells:
                    raise FaceClosureError(
                        f"complex not closed under faces: d_{i}{list(cell)} is missing",
                        {"cell": list(cell), "face": i},
                    )

    def level(n: int) -> List[AttributeList]:
        return sorted(c for c in cells if len(c) == n + 1 and not is_degenerate_cell(c))

    ck, ck1 = level(k), level(k + 1)
    rank_k = gf2_rank(_boundary_matrix(level(k - 1), ck)) if k > 0 and ck else 0
    rank_k1 = gf2_rank(_boundary_matrix(ck, ck1)) if ck and ck1 else 0
    betti = len(ck) - rank_k - rank_k1
    logger.debug("homology level %d: %d cells, rank d_k=%d, rank d_k+1=%d", k, len(ck), rank_k, rank_k1)
    return betti

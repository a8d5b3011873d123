"""
Attribute universe: finite value spaces with explicit metrics, attributes,
and the L-infinity product metric over attribute lists.
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple

from .errors import ConfigError

logger = logging.getLogger(__name__)

Label = str
ValueTuple = Tuple[Label, ...]

# separators used in CSV rows and LP variable names
RESERVED_LABEL_CHARS = ',|"'


@dataclass(frozen=True)
class ValueSpace:
    id: str
    points: Tuple[Label, ...]
    metric: Tuple[Tuple[Fraction, ...], ...]
    _index: Dict[Label, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __contains__(self, label: Label) -> bool:
        return label in self._index

    def index(self, label: Label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ConfigError(f"label {label!r} not in value space {self.id!r}", field=f"spaces.{self.id}") from None

    def distance(self, x: Label, y: Label) -> Fraction:
        return self.metric[self.index(x)][self.index(y)]


@dataclass(frozen=True)
class Attribute:
    name: str
    space: str


@dataclass(frozen=True)
class Schema:
    attributes: Tuple[Attribute, ...]
    spaces: Tuple[ValueSpace, ...]
    _spaces: Dict[str, ValueSpace] = field(init=False, repr=False, compare=False, hash=False)
    _attributes: Dict[str, Attribute] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_spaces", {s.id: s for s in self.spaces})
        object.__setattr__(self, "_attributes", {a.name: a for a in self.attributes})

    @property
    def attribute_names(self) -> Tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def has_attribute(self, name: str) -> bool:
        return name in self._attributes

    def space_of(self, name: str) -> ValueSpace:
        attribute = self._attributes.get(name)
        if attribute is None:
            raise ConfigError(f"undeclared attribute {name!r}", field="attributes")
        space = self._spaces.get(attribute.space)
        if space is None:
            raise ConfigError(f"attribute {name!r} refers to unknown space {attribute.space!r}",
                              field=f"attributes.{name}.space")
        return space

    def values(self, attributes: Sequence[str]) -> Iterator[ValueTuple]:
        """All tuples of Val(T) in declared point order (lexicographic by position)."""
        return itertools.product(*(self.space_of(a).points for a in attributes))

    def product_size(self, attributes: Sequence[str]) -> int:
        size = 1
        for a in attributes:
            size *= len(self.space_of(a).points)
        return size

    def check_tuple(self, attributes: Sequence[str], x: Sequence[Label]) -> None:
        if len(x) != len(attributes):
            raise ConfigError(f"tuple {tuple(x)!r} has {len(x)} entries, list has {len(attributes)}")
        for a, label in zip(attributes, x):
            if label not in self.space_of(a):
                raise ConfigError(f"label {label!r} not in value space of attribute {a!r}",
                                  field=f"attributes.{a}")


# ----------------------------------------
# Validation
# ----------------------------------------
@dataclass(frozen=True)
class SchemaViolation:
    field: str
    message: str


def validate_schema(schema: Schema) -> List[SchemaViolation]:
    """
    Checks every ValueSpace/Attribute invariant and returns the violations
    (empty list when the schema is valid). Triangle-inequality failures are
    logged as warnings only.
    """
    violations: List[SchemaViolation] = []

    seen_spaces = set()
    for space in schema.spaces:
        where = f"spaces.{space.id}"
        if space.id in seen_spaces:
            violations.append(SchemaViolation(where, "duplicate space id"))
        seen_spaces.add(space.id)
        violations.extend(_space_violations(space, where))

    if not schema.attributes:
        violations.append(SchemaViolation("attributes", "attribute set is empty"))
    seen_names = set()
    for attribute in schema.attributes:
        where = f"attributes.{attribute.name}"
        if attribute.name in seen_names:
            violations.append(SchemaViolation(where, "duplicate attribute name"))
        seen_names.add(attribute.name)
        if attribute.space not in seen_spaces:
            violations.append(SchemaViolation(f"{where}.space", f"unknown space {attribute.space!r}"))

    if not violations:
        for space in schema.spaces:
            for x, y, z in triangle_failures(space):
                logger.warning("space %s: triangle inequality fails for (%s, %s, %s)", space.id, x, y, z)
    return violations


def _space_violations(space: ValueSpace, where: str) -> List[SchemaViolation]:
    out: List[SchemaViolation] = []
    n = len(space.points)
    if n == 0:
        out.append(SchemaViolation(f"{where}.points", "value space has no points"))
    if len(set(space.points)) != n:
        out.append(SchemaViolation(f"{where}.points", "points are not pairwise distinct"))
    for p in space.points:
        if not p or any(ch in p for ch in RESERVED_LABEL_CHARS):
            out.append(SchemaViolation(f"{where}.points", f"label {p!r} is empty or contains one of {RESERVED_LABEL_CHARS!r}"))
    if len(space.metric) != n or any(len(row) != n for row in space.metric):
        out.append(SchemaViolation(f"{where}.metric", f"metric is not a {n}x{n} matrix"))
        return out

    symmetric = True
    for i in range(n):
        if space.metric[i][i] != 0:
            out.append(SchemaViolation(f"{where}.metric", f"nonzero diagonal entry at {i}"))
        for j in range(n):
            d = space.metric[i][j]
            if d < 0:
                out.append(SchemaViolation(f"{where}.metric", f"negative distance at [{i}][{j}]"))
            if i < j:
                if d != space.metric[j][i]:
                    symmetric = False
                if d == 0 or space.metric[j][i] == 0:
                    out.append(SchemaViolation(f"{where}.metric",
                                               f"zero distance between distinct points {space.points[i]!r}, {space.points[j]!r}"))
    if not symmetric:
        out.append(SchemaViolation(f"{where}.metric", "metric not symmetric"))
    return out


def triangle_failures(space: ValueSpace) -> List[Tuple[Label, Label, Label]]:
    failures = []
    n = len(space.points)
    m = space.metric
    for i, j, k in itertools.product(range(n), repeat=3):
        if m[i][k] > m[i][j] + m[j][k]:
            failures.append((space.points[i], space.points[j], space.points[k]))
    return failures


# ----------------------------------------
# Product metric
# ----------------------------------------
def product_distance(schema: Schema, attributes: Sequence[str], x: Sequence[Label], y: Sequence[Label]) -> Fraction:
    """
    L-infinity product metric: max over positions of the attribute metric.
    Zero for the empty list.
    """
    if len(x) != len(attributes) or len(y) != len(attributes):
        raise ConfigError(f"tuples {tuple(x)!r}, {tuple(y)!r} do not match list {tuple(attributes)!r}")
    best = Fraction(0)
    for a, xi, yi in zip(attributes, x, y):
        d = schema.space_of(a).distance(xi, yi)
        if d > best:
            best = d
    return best

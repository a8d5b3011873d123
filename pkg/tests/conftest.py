import random
from fractions import Fraction
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

import pytest

from datacomplex.measures import DataComplexGen, DataTable
from datacomplex.obstruction import DataSection
from datacomplex.schema import Attribute, Schema, ValueSpace

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


# ----------------------------------------
# Builders
# ----------------------------------------
def discrete_space(space_id: str, points: Sequence[str]) -> ValueSpace:
    n = len(points)
    return ValueSpace(space_id, tuple(points), tuple(tuple(Fraction(int(i != j)) for j in range(n)) for i in range(n)))


def line_space(space_id: str, size: int) -> ValueSpace:
    """Points "0".."size-1" with |i - j| as distance."""
    points = tuple(str(i) for i in range(size))
    return ValueSpace(space_id, points, tuple(tuple(Fraction(abs(i - j)) for j in range(size)) for i in range(size)))


def make_schema(names: Sequence[str], space: ValueSpace) -> Schema:
    return Schema(tuple(Attribute(a, space.id) for a in names), (space,))


def table(attributes: Sequence[str], masses: Mapping) -> DataTable:
    """table(("X", "Y"), {"01": "1/2", "10": "1/2"}); string keys spell one-character labels."""
    return DataTable.from_mapping(
        tuple(attributes), {tuple(k): Fraction(v) for k, v in masses.items()}
    )


def anti_pair(a: str, b: str) -> DataTable:
    return table((a, b), {"01": "1/2", "10": "1/2"})


def damped_pair(a: str, b: str, weight: Fraction) -> DataTable:
    """(1 - weight) * anti-correlated + weight * uniform."""
    anti = (1 - weight) / 2 + weight / 4
    same = weight / 4
    return table((a, b), {"00": same, "01": anti, "10": anti, "11": same})


def random_table(rng: random.Random, schema: Schema, attributes: Sequence[str],
                 max_atoms: int = 8, mass: Optional[Fraction] = None) -> DataTable:
    tuples = list(schema.values(attributes))
    chosen = rng.sample(tuples, rng.randint(1, min(max_atoms, len(tuples))))
    weights = {x: Fraction(rng.randint(1, 6)) for x in chosen}
    if mass is not None:
        total = sum(weights.values())
        weights = {x: w * mass / total for x, w in weights.items()}
    return DataTable.from_mapping(attributes, weights)


def triangle_complex(pairs: Mapping[str, DataTable]) -> DataComplexGen:
    schema = make_schema(("X", "Y", "Z"), discrete_space("bit", ("0", "1")))
    names = sorted(pairs)
    return DataComplexGen(schema, tuple(pairs[n] for n in names), names=tuple(names))


def pair_section(c: DataComplexGen) -> DataSection:
    cells: Dict = {t.attributes: t for t in c.generators}
    return DataSection(1, cells)


# ----------------------------------------
# Fixtures
# ----------------------------------------
@pytest.fixture
def binary_schema() -> Schema:
    return make_schema(("X", "Y", "Z", "W"), discrete_space("bit", ("0", "1")))


@pytest.fixture
def line_schema() -> Schema:
    return make_schema(("A", "B", "C", "D"), line_space("line", 4))


@pytest.fixture
def anti_triangle() -> DataComplexGen:
    return triangle_complex({"xy": anti_pair("X", "Y"), "xz": anti_pair("X", "Z"), "yz": anti_pair("Y", "Z")})


@pytest.fixture
def triangle_dir() -> Path:
    return SAMPLES / "triangle"

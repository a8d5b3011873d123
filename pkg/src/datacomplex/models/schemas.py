from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Rational = Union[str, int, float]


class SpaceDoc(BaseModel):
    id: str
    points: List[str]
    # omitted metric means the discrete metric (distance 1 between distinct points)
    metric: Optional[List[List[Rational]]] = None


class AttributeDoc(BaseModel):
    name: str
    space: str


class SchemaDoc(BaseModel):
    spaces: List[SpaceDoc]
    attributes: List[AttributeDoc]


class AtomDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    values: List[str] = Field(alias="tuple")
    mass: Rational


class TableDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    attributes: List[str] = Field(alias="list")
    atoms: List[AtomDoc] = Field(default_factory=list)


class TableSpec(BaseModel):
    """One entry of the project's tables[]."""
    model_config = ConfigDict(populate_by_name=True)

    name: str
    source: Union[str, TableDoc]
    attributes: List[str] = Field(alias="list")
    normalize: bool = False
    # attribute -> half-open [lo, hi) intervals; hi None is +infinity
    bins: Optional[Dict[str, List[Tuple[Rational, Optional[Rational]]]]] = None
    where: Optional[Dict[str, List[str]]] = None
    permute: Optional[List[int]] = None
    keep: Optional[List[int]] = None

    @field_validator("name")
    @classmethod
    def name_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("table name is empty")
        return v


class OptionsDoc(BaseModel):
    variable_budget: Optional[int] = Field(None, gt=0)
    permutation_closure: bool = False
    max_witness_combinations: Optional[int] = Field(None, gt=0)


class ProjectConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_: Union[str, SchemaDoc] = Field(alias="schema")
    tables: List[TableSpec]
    options: OptionsDoc = Field(default_factory=OptionsDoc)

    @model_validator(mode="after")
    def unique_table_names(self) -> "ProjectConfig":
        seen = set()
        for t in self.tables:
            if t.name in seen:
                raise ValueError(f"duplicate table name {t.name!r}")
            seen.add(t.name)
        return self

"""
Loading a project: config JSON -> schema, ingested tables and the data
complex they generate, plus the content hashes that reports embed.
"""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from .errors import ConfigError, DataComplexError, IngestionError, SchemaViolationError
from .measures import DataComplexGen, DataTable, permute, reduce
from .models.schemas import OptionsDoc, ProjectConfig, SchemaDoc, SpaceDoc, TableSpec
from .router import ingest_table, resolve_source
from .schema import Attribute, Schema, ValueSpace, validate_schema
from .simpattr import AttributeInclusion
from .utils.ids import content_digest, file_digest
from .utils.rationals import parse_rational

logger = logging.getLogger(__name__)

Doc = TypeVar("Doc", bound=BaseModel)


@dataclass
class Project:
    path: Path
    schema: Schema
    tables: Dict[str, DataTable]
    complex: DataComplexGen
    options: OptionsDoc
    input_hashes: Dict[str, str] = field(default_factory=dict)

    def table(self, name: str) -> DataTable:
        try:
            return self.tables[name]
        except KeyError:
            raise ConfigError(f"unknown table {name!r}; known: {', '.join(self.tables)}", field="tables") from None


# ----------------------------------------
# Documents
# ----------------------------------------
def _load_document(path: Path, model: Type[Doc]) -> Doc:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e.msg} (column {e.colno})", line=e.lineno) from None
    return _validate(model, raw, str(path))


def _validate(model: Type[Doc], raw: Any, where: str) -> Doc:
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"{where}: {loc}: {first['msg']}", field=loc) from None


def _metric(doc: SpaceDoc) -> Tuple[Tuple[Fraction, ...], ...]:
    n = len(doc.points)
    if doc.metric is None:
        return tuple(tuple(Fraction(int(i != j)) for j in range(n)) for i in range(n))
    try:
        return tuple(tuple(parse_rational(d) for d in row) for row in doc.metric)
    except ValueError as e:
        raise ConfigError(f"space {doc.id!r}: {e}", field=f"spaces.{doc.id}.metric") from None


def build_schema(doc: SchemaDoc) -> Schema:
    """Schema from its document; raises SchemaViolationError listing every violation."""
    spaces = tuple(ValueSpace(s.id, tuple(s.points), _metric(s)) for s in doc.spaces)
    attributes = tuple(Attribute(a.name, a.space) for a in doc.attributes)
    schema = Schema(attributes, spaces)
    violations = validate_schema(schema)
    if violations:
        raise SchemaViolationError(violations)
    return schema


# ----------------------------------------
# Tables
# ----------------------------------------
def _check_spec(spec: TableSpec, schema: Schema, index: int) -> None:
    where = f"tables.{index}"
    for k, a in enumerate(spec.attributes):
        if not schema.has_attribute(a):
            raise ConfigError(f"table {spec.name!r}: undeclared attribute {a!r}", field=f"{where}.list.{k}")
    for key in ("bins", "where"):
        for a in getattr(spec, key) or {}:
            if a not in spec.attributes:
                raise ConfigError(f"table {spec.name!r}: {key} names {a!r}, which is not in its list",
                                  field=f"{where}.{key}.{a}")


def _reshape(spec: TableSpec, t: DataTable, index: int) -> DataTable:
    try:
        if spec.permute is not None:
            t = permute(t, spec.permute)
        if spec.keep is not None:
            t = reduce(t, AttributeInclusion.from_map(t.attributes, spec.keep))
    except DataComplexError as e:
        raise ConfigError(f"table {spec.name!r}: {e.message}", field=f"tables.{index}") from None
    return t


def _hash_source(spec: TableSpec, base_dir: Path) -> str:
    path = resolve_source(spec, base_dir)
    if path is None:
        return content_digest(spec.source.model_dump(by_alias=True))
    try:
        return file_digest(path)
    except OSError as e:
        raise IngestionError(f"table {spec.name!r}: {e}", source=str(path)) from None


# ----------------------------------------
# Project
# ----------------------------------------
def load_project(path: Path) -> Project:
    path = Path(path)
    config = _load_document(path, ProjectConfig)
    base_dir = path.parent
    hashes: Dict[str, str] = {"config": file_digest(path)}

    if isinstance(config.schema_, str):
        schema_path = Path(config.schema_)
        if not schema_path.is_absolute():
            schema_path = base_dir / schema_path
        schema_doc = _load_document(schema_path, SchemaDoc)
        hashes["schema"] = file_digest(schema_path)
    else:
        schema_doc = config.schema_
        hashes["schema"] = content_digest(schema_doc.model_dump())
    schema = build_schema(schema_doc)

    if not config.tables:
        raise ConfigError("project declares no tables", field="tables")
    tables: Dict[str, DataTable] = {}
    for index, spec in enumerate(config.tables):
        _check_spec(spec, schema, index)
        hashes[f"tables.{spec.name}"] = _hash_source(spec, base_dir)
        tables[spec.name] = _reshape(spec, ingest_table(spec, schema, base_dir), index)
        logger.debug("table %s on %s: %d atoms", spec.name, list(tables[spec.name].attributes),
                     len(tables[spec.name].atoms))

    names: List[str] = list(tables)
    c = DataComplexGen(schema, tuple(tables[n] for n in names),
                       config.options.permutation_closure, tuple(names))
    return Project(path, schema, tables, c, config.options, hashes)

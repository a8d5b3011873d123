import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

from pydantic import ValidationError

from ..errors import ConfigError, IngestionError
from ..measures import DataTable
from ..models.schemas import TableDoc
from ..schema import Schema, ValueTuple
from ..utils.rationals import parse_rational

logger = logging.getLogger(__name__)


def load_table_doc(path: Path) -> TableDoc:
    source = str(path)
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IngestionError(f"invalid JSON: {e.msg} (column {e.colno})", source=source, row=e.lineno) from None
    except (OSError, UnicodeDecodeError) as e:
        raise IngestionError(f"cannot read table: {e}", source=source) from None
    try:
        return TableDoc.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise IngestionError(f"{where}: {first['msg']}", source=source) from None


def table_from_doc(
    doc: TableDoc,
    schema: Schema,
    attributes: Optional[Sequence[str]] = None,
    where: Optional[Mapping[str, Sequence[str]]] = None,
    normalize: bool = False,
    source: str = "<inline>",
) -> DataTable:
    """
    DataTable from a {"list", "atoms"} document. Every tuple is checked
    against the schema; repeated tuples are rejected rather than summed.
    """
    doc_list = tuple(doc.attributes)
    if attributes is not None and tuple(attributes) != doc_list:
        raise IngestionError(f"table list {list(doc_list)} does not match {list(attributes)}", source=source)
    for a in doc_list:
        if not schema.has_attribute(a):
            raise IngestionError(f"undeclared attribute {a!r}", source=source)

    allowed = {a: set(v) for a, v in (where or {}).items()}
    masses: Dict[ValueTuple, Fraction] = {}
    for k, atom in enumerate(doc.atoms):
        x = tuple(atom.values)
        if len(x) != len(doc_list):
            raise IngestionError(f"atom {k}: tuple {list(x)} does not fit the list", source=source, row=k)
        for a, label in zip(doc_list, x):
            if label not in schema.space_of(a):
                raise IngestionError(f"atom {k}: unknown label {label!r} for attribute {a!r}", source=source, row=k)
        try:
            mass = parse_rational(atom.mass)
        except ValueError as e:
            raise IngestionError(f"atom {k}: {e}", source=source, row=k) from None
        if mass < 0:
            raise IngestionError(f"atom {k}: negative mass {mass}", source=source, row=k)
        if x in masses:
            raise IngestionError(f"atom {k}: duplicate tuple {list(x)}", source=source, row=k)
        masses[x] = mass

    masses = {x: m for x, m in masses.items()
              if all(x[i] in allowed[a] for i, a in enumerate(doc_list) if a in allowed)}
    if normalize:
        total = sum(masses.values(), Fraction(0))
        if total == 0:
            raise IngestionError("cannot normalize a table of mass 0", source=source)
        masses = {x: m / total for x, m in masses.items()}
    logger.debug("%s: %d atoms", source, len(masses))
    return DataTable.from_mapping(doc_list, masses)


def ingest_json(
    source: Union[Path, TableDoc],
    schema: Schema,
    attributes: Optional[Sequence[str]] = None,
    normalize: bool = False,
    where: Optional[Mapping[str, Sequence[str]]] = None,
) -> DataTable:
    if isinstance(source, TableDoc):
        return table_from_doc(source, schema, attributes, where, normalize)
    try:
        return table_from_doc(load_table_doc(source), schema, attributes, where, normalize, str(source))
    except ConfigError as e:
        raise IngestionError(e.message, source=str(source)) from None

from pathlib import Path
from typing import Optional

from .errors import IngestionError
from .ingest import ingest_csv, ingest_json, parse_bins
from .measures import DataTable
from .models.schemas import TableDoc, TableSpec
from .schema import Schema

READERS = {
    "csv": "csv",
    "json": "json",
}


def detect_format(path: Path) -> str:
    ext = path.suffix.lstrip(".").lower()
    if ext in READERS:
        return READERS[ext]

    # Fallback by inspecting content
    head = path.read_text(encoding="utf-8", errors="ignore")[:256].lstrip()
    if head.startswith("{"):
        return "json"
    if head:
        return "csv"
    return "unknown"


def resolve_source(spec: TableSpec, base_dir: Optional[Path] = None) -> Optional[Path]:
    """Path of a file-backed table, relative paths taken from base_dir; None for inline tables."""
    if isinstance(spec.source, TableDoc):
        return None
    path = Path(spec.source)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return path


def ingest_table(spec: TableSpec, schema: Schema, base_dir: Optional[Path] = None) -> DataTable:
    path = resolve_source(spec, base_dir)
    if path is None:
        if spec.bins:
            raise IngestionError(f"table {spec.name!r}: bins apply to CSV sources only", source=spec.name)
        return ingest_json(spec.source, schema, spec.attributes, spec.normalize, spec.where)

    if not path.is_file():
        raise IngestionError(f"table {spec.name!r}: file not found", source=str(path))
    kind = detect_format(path)
    if kind == "csv":
        bins = {}
        for a, raw in (spec.bins or {}).items():
            try:
                bins[a] = parse_bins(raw)
            except ValueError as e:
                raise IngestionError(f"table {spec.name!r}: bins of {a!r}: {e}", source=str(path)) from None
        return ingest_csv(path, schema, spec.attributes, spec.normalize, bins, spec.where)
    if kind == "json":
        if spec.bins:
            raise IngestionError(f"table {spec.name!r}: bins apply to CSV sources only", source=str(path))
        return ingest_json(path, schema, spec.attributes, spec.normalize, spec.where)
    raise IngestionError(f"cannot detect the format of {path}", source=str(path))

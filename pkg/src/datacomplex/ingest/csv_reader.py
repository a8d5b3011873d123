import csv
import logging
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from ..errors import IngestionError
from ..measures import DataTable
from ..schema import Schema
from ..utils.rationals import parse_rational

logger = logging.getLogger(__name__)

Interval = Tuple[Fraction, Optional[Fraction]]


def parse_bins(raw: Sequence[Sequence]) -> List[Interval]:
    intervals = []
    for lo, hi in raw:
        lo = parse_rational(lo)
        hi = parse_rational(hi) if hi is not None else None
        if hi is not None and hi <= lo:
            raise ValueError(f"empty bin [{lo}, {hi})")
        intervals.append((lo, hi))
    return intervals


def bin_label(text: str, intervals: Sequence[Interval]) -> Optional[str]:
    """Index (as a label) of the half-open interval containing the number."""
    value = parse_rational(text)
    for k, (lo, hi) in enumerate(intervals):
        if value >= lo and (hi is None or value < hi):
            return str(k)
    return None


def ingest_csv(
    path: Path,
    schema: Schema,
    attributes: Sequence[str],
    normalize: bool = False,
    bins: Optional[Mapping[str, Sequence[Interval]]] = None,
    where: Optional[Mapping[str, Sequence[str]]] = None,
) -> DataTable:
    """
    Counting measure of a headed CSV file: each row adds mass 1 to its tuple.
    Binned columns map numbers to interval indices; rows failing a where
    filter are dropped before counting. normalize divides by the kept rows.
    """
    path = Path(path)
    source = str(path)
    attributes = tuple(attributes)
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise IngestionError("empty file", source=source) from None
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise IngestionError(f"unreadable CSV: {e}", source=source) from None

    header = tuple(frame.iloc[0]) if len(frame) else ()
    if header != attributes:
        raise IngestionError(
            f"header {list(header)} does not match list {list(attributes)}", source=source, row=1
        )
    rows = frame.iloc[1:]
    if rows.empty:
        raise IngestionError("no data rows", source=source)

    bins = bins or {}
    where = {a: set(v) for a, v in (where or {}).items()}
    spaces = [schema.space_of(a) for a in attributes]
    counts: Counter = Counter()
    kept = 0
    for offset, values in enumerate(rows.itertuples(index=False, name=None)):
        row_number = offset + 2
        labels = []
        for a, space, cell in zip(attributes, spaces, values):
            if '"' in cell:
                raise IngestionError("quoted labels are not supported", source=source, row=row_number)
            label = cell
            if a in bins:
                try:
                    label = bin_label(cell, bins[a])
                except ValueError:
                    raise IngestionError(f"{cell!r} is not a number", source=source, row=row_number) from None
                if label is None:
                    raise IngestionError(f"{cell!r} falls outside the bins of {a!r}", source=source, row=row_number)
            if label not in space:
                raise IngestionError(f"unknown label {label!r} for attribute {a!r}", source=source, row=row_number)
            labels.append(label)
        if any(labels[i] not in where[a] for i, a in enumerate(attributes) if a in where):
            continue
        counts[tuple(labels)] += 1
        kept += 1

    logger.debug("%s: %d rows, %d kept, %d atoms", source, len(rows), kept, len(counts))
    if normalize:
        if kept == 0:
            raise IngestionError("no rows left to normalize", source=source)
        masses: Dict = {x: Fraction(n, kept) for x, n in counts.items()}
    else:
        masses = {x: Fraction(n) for x, n in counts.items()}
    return DataTable.from_mapping(attributes, masses)

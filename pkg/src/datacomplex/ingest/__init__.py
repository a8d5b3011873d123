from .csv_reader import bin_label, ingest_csv, parse_bins
from .json_reader import ingest_json, table_from_doc

__all__ = ["bin_label", "ingest_csv", "ingest_json", "parse_bins", "table_from_doc"]

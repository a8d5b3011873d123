import hashlib
import json
import uuid
from pathlib import Path
from typing import Any, Mapping

# Fixed namespace so report ids are reproducible across runs and machines.
REPORT_NAMESPACE = uuid.UUID("6ba7b810-9dad-11d1-80b4-00c04fd430c8")


def file_digest(path: Path) -> str:
    """
    SHA-256 of the raw bytes of an input file.
    """
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def content_digest(document: Any) -> str:
    """
    SHA-256 of a JSON-serialisable document in canonical form
    (sorted keys, no whitespace).
    """
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def make_report_id(command: str, input_hashes: Mapping[str, str], arguments: Mapping[str, Any]) -> str:
    """
    Deterministic UUID5 for a report: same command, inputs and arguments give the same id.
    """
    unique_string = f"{command}:{content_digest(dict(input_hashes))}:{content_digest(dict(arguments))}"
    return str(uuid.uuid5(REPORT_NAMESPACE, unique_string))

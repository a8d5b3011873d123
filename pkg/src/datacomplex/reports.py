import re
from typing import Any, Dict, Mapping

from . import __version__
from .utils.ids import make_report_id
from .utils.rationals import format_decimal, parse_rational

REPORT_FORMAT = 1

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


def build_report(command: str, input_hashes: Mapping[str, str], arguments: Mapping[str, Any],
                 result: Mapping[str, Any], decimal: bool = False) -> Dict[str, Any]:
    """
    Report envelope shared by every command. Exact values stay "p/q" strings;
    decimal adds lossy *_decimal companions next to them.
    """
    if decimal:
        result = with_decimals(result)
    return {
        "command": command,
        "report_id": make_report_id(command, input_hashes, arguments),
        "format": REPORT_FORMAT,
        "version": __version__,
        "inputs": dict(sorted(input_hashes.items())),
        "arguments": dict(arguments),
        "result": result,
    }


def with_decimals(node: Any) -> Any:
    if isinstance(node, list):
        return [with_decimals(v) for v in node]
    if not isinstance(node, dict):
        return node
    out: Dict[str, Any] = {}
    for key, value in node.items():
        out[key] = with_decimals(value)
        if isinstance(value, str) and (value == "inf" or _RATIONAL.match(value)):
            out[f"{key}_decimal"] = "inf" if value == "inf" else format_decimal(parse_rational(value))
    return out

import re
from typing import Any, Dict, Tuple

import config
from clique.constants import (
    METHOD_EXACT,
    METHOD_HYBRID,
    METHOD_LOCAL_SEARCH,
    METHOD_LOW_PASS,
)


def translate_method(method: str) -> str:
    return {
        METHOD_HYBRID: "Scattering (hybrid)",
        METHOD_LOW_PASS: "GCN filters only",
        METHOD_LOCAL_SEARCH: "Local search",
        METHOD_EXACT: "Exact (Bron-Kerbosch)",
    }.get(method, "unknown")


def parse_method(spec: str) -> Tuple[str, Tuple[int, ...]]:
    """
    Parses a benchmark method such as 'hybrid', 'exact' or 'local-search:5:100'
    into its name and integer arguments.
    """
    name, *args = spec.strip().split(":")
    if name not in (METHOD_HYBRID, METHOD_LOW_PASS, METHOD_LOCAL_SEARCH, METHOD_EXACT):
        raise ValueError(f"Unknown method '{name}'")
    try:
        return name, tuple(int(a) for a in args)
    except ValueError:
        raise ValueError(f"Method arguments must be integers: '{spec}'")


def _coerce(value: str) -> Any:
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", ""):
        return None
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def parse_key_value_file(path: str) -> Dict[str, Any]:
    """
    Reads a flat 'key=value' file; '#' starts a comment, blank lines are skipped.
    Values become bool, None, int or float where they parse as such.
    """
    values = {}
    with open(path) as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            match = re.fullmatch(r"([A-Za-z_][\w.]*)\s*=\s*(.*)", line)
            if not match:
                raise ValueError(f"{path}:{line_no}: expected 'key=value', got '{line}'")
            values[match.group(1)] = _coerce(match.group(2).strip())
    return values


def resolve_threads(value) -> int:
    threads = config.THREADS if value is None else int(value)
    if threads < 1:
        raise ValueError(f"Thread count must be >= 1, got {threads}")
    return threads

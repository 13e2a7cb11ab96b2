"""Rendering of analysis results as machine records or human tables.

A record is a named, ordered mapping of primitive fields.  The machine
format emits one record per line (``record=<name> key=value ...``) with
floats rendered to 17 significant digits so replays are byte-identical and
values round-trip exactly.  The table format presents the same fields,
nothing more and nothing less.
"""

from __future__ import annotations

from typing import Dict, List, Tuple, Union

FieldValue = Union[str, int, float, bool, None]
Record = Tuple[str, Dict[str, FieldValue]]


def format_value(value: FieldValue) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_records(records: List[Record]) -> str:
    lines = []
    for name, fields in records:
        parts = [f"record={name}"]
        parts.extend(f"{key}={format_value(val)}" for key, val in fields.items())
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def render_table(records: List[Record]) -> str:
    lines: List[str] = []
    for name, fields in records:
        if name == "warning":
            message = fields.get("message", "")
            lines.append(f"WARNING: {message}")
            lines.append("")
            continue
        lines.append(f"[{name}]")
        if fields:
            width = max(len(key) for key in fields)
            for key, val in fields.items():
                lines.append(f"  {key:<{width}}  {format_value(val)}")
        lines.append("")
    return "\n".join(lines)

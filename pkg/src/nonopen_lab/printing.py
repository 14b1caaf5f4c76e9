"""Helpers for writing JSON and CSV output to stdout or files."""

from __future__ import annotations

import csv
import io
import json
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any


def format_json(data: Any, *, pretty: bool = False) -> str:
    """Serialize ``data`` the same way for stdout and files.

    Args:
        data: Any JSON-serializable value.
        pretty: Whether to indent output for readability.
    """
    if pretty:
        return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(data, ensure_ascii=False, separators=(",", ":")) + "\n"


def format_csv(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """Render ``rows`` as CSV with a header and a fixed column order.

    Args:
        rows: Records keyed by column name; missing keys become empty cells.
        columns: Column order.
    """
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({column: _cell(row.get(column)) for column in columns})
    return buffer.getvalue()


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def print_json(data: Any, *, pretty: bool = False) -> None:
    """Print JSON data to stdout."""
    sys.stdout.write(format_json(data, pretty=pretty))


def save_json(path: str, data: Any, *, pretty: bool = True) -> None:
    """Persist JSON data to disk.

    Args:
        path: Output file path.
        data: Any JSON-serializable value.
        pretty: Whether to indent output for readability.
    """
    Path(path).write_text(format_json(data, pretty=pretty), encoding="utf-8")


def print_csv(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> None:
    """Print CSV rows to stdout."""
    sys.stdout.write(format_csv(rows, columns))


def save_csv(path: str, rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> None:
    """Persist CSV rows to disk."""
    Path(path).write_text(format_csv(rows, columns), encoding="utf-8")

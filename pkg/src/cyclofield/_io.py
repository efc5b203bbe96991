"""Deterministic artifact writers shared by the library and the CLI.

CSV bodies are byte-reproducible: floats are rendered with 17 significant
digits, rows end with a bare newline, and files are written to a temporary
sibling then atomically renamed into place.  An optional leading comment line
carries the hash of the configuration that produced the file.
"""

from __future__ import annotations

import json
import os
import tempfile

__all__ = ["format_float", "write_csv", "write_json", "write_text"]


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], rows, config_hash: str | None = None) -> None:
    lines = []
    if config_hash is not None:
        lines.append(f"# config={config_hash}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, document, config_hash: str | None = None) -> None:
    if config_hash is not None and isinstance(document, dict):
        document = {"config": config_hash, **document}
    write_text(path, json.dumps(document, indent=2, sort_keys=True) + "\n")

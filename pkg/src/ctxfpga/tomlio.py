"""TOML reading with line-numbered errors, shared by every file loader."""

from __future__ import annotations

import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParseError


def load_toml(text: str, source: str | None = None) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc), line=int(m.group(1)) if m else None, source=source) from None


def line_of(text: str, path: str) -> int | None:
    """Best-effort line number of a dotted field path in TOML text."""
    parts = path.split(".")
    lines = text.splitlines()
    start = 0
    if len(parts) > 1:
        header = "[" + ".".join(parts[:-1]) + "]"
        for i, line in enumerate(lines):
            if line.strip().startswith(header):
                start = i
                break
    key = re.compile(r"^\s*" + re.escape(parts[-1]) + r"\s*=")
    for i in range(start, len(lines)):
        if key.match(lines[i]) or lines[i].strip().startswith("[" + path):
            return i + 1
    return start + 1 if start else None

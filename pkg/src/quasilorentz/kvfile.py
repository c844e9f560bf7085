"""Plain-text sectioned key-value files.

Layout::

    # comment
    [section]
    key = value

Floats are written with 17 significant digits so a read/write cycle is
byte-identical. Errors report the offending line number.
"""
from __future__ import annotations

import numpy as np

from .errors import ParseError


def fmt_float(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"  # also folds -0.0
    return format(x, ".17g")


def fmt_vec(v) -> str:
    return " ".join(fmt_float(x) for x in np.asarray(v, dtype=float).ravel())


def fmt_ints(v) -> str:
    return " ".join(str(int(x)) for x in np.asarray(v).ravel())


class Section(dict):
    """Mapping key -> raw string, remembering the line each key came from."""

    def __init__(self, name: str, lineno: int):
        super().__init__()
        self.name = name
        self.lineno = lineno
        self.lines: dict[str, int] = {}

    def need(self, key: str) -> str:
        if key not in self:
            raise ParseError(f"section [{self.name}] is missing key '{key}'", self.lineno)
        return self[key]

    def floats(self, key: str, count: int | None = None) -> np.ndarray:
        raw = self.need(key)
        try:
            vals = np.array([float(tok) for tok in raw.split()], dtype=float)
        except ValueError:
            raise ParseError(f"'{key}' expects decimal numbers, got '{raw}'", self.lines[key]) from None
        if count is not None and vals.size != count:
            raise ParseError(f"'{key}' expects {count} values, got {vals.size}", self.lines[key])
        return vals

    def ints(self, key: str, count: int | None = None) -> np.ndarray:
        raw = self.need(key)
        try:
            vals = np.array([int(tok) for tok in raw.split()], dtype=np.int64)
        except ValueError:
            raise ParseError(f"'{key}' expects integers, got '{raw}'", self.lines[key]) from None
        if count is not None and vals.size != count:
            raise ParseError(f"'{key}' expects {count} values, got {vals.size}", self.lines[key])
        return vals

    def int(self, key: str) -> int:
        return int(self.ints(key, 1)[0])

    def float(self, key: str) -> float:
        return float(self.floats(key, 1)[0])


def parse(text: str) -> dict[str, Section]:
    sections: dict[str, Section] = {}
    current: Section | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]") or len(stripped) < 3:
                raise ParseError(f"malformed section header '{stripped}'", lineno)
            name = stripped[1:-1].strip()
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", lineno)
            current = Section(name, lineno)
            sections[name] = current
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value', got '{stripped}'", lineno)
        if current is None:
            raise ParseError("key-value pair before any [section] header", lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ParseError("empty key", lineno)
        if key in current:
            raise ParseError(f"duplicate key '{key}' in [{current.name}]", lineno)
        current[key] = value.strip()
        current.lines[key] = lineno
    return sections


def dump(sections: list[tuple[str, list[tuple[str, str]]]], header: str | None = None) -> str:
    out = []
    if header:
        out.extend(f"# {h}" for h in header.splitlines())
    for name, items in sections:
        if out:
            out.append("")
        out.append(f"[{name}]")
        out.extend(f"{k} = {v}" for k, v in items)
    return "\n".join(out) + "\n"

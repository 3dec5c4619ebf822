"""Text formats: step-function CSV, sparse-collection CSV, JSON-lines, key=value config.

Every file written here starts with a provenance comment
``# extrapolab v<version>, seed=<seed>, L=<level>``.  Lines starting with
``#`` are comments for every reader.
"""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__
from .dyadic import DyadicCube, StepFunction
from .sparse import SparseCollection, SparseEntry

__all__ = [
    "ParseError",
    "provenance",
    "format_step",
    "parse_step",
    "write_step",
    "read_step",
    "format_sparse",
    "parse_sparse",
    "format_jsonl",
    "parse_config",
    "read_config",
]

STEP_HEADER = "level,cells"
SPARSE_HEADER = "grid,level,index,k,E_cells"


class ParseError(ValueError):
    """Malformed input; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None, source: str = "<input>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


def provenance(seed, level) -> str:
    return f"# extrapolab v{__version__}, seed={seed}, L={level}"


def _content_lines(text: str):
    """``(lineno, stripped)`` for non-blank, non-comment lines."""
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s and not s.startswith("#"):
            yield n, s


def _float(s: str, n: int, source: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ParseError(f"not a number: {s!r}", n, source) from None


def _int(s: str, n: int, source: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ParseError(f"not an integer: {s!r}", n, source) from None


# --------------------------------------------------------------------------
# Step functions
# --------------------------------------------------------------------------


def format_step(f: StepFunction, seed=None) -> str:
    """Header, ``level,cells``, the line ``L,2^L``, then one value per line."""
    lines = [provenance(seed, f.level), STEP_HEADER, f"{f.level},{f.ncells}"]
    # repr of a Python float is the shortest string that round-trips
    lines += [repr(float(v)) for v in f.values]
    return "\n".join(lines) + "\n"


def parse_step(text: str, source: str = "<input>") -> StepFunction:
    it = _content_lines(text)
    n, head = next(it, (None, None))
    if head is None:
        raise ParseError("empty step-function file", None, source)
    if head.replace(" ", "") != STEP_HEADER:
        raise ParseError(f"expected header {STEP_HEADER!r}, got {head!r}", n, source)
    n, dims = next(it, (n, None))
    if dims is None:
        raise ParseError("missing 'level,cells' line", n, source)
    parts = dims.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 'L,N', got {dims!r}", n, source)
    level, cells = _int(parts[0], n, source), _int(parts[1], n, source)
    if not 0 <= level <= 30 or cells != 2**level:
        raise ParseError(f"cell count {cells} does not match level {level}", n, source)
    vals = np.empty(cells)
    i = 0
    for n, s in it:
        if i >= cells:
            raise ParseError(f"more than {cells} values", n, source)
        v = _float(s, n, source)
        if not np.isfinite(v) or v < 0:
            raise ParseError(f"cell value must be finite and non-negative, got {s!r}", n, source)
        vals[i] = v
        i += 1
    if i != cells:
        raise ParseError(f"expected {cells} values, got {i}", None, source)
    return StepFunction(level, vals)


def write_step(path, f: StepFunction, seed=None) -> None:
    Path(path).write_text(format_step(f, seed))


def read_step(path) -> StepFunction:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ParseError(str(e), None, str(p)) from None
    return parse_step(text, str(p))


# --------------------------------------------------------------------------
# Sparse collections
# --------------------------------------------------------------------------


def format_sparse(S: SparseCollection, seed=None) -> str:
    lines = [provenance(seed, S.L), f"# anchor={S.anchor!r}, base={S.base!r}", SPARSE_HEADER]
    for e in S.entries:
        q = e.cube
        k = "" if e.k is None else str(e.k)
        cells = ";".join(str(int(c)) for c in e.cells)
        lines.append(f"{q.grid},{q.level},{q.index},{k},{cells}")
    return "\n".join(lines) + "\n"


_META = re.compile(r"L=(\d+)")
_ANCHOR = re.compile(r"anchor=([^,\s]+), base=([^,\s]+)")


def parse_sparse(text: str, source: str = "<input>", level: int | None = None) -> SparseCollection:
    """Inverse of :func:`format_sparse`; the level comes from the provenance line unless given."""
    anchor, base = 1.0, 4.0
    for n, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if not s.startswith("#"):
            continue
        if level is None and (m := _META.search(s)):
            level = int(m.group(1))
        if m := _ANCHOR.search(s):
            anchor, base = _float(m.group(1), n, source), _float(m.group(2), n, source)
    if level is None:
        raise ParseError("no level: missing provenance line", None, source)
    it = _content_lines(text)
    n, head = next(it, (None, None))
    if head is None or head.replace(" ", "") != SPARSE_HEADER:
        raise ParseError(f"expected header {SPARSE_HEADER!r}", n, source)
    S = SparseCollection(level, [], anchor, base)
    for n, s in it:
        parts = s.split(",")
        if len(parts) != 5:
            raise ParseError(f"expected 5 fields, got {len(parts)}", n, source)
        grid, lv, idx = (_int(x, n, source) for x in parts[:3])
        k = _int(parts[3], n, source) if parts[3] else None
        cells = np.array([_int(c, n, source) for c in parts[4].split(";") if c], dtype=int)
        if grid not in (0, 1, 2) or not 0 <= lv <= level:
            raise ParseError(f"bad cube ({grid}, {lv}, {idx})", n, source)
        S.entries.append(SparseEntry(DyadicCube(lv, idx, level, grid), cells, k))
    return S


# --------------------------------------------------------------------------
# Reports and configuration
# --------------------------------------------------------------------------


def format_jsonl(records: Iterable[dict], header: str | None = None) -> str:
    lines = [header] if header else []
    lines += [json.dumps(r, sort_keys=True) for r in records]
    return "\n".join(lines) + "\n"


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line."""
    out = {}
    for n, s in _content_lines(text):
        key, sep, value = s.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ParseError(f"expected key=value, got {s!r}", n, source)
        out[key.replace("-", "_")] = value.strip()
    return out


def read_config(path) -> dict[str, str]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ParseError(str(e), None, str(p)) from None
    return parse_config(text, str(p))

"""Plain-text serialization of regions.

Grammar (one block per region; parsing is locale independent, ``.`` decimal
separator, exponent notation and ``inf``/``-inf`` allowed; blank lines and
``#`` comments are skipped):

    polytope n=<dim> rows=<m>
    <a_1 ... a_n b>          (m lines)

    box
    <lower ...>
    <upper ...>

    union k=<count>
    <count polytope blocks>

    ellipsoid
    <center ...>
    <n shape-matrix rows>
    <level>

    empty n=<dim>
    full n=<dim>

``empty``/``full`` are extensions beyond the polytopic grammar so that every
region the CLI can produce round-trips.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import (
    Box,
    Ellipsoid,
    EmptyRegion,
    FullRegion,
    HPolytope,
    Region,
    UnionOfPolytopes,
)

__all__ = ["ParseError", "LineCursor", "format_region", "parse_region", "parse_region_text"]


class ParseError(ValueError):
    """A parse failure carrying the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LineCursor:
    """Iterates content lines of a text document, skipping blanks and comments."""

    def __init__(self, text: str):
        self._lines = text.splitlines()
        self._pos = 0

    def peek(self) -> tuple[str, int] | None:
        pos = self._pos
        while pos < len(self._lines):
            stripped = self._lines[pos].strip()
            if stripped and not stripped.startswith("#"):
                return stripped, pos + 1
            pos += 1
        return None

    def next(self, what: str = "line") -> tuple[str, int]:
        while self._pos < len(self._lines):
            raw = self._lines[self._pos]
            self._pos += 1
            stripped = raw.strip()
            if stripped and not stripped.startswith("#"):
                return stripped, self._pos
        raise ParseError(f"unexpected end of input, expected {what}", len(self._lines) + 1)

    def at_end(self) -> bool:
        return self.peek() is None

    @property
    def line(self) -> int:
        return self._pos


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x) + 0.0, ".17g")


def _fmt_vec(v) -> str:
    return " ".join(_fmt(x) for x in np.asarray(v, dtype=float))


def _parse_floats(text: str, line: int, expected: int | None = None) -> np.ndarray:
    try:
        vals = np.array([float(tok) for tok in text.split()])
    except ValueError as exc:
        raise ParseError(f"bad number: {exc}", line) from None
    if expected is not None and vals.shape[0] != expected:
        raise ParseError(f"expected {expected} values, got {vals.shape[0]}", line)
    return vals


def _parse_attrs(tokens: list[str], line: int, required: list[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParseError(f"expected key=value, got {tok!r}", line)
        key, _, val = tok.partition("=")
        try:
            out[key] = int(val)
        except ValueError:
            raise ParseError(f"attribute {key} must be an integer, got {val!r}", line) from None
    for key in required:
        if key not in out:
            raise ParseError(f"missing attribute {key}=", line)
    return out


def format_region(r: Region) -> str:
    """Render one region block (ends with a newline)."""
    if isinstance(r, EmptyRegion):
        return f"empty n={r.dim}\n"
    if isinstance(r, FullRegion):
        return f"full n={r.dim}\n"
    if isinstance(r, Box):
        return "box\n" + _fmt_vec(r.lower) + "\n" + _fmt_vec(r.upper) + "\n"
    if isinstance(r, HPolytope):
        lines = [f"polytope n={r.dim} rows={r.nrows}"]
        for i in range(r.nrows):
            lines.append(_fmt_vec(np.hstack([r.a[i], r.b[i]])))
        return "\n".join(lines) + "\n"
    if isinstance(r, UnionOfPolytopes):
        parts = [f"union k={len(r.pieces)}\n"]
        parts.extend(format_region(p) for p in r.pieces)
        return "".join(parts)
    if isinstance(r, Ellipsoid):
        lines = ["ellipsoid", _fmt_vec(r.center)]
        for row in r.shape:
            lines.append(_fmt_vec(row))
        lines.append(_fmt(r.level))
        return "\n".join(lines) + "\n"
    raise TypeError(f"{type(r).__name__} has no text form")


def parse_region(cursor: LineCursor) -> Region:
    header, line = cursor.next("region header")
    tokens = header.split()
    kind = tokens[0]

    if kind == "polytope":
        attrs = _parse_attrs(tokens[1:], line, ["n", "rows"])
        n, m = attrs["n"], attrs["rows"]
        if n < 1:
            raise ParseError("polytope dimension must be >= 1", line)
        rows = np.zeros((m, n + 1))
        for i in range(m):
            text, rline = cursor.next("polytope row")
            rows[i] = _parse_floats(text, rline, n + 1)
        try:
            return HPolytope(rows[:, :n], rows[:, n])
        except ValueError as exc:
            raise ParseError(str(exc), line) from None

    if kind == "box":
        lo_text, lo_line = cursor.next("box lower bounds")
        lo = _parse_floats(lo_text, lo_line)
        hi_text, hi_line = cursor.next("box upper bounds")
        hi = _parse_floats(hi_text, hi_line, lo.shape[0])
        try:
            return Box(lo, hi)
        except ValueError as exc:
            raise ParseError(str(exc), hi_line) from None

    if kind == "union":
        attrs = _parse_attrs(tokens[1:], line, ["k"])
        pieces = []
        for _ in range(attrs["k"]):
            piece = parse_region(cursor)
            if not isinstance(piece, HPolytope):
                raise ParseError("union pieces must be polytope blocks", cursor.line)
            pieces.append(piece)
        if not pieces:
            raise ParseError("union must have k >= 1", line)
        try:
            return UnionOfPolytopes(tuple(pieces))
        except ValueError as exc:
            raise ParseError(str(exc), line) from None

    if kind == "ellipsoid":
        c_text, c_line = cursor.next("ellipsoid center")
        center = _parse_floats(c_text, c_line)
        n = center.shape[0]
        shape = np.zeros((n, n))
        for i in range(n):
            row_text, row_line = cursor.next("ellipsoid shape row")
            shape[i] = _parse_floats(row_text, row_line, n)
        lvl_text, lvl_line = cursor.next("ellipsoid level")
        level = _parse_floats(lvl_text, lvl_line, 1)[0]
        try:
            return Ellipsoid(center, shape, level)
        except ValueError as exc:
            raise ParseError(str(exc), lvl_line) from None

    if kind == "empty":
        attrs = _parse_attrs(tokens[1:], line, ["n"])
        return EmptyRegion(attrs["n"])

    if kind == "full":
        attrs = _parse_attrs(tokens[1:], line, ["n"])
        return FullRegion(attrs["n"])

    raise ParseError(f"unknown region kind {kind!r}", line)


def parse_region_text(text: str) -> Region:
    cursor = LineCursor(text)
    region = parse_region(cursor)
    if not cursor.at_end():
        extra, line = cursor.next()
        raise ParseError(f"trailing content {extra!r} after region block", line)
    return region

"""Plain-text formats: numeric vector files, assignment lines, integer ranges.

Vector files hold one point per line, whitespace separated; ``#`` starts
a comment line. Leading numeric tokens are coordinates and any trailing
tokens form the row label::

    1 2 3 Example1
    4 5 6 Example2

Assignment lines list one integer per point (``-1`` for noise) followed by
an optional label, e.g. ``0 0 1 1 -1 k=2``.
"""
from __future__ import annotations

import io
import math
from typing import Iterable, Optional, TextIO, Union

import numpy as np

from .core import Clustering, Dataset

Source = Union[str, TextIO, Iterable[str]]


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(source: Source):
    if isinstance(source, str):
        source = io.StringIO(source)
    for number, line in enumerate(source, start=1):
        line = line.strip()
        if line and not line.startswith("#"):
            yield number, line


def _number(token: str) -> Optional[float]:
    try:
        value = float(token)
    except ValueError:
        return None
    return value


def parse_points(source: Source) -> Dataset:
    """Read a vector file from text, an open file, or an iterable of lines."""
    rows, labels = [], []
    dim = None
    for number, line in _lines(source):
        coords, label = [], []
        for token in line.split():
            value = _number(token)
            if value is None:
                label.append(token)
                continue
            if label:
                raise ParseError(f"numeric token {token!r} after label text", number)
            if not math.isfinite(value):
                raise ParseError(f"non-finite value {token!r}", number)
            coords.append(value)
        if not coords:
            raise ParseError("no numeric columns", number)
        if dim is None:
            dim = len(coords)
        elif len(coords) != dim:
            raise ParseError(f"expected {dim} columns, found {len(coords)}", number)
        rows.append(coords)
        labels.append(" ".join(label) if label else None)
    if not rows:
        raise ParseError("no data rows")
    has_labels = any(lab is not None for lab in labels)
    return Dataset(np.array(rows), tuple(lab or "" for lab in labels) if has_labels else None)


def read_points(path: str) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_points(fh)


def write_assignment(c: Union[Clustering, Iterable[int]], label: Optional[str] = None) -> str:
    """One assignment line with a trailing newline."""
    values = np.asarray(c.assignment if isinstance(c, Clustering) else list(c), dtype=np.int64)
    if values.size == 0:
        raise ValueError("cannot write an empty clustering")
    parts = [str(int(v)) for v in values]
    if label:
        parts.append(label)
    return " ".join(parts) + "\n"


def parse_assignments(source: Source) -> list[tuple[np.ndarray, Optional[str]]]:
    """Read assignment lines back as ``(labels, run_label)`` pairs."""
    out = []
    for number, line in _lines(source):
        values, label = [], []
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                label.append(token)
                continue
            if label:
                raise ParseError(f"integer {token!r} after label text", number)
            values.append(value)
        if not values:
            raise ParseError("no assignments", number)
        out.append((np.array(values, dtype=np.int64), " ".join(label) or None))
    return out


def _int(token: str) -> int:
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"not an integer: {token!r}") from None


def parse_int_range(text: str) -> tuple[int, ...]:
    """Expand ``a,b,..,c`` fills; consecutive fills chain on the last values.

    ``"1,2,..,10,20,..,100"`` gives 1 to 10, then 20 to 100 in steps of 10.
    The result must be positive and increasing; repeated values collapse.
    """
    tokens = [t.strip() for t in text.split(",")]
    if not tokens or any(t == "" for t in tokens):
        raise ParseError(f"malformed range {text!r}")
    out: list[int] = []
    i = 0
    while i < len(tokens):
        if tokens[i] != "..":
            value = _int(tokens[i])
            if out and value == out[-1]:
                pass
            elif out and value < out[-1]:
                raise ParseError(f"range is not increasing at {value}")
            else:
                out.append(value)
            i += 1
            continue
        if len(out) < 2 or i + 1 >= len(tokens) or tokens[i + 1] == "..":
            raise ParseError(f"'..' needs two values before and one after in {text!r}")
        step = out[-1] - out[-2]
        end = _int(tokens[i + 1])
        if end < out[-1] or (end - out[-1]) % step:
            raise ParseError(f"{end} is not reachable from {out[-1]} in steps of {step}")
        out.extend(range(out[-1] + step, end + 1, step))
        i += 2
    if out[0] < 1:
        raise ParseError("range values must be positive")
    return tuple(out)

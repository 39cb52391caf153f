"""Text format for complex matrices.

::

    # cmatrix <rows> <cols>
    re im re im ...      (rows lines, 2*cols floats each, row-major)

Floats are written with ``repr`` so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None, path=None):
        self.line = line
        self.col = col
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if col is not None:
            where.append(f"column {col}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {msg}" if prefix else msg)


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    rows, cols = M.shape
    out = [f"# cmatrix {rows} {cols}"]
    for r in range(rows):
        parts = []
        for z in M[r]:
            parts.append(_fmt(z.real))
            parts.append(_fmt(z.imag))
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def loads(text: str, path=None) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input", line=1, path=path)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "#" or head[1] != "cmatrix":
        raise ParseError("expected header '# cmatrix <rows> <cols>'", line=1, col=1, path=path)
    try:
        rows, cols = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError("non-integer dimensions in header", line=1, path=path) from None
    if rows < 1 or cols < 1:
        raise ParseError("dimensions must be positive", line=1, path=path)
    body = [ln for ln in lines[1:]]
    # trailing blank lines are tolerated, interior ones are not
    while body and not body[-1].strip():
        body.pop()
    if len(body) != rows:
        raise ParseError(f"expected {rows} data rows, found {len(body)}", line=len(body) + 2, path=path)
    M = np.empty((rows, cols), dtype=np.complex128)
    for r, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != 2 * cols:
            raise ParseError(f"expected {2 * cols} values, found {len(toks)}", line=r + 2, path=path)
        try:
            vals = [float(t) for t in toks]
        except ValueError:
            bad = next(i for i, t in enumerate(toks) if not _isfloat(t))
            raise ParseError(f"invalid number {toks[bad]!r}", line=r + 2, col=bad + 1, path=path) from None
        M[r].real = vals[0::2]
        M[r].imag = vals[1::2]
    if not np.all(np.isfinite(M)):
        raise ParseError("non-finite entry", path=path)
    return M


def _isfloat(t: str) -> bool:
    try:
        float(t)
    except ValueError:
        return False
    return True


def read(path) -> np.ndarray:
    return loads(Path(path).read_text(), path=path)


def write(path, M) -> None:
    Path(path).write_text(dumps(M))


def to_csv_pairs(M) -> str:
    """CSV with one row per matrix row, alternating ``re,im`` cells."""
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M:
        w.writerow([s for z in row for s in (_fmt(z.real), _fmt(z.imag))])
    return buf.getvalue()


def from_csv_pairs(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ParseError("empty CSV")
    width = len(rows[0])
    if width % 2:
        raise ParseError("odd number of columns; expected re,im pairs", line=1)
    M = np.empty((len(rows), width // 2), dtype=np.complex128)
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"expected {width} cells, found {len(r)}", line=i + 1)
        try:
            vals = [float(t) for t in r]
        except ValueError:
            raise ParseError("invalid number", line=i + 1) from None
        M[i].real = vals[0::2]
        M[i].imag = vals[1::2]
    return M

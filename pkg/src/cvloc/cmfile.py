"""Plain-text covariance-matrix files.

Layout::

    cv-cm v1 N=3 convention=xp-interleaved-vacuum1
    # labels: A B C          (optional)
    <2N rows of 2N whitespace-separated decimals>

Blank lines and ``#`` comments are ignored.  Values are written with 17
significant digits, so a write-read round trip is exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CMParseError
from .gaussian import SYMMETRY_RTOL

MAGIC = "cv-cm"
VERSION = "v1"
CONVENTION = "xp-interleaved-vacuum1"


@dataclass
class CMFile:
    matrix: np.ndarray
    labels: tuple = ()

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2


def _tokens(line):
    """``(column, text)`` of whitespace-separated tokens, 1-based columns."""
    out, i = [], 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        out.append((i + 1, line[i:j]))
        i = j
    return out


def _parse_header(line, lineno):
    toks = _tokens(line)
    if not toks or toks[0][1] != MAGIC:
        raise CMParseError(f"expected header starting with '{MAGIC}'", lineno, toks[0][0] if toks else 1)
    fields = {}
    for col, t in toks[1:]:
        if "=" in t:
            k, v = t.split("=", 1)
            fields[k] = (col, v)
        elif t != VERSION:
            raise CMParseError(f"unsupported format version '{t}'", lineno, col)
    if "N" not in fields:
        raise CMParseError("header lacks N=<modes>", lineno, len(line) + 1)
    col, v = fields["N"]
    try:
        n = int(v)
    except ValueError:
        raise CMParseError(f"bad mode count '{v}'", lineno, col) from None
    if n < 1:
        raise CMParseError(f"mode count must be positive, got {n}", lineno, col)
    if "convention" not in fields:
        raise CMParseError("header lacks convention=<tag>", lineno, len(line) + 1)
    col, v = fields["convention"]
    if v != CONVENTION:
        raise CMParseError(f"convention '{v}' does not match '{CONVENTION}'", lineno, col)
    return n


def parse_cm(text):
    """Parse file contents into a :class:`CMFile`; errors carry line and column."""
    lines = text.splitlines()
    n = None
    labels = ()
    rows = []
    last = 0
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if n is not None and body.startswith("labels:"):
                labels = tuple(body[len("labels:") :].split())
                if len(labels) != n:
                    raise CMParseError(f"{len(labels)} labels for {n} modes", lineno, 1)
            continue
        if n is None:
            n = _parse_header(raw, lineno)
            last = lineno
            continue
        if len(rows) == 2 * n:
            raise CMParseError(f"extra data after {2 * n} rows", lineno, 1)
        toks = _tokens(raw)
        if len(toks) != 2 * n:
            col = toks[2 * n][0] if len(toks) > 2 * n else len(raw) + 1
            raise CMParseError(f"expected {2 * n} values, found {len(toks)}", lineno, col)
        row = []
        for col, t in toks:
            try:
                v = float(t)
            except ValueError:
                raise CMParseError(f"not a number: '{t}'", lineno, col) from None
            if not np.isfinite(v):
                raise CMParseError(f"non-finite value '{t}'", lineno, col)
            row.append(v)
        rows.append(row)
        last = lineno
    if n is None:
        raise CMParseError("empty file", 1, 1)
    if len(rows) != 2 * n:
        raise CMParseError(f"expected {2 * n} rows, found {len(rows)}", last + 1, 1)
    g = np.array(rows)
    scale = max(1.0, float(np.max(np.abs(g))))
    bad = np.argwhere(np.abs(g - g.T) > SYMMETRY_RTOL * scale)
    if bad.size:
        i, j = bad[bad[:, 0] > bad[:, 1]][0] if np.any(bad[:, 0] > bad[:, 1]) else bad[0]
        raise CMParseError(f"matrix is not symmetric at ({i + 1}, {j + 1})", _row_line(lines, i), 1)
    return CMFile(g, labels)


def _row_line(lines, row):
    seen = -1
    header = False
    for lineno, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if not header:
            header = True
            continue
        seen += 1
        if seen == row:
            return lineno
    return len(lines)


def read_cm(path):
    with open(path) as fh:
        return parse_cm(fh.read())


def format_cm(gamma, labels=()):
    g = np.asarray(gamma, dtype=np.float64)
    n = g.shape[0] // 2
    out = [f"{MAGIC} {VERSION} N={n} convention={CONVENTION}"]
    if labels:
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} modes")
        out.append("# labels: " + " ".join(labels))
    for row in g:
        out.append(" ".join(format(float(v), ".17g") for v in row))
    return "\n".join(out) + "\n"


def write_cm(path, gamma, labels=()):
    with open(path, "w") as fh:
        fh.write(format_cm(gamma, labels))

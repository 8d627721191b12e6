"""Text formats for matrices and Givens sequences.

Matrix file: first line holds the row count ``d``, followed by ``d`` lines of
whitespace-separated numbers (``d`` per line for a square matrix, one per
line for a vector).

Sequence file::

    # givens-sequence v1
    dim 4
    count 2
    0 3 0.78539816339744828
    1 2 -1.5707963267948966

Angles are written with 17 significant digits, which round-trips every
64-bit float exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .matrix import GivensRotation, GivensSequence

SEQUENCE_MAGIC = "# givens-sequence"
SEQUENCE_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_sequence(seq: GivensSequence) -> str:
    lines = [f"{SEQUENCE_MAGIC} v{SEQUENCE_VERSION}", f"dim {seq.dim}", f"count {len(seq)}"]
    lines += [f"{g.i} {g.j} {_fmt(g.angle)}" for g in seq]
    return "\n".join(lines) + "\n"


def save_sequence(path: str | Path, seq: GivensSequence) -> None:
    Path(path).write_text(format_sequence(seq), encoding="utf-8")


def is_sequence_file(path: str | Path) -> bool:
    with open(path, encoding="utf-8") as fh:
        return fh.readline().startswith(SEQUENCE_MAGIC)


def _header_value(line: str, key: str) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise ValueError(f"expected '{key} <int>' header, got {line!r}")
    return int(parts[1])


def load_sequence(path: str | Path) -> GivensSequence:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 3 or not lines[0].startswith(SEQUENCE_MAGIC):
        raise ValueError(f"{path}: not a Givens sequence file")
    version = lines[0][len(SEQUENCE_MAGIC):].strip()
    if version != f"v{SEQUENCE_VERSION}":
        raise ValueError(f"{path}: unsupported sequence format version {version!r}")
    dim = _header_value(lines[1], "dim")
    count = _header_value(lines[2], "count")
    body = [ln for ln in lines[3:] if ln.strip()]
    if len(body) != count:
        raise ValueError(f"{path}: header announces {count} factors, found {len(body)}")
    factors = []
    for ln in body:
        i, j, angle = ln.split()
        factors.append(GivensRotation(int(i), int(j), float(angle)))
    return GivensSequence(dim, factors)


def format_matrix(m: np.ndarray) -> str:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    lines = [str(m.shape[0])] + [" ".join(_fmt(x) for x in row) for row in m]
    return "\n".join(lines) + "\n"


def save_matrix(path: str | Path, m: np.ndarray) -> None:
    Path(path).write_text(format_matrix(m), encoding="utf-8")


def load_matrix(path: str | Path, square: bool = True) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        d = int(lines[0].strip())
    except ValueError:
        raise ValueError(f"{path}: first line must be the row count") from None
    if d < 1 or len(lines) - 1 != d:
        raise ValueError(f"{path}: expected {d} rows, found {len(lines) - 1}")
    try:
        rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError:
        raise ValueError(f"{path}: non-numeric entry") from None
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: rows have inconsistent lengths")
    m = np.array(rows, dtype=np.float64)
    if square and m.shape[1] != d:
        raise ValueError(f"{path}: expected a {d}x{d} matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{path}: matrix contains NaN or infinite entries")
    return m

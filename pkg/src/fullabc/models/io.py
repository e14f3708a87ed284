"""Plain-text dataset formats.

* univariate samples: one observation per line
* stereological data: first line ``count <N>``, then N sizes, one per line
* toad matrices: delimited rows (days) x columns (toads), ``NA`` for missing
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .stereo import THRESHOLD, StereoData

MISSING = "NA"


def _lines(path):
    return [ln.strip() for ln in Path(path).read_text().splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")]


def read_sample(path) -> np.ndarray:
    return np.array([float(ln) for ln in _lines(path)])


def write_sample(path, y) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.ravel(y)))


def read_stereo(path, threshold: float = THRESHOLD) -> StereoData:
    lines = _lines(path)
    head = lines[0].split()
    if len(head) != 2 or head[0].lower() != "count":
        raise ValueError("stereo file must start with a 'count <N>' header")
    n = int(head[1])
    sizes = np.array([float(ln) for ln in lines[1:]])
    if sizes.size != n:
        raise ValueError(f"header says {n} inclusions, file lists {sizes.size}")
    return StereoData(sizes, threshold)


def write_stereo(path, data: StereoData) -> None:
    body = "".join(f"{float(v)!r}\n" for v in data.sizes)
    Path(path).write_text(f"count {data.count}\n{body}")


def read_toad_matrix(path, delimiter: str | None = None) -> np.ndarray:
    rows = []
    for ln in _lines(path):
        cells = ln.split(delimiter) if delimiter else ln.replace(",", " ").split()
        rows.append([np.nan if c.strip() == MISSING else float(c) for c in cells])
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ValueError("toad matrix rows have differing lengths")
    return np.array(rows)


def write_toad_matrix(path, Y, delimiter: str = ",") -> None:
    lines = [delimiter.join(MISSING if not np.isfinite(v) else repr(float(v)) for v in row)
             for row in np.asarray(Y, float)]
    Path(path).write_text("\n".join(lines) + "\n")

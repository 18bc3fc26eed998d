"""Plain-text site files: a ``d N`` line, then one site per line with an optional weight."""

from __future__ import annotations

import numpy as np


class SiteFileError(ValueError):
    pass


def write_sites(path, Y, w=None, comments=()) -> None:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n, d = Y.shape
    lines = [f"# {c}" for c in comments]
    lines.append(f"{d} {n}")
    cols = Y if w is None else np.hstack([Y, np.asarray(w, dtype=float)[:, None]])
    lines += [" ".join(f"{v:.17g}" for v in row) for row in cols]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sites(path):
    """Return ``(Y, w)``; ``w`` is None when the file has no weight column."""
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise SiteFileError(f"{path}: empty site file")
    try:
        d, n = (int(v) for v in rows[0])
    except ValueError:
        raise SiteFileError(f"{path}: first line must be 'd N'") from None
    body = rows[1:]
    if d < 1 or n < 1 or len(body) != n:
        raise SiteFileError(f"{path}: header says {n} sites of dimension {d}, found {len(body)} rows")
    widths = {len(r) for r in body}
    if len(widths) != 1 or widths.pop() not in (d, d + 1):
        raise SiteFileError(f"{path}: rows must have {d} or {d + 1} columns")
    try:
        data = np.array([[float(v) for v in r] for r in body])
    except ValueError as exc:
        raise SiteFileError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(data)):
        raise SiteFileError(f"{path}: non-finite values")
    return data[:, :d], (data[:, d] if data.shape[1] > d else None)

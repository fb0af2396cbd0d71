"""CSV readers and writers for samples and process evaluations."""

import csv

import numpy as np

from ._validation import InvalidArgumentError, check_sample
from .experiments import fmt_float


def read_sample_csv(path):
    """Read a numeric CSV with one header row (``x1,...,xd``) into an (n, d) array."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise InvalidArgumentError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if not body:
        raise InvalidArgumentError(f"{path}: no observations")
    try:
        data = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise InvalidArgumentError(f"{path}: ragged rows")
    return check_sample(data)


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) for v in row])


def write_sample_csv(path, x, prefix="x"):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    _write(path, [f"{prefix}{j + 1}" for j in range(x.shape[1])], x)


def format_sample_csv(x, prefix="x"):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lines = [",".join(f"{prefix}{j + 1}" for j in range(x.shape[1]))]
    lines += [",".join(fmt_float(v) for v in row) for row in x]
    return "\n".join(lines) + "\n"


def write_process_csv(path, points, values):
    """Rows ``u1,...,ud,value`` in the order given."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float).reshape(-1, 1)
    _write(path, [f"u{j + 1}" for j in range(points.shape[1])] + ["value"],
           np.hstack([points, values]))

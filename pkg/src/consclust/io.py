"""CSV readers/writers and the flat key-value config format."""
import csv

import numpy as np

from .core import BasicPartitionSet, Partition, relabel_compact
from .generate import DataMatrix


class FormatError(OSError):
    """Unreadable or malformed input file (CLI exit code 2)."""


def _rows(path):
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    return rows


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _split_header(rows):
    if all(_is_number(c) for c in rows[0]):
        return None, rows
    return [c.strip() for c in rows[0]], rows[1:]


def _matrix(rows, path, dtype):
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError(f"{path}: ragged rows")
    try:
        return np.array([[dtype(c) for c in r] for r in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"non-integer label {text!r}")
    return int(v)


def read_data(path, label_column=None):
    """Float matrix; ``label_column`` (index or header name) becomes the truth."""
    header, rows = _split_header(_rows(path))
    if not rows:
        raise FormatError(f"{path} has a header but no data")
    X = _matrix(rows, path, float)
    truth = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise FormatError(f"{path}: no column named {label_column!r}")
            j = header.index(label_column)
        else:
            j = int(label_column) % X.shape[1]
        truth = Partition(relabel_compact(np.unique(X[:, j], return_inverse=True)[1]))
        X = np.delete(X, j, axis=1)
    try:
        return DataMatrix(X, truth)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_data(path, X):
    np.savetxt(path, np.asarray(X), delimiter=",", fmt="%.17g")


def read_bps(path):
    _, rows = _split_header(_rows(path))
    M = _matrix(rows, path, _int)
    try:
        return BasicPartitionSet.from_file_matrix(M)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_bps(path, bps):
    np.savetxt(path, bps.to_file_matrix(), delimiter=",", fmt="%d")


def read_partition(path):
    _, rows = _split_header(_rows(path))
    M = _matrix(rows, path, _int)
    if M.shape[1] != 1:
        raise FormatError(f"{path}: expected one label per row")
    try:
        return Partition.from_file_labels(M[:, 0])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_partition(path, partition):
    np.savetxt(path, partition.to_file_labels()[:, None], fmt="%d")


def read_matrix(path):
    _, rows = _split_header(_rows(path))
    return _matrix(rows, path, float)


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment.  Keys use flag spelling."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep or not key.strip():
            raise ValueError(f"{path}:{lineno}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out

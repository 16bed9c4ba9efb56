"""Reading and writing paths, kernels and tables.

Every CSV is comma separated with a header row and LF line endings, and
floats are written with 17 significant digits so that they round-trip.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .core import SamplePath, index_to_bits
from .exceptions import ConfigError, PathFormatError


def fmt(value) -> str:
    """Text form of one cell: floats with 17 significant digits, empty for None or NaN."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if np.isnan(value) else format(float(value), ".17g")
    return str(value)


def write_csv(file, header, rows) -> Path:
    file = Path(file)
    with file.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return file


def read_csv(file):
    """``(header, rows)`` with every cell left as a string."""
    with Path(file).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PathFormatError(f"{file}: empty CSV file")
    return rows[0], rows[1:]


def _to_builtin(obj):
    if isinstance(obj, dict):
        return {str(k): _to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_builtin(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return None if np.isnan(value) else value
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj) -> str:
    """JSON with sorted keys; floats use ``repr``, which round-trips exactly."""
    return json.dumps(_to_builtin(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(file, obj) -> Path:
    file = Path(file)
    file.write_text(dumps_json(obj), encoding="utf-8", newline="\n")
    return file


def read_json(file) -> dict:
    try:
        return json.loads(Path(file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{file}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def sha256_file(file) -> str:
    return hashlib.sha256(Path(file).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# paths


def state_string(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def _parse_state(text: str, line: int, width: int | None) -> np.ndarray:
    if not text or any(ch not in "01" for ch in text):
        raise PathFormatError(f"expected a 0/1 string, got {text[:40]!r}", line)
    if width is not None and len(text) != width:
        raise PathFormatError(f"state has length {len(text)}, expected {width}", line)
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def parse_path(text: str) -> SamplePath:
    """A path from text: one 0/1 string per line, or a JSON array of strings.

    Raises
    ------
    PathFormatError
        Naming the offending line (or array position, 1-based) when a state is malformed.
    """
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PathFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        if not all(isinstance(s, str) for s in items):
            raise PathFormatError("JSON path must be an array of 0/1 strings")
        numbered = list(enumerate(items, start=1))
    else:
        lines = text.split("\n")
        while lines and not lines[-1].strip():
            lines.pop()
        numbered = [(i, line.strip()) for i, line in enumerate(lines, start=1)]
    if not numbered:
        raise PathFormatError("path file holds no states")
    width = None
    rows = []
    for line, item in numbered:
        row = _parse_state(item, line, width)
        width = row.size
        rows.append(row)
    return SamplePath(np.vstack(rows))


def read_path(file) -> SamplePath:
    return parse_path(Path(file).read_text(encoding="utf-8"))


def write_path(file, path: SamplePath, fmt_: str = "text") -> Path:
    """Write one state per line (``"text"``) or a JSON array of strings (``"json"``)."""
    states = [state_string(row) for row in path.states]
    file = Path(file)
    if fmt_ == "text":
        file.write_text("\n".join(states) + "\n", encoding="utf-8", newline="\n")
    elif fmt_ == "json":
        file.write_text(json.dumps(states) + "\n", encoding="utf-8", newline="\n")
    else:
        raise ValueError(f"unknown path format {fmt_!r}")
    return file


def write_hamming_csv(file, path: SamplePath) -> Path:
    return write_csv(file, ["t", "hamming"], enumerate(path.hamming))


def write_latent_csv(file, latent_log: dict) -> Path:
    """``(t, ||Z_t||, theta_t)`` for ``t = 1 .. T``; theta is blank when not applicable."""
    weights = latent_log["hamming"]
    thetas = latent_log.get("theta")
    rows = ((t, w, None if thetas is None else thetas[t - 1]) for t, w in enumerate(weights, start=1))
    return write_csv(file, ["t", "z_hamming", "theta"], rows)


# ---------------------------------------------------------------------------
# kernels and tables


def write_kernel_csv(file, matrix, labels=None) -> Path:
    """Square matrix with a ``from`` column; default labels are 0/1 strings for dense kernels."""
    matrix = np.asarray(matrix)
    size = matrix.shape[0]
    if labels is None:
        n = size.bit_length() - 1
        labels = [state_string(index_to_bits(i, n)) for i in range(size)]
    header = ["from"] + [str(label) for label in labels]
    rows = ([label] + [float(v) for v in row] for label, row in zip(labels, matrix))
    return write_csv(file, header, rows)


def read_kernel_csv(file):
    """``(labels, matrix)`` from :func:`write_kernel_csv` output."""
    header, rows = read_csv(file)
    labels = [r[0] for r in rows]
    matrix = np.array([[float(v) for v in r[1:]] for r in rows])
    if matrix.shape != (len(labels), len(header) - 1):
        raise PathFormatError(f"{file}: kernel CSV is not square")
    return labels, matrix


def write_table(file, columns: dict) -> Path:
    """Columns of equal length as a CSV (grid, value, ...)."""
    names = list(columns)
    data = [np.asarray(columns[k]).reshape(-1) for k in names]
    if len({d.size for d in data}) > 1:
        raise ValueError("columns must have equal length")
    return write_csv(file, names, zip(*data))

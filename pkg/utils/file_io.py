# Atomic file writes and the CSV formats the CLI reads and writes.
# Every output goes to a temp file in the target directory first and is moved
# into place with os.replace, so a failed command never leaves a partial file.

import csv
import io
import os
import tempfile

import numpy as np

from utils.errors import ValidationFailure

MAP_COLUMNS = ("theta", "phi", "value")
GRID_COLUMNS = ("k", "theta", "phi", "weight")


def atomic_write_bytes(path: str, data: bytes) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: str, text: str) -> str:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_map_csv(path: str, theta: np.ndarray, phi: np.ndarray, values: np.ndarray) -> str:
    rows = ((f"{t:.17g}", f"{p:.17g}", f"{v:.17g}") for t, p, v in zip(theta, phi, values))
    return atomic_write_text(path, _csv_text(MAP_COLUMNS, rows))


def read_map_csv(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(theta, phi, value) columns of a map file."""
    if not os.path.exists(path):
        raise ValidationFailure(f"map file not found: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MAP_COLUMNS:
            raise ValidationFailure(f"{path}: expected header {','.join(MAP_COLUMNS)}, got {header}")
        try:
            data = np.array([[float(x) for x in row] for row in reader if row], dtype=float)
        except ValueError as e:
            raise ValidationFailure(f"{path}: {e}") from e
    if data.size == 0:
        raise ValidationFailure(f"{path}: no samples")
    if data.shape[1] != 3:
        raise ValidationFailure(f"{path}: every row needs 3 columns")
    return data[:, 0], data[:, 1], data[:, 2]


def write_grid_csv(path: str, grid) -> str:
    rows = ((k, f"{t:.17g}", f"{p:.17g}", f"{w:.17g}")
            for k, (t, p, w) in enumerate(zip(grid.theta, grid.phi, grid.weights)))
    return atomic_write_text(path, _csv_text(GRID_COLUMNS, rows))


def write_rows_csv(path: str, header: list[str], rows: list[list]) -> str:
    return atomic_write_text(path, _csv_text(header, rows))

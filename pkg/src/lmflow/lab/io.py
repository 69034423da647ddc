"""Series and snapshot files.

Series files are CSV with the header in :data:`SERIES_COLUMNS`; floats carry 17
significant digits so they round-trip exactly.

Snapshots come in two flavours, chosen by file extension:

``.csv``
    one grid row (fixed ``y``) per line, ``nx`` values per row.
``.bin`` / ``.raw``
    eight little-endian int64 header words ``(MAGIC, VERSION, nx, ny, 0, 0, 0, 0)``
    followed by ``nx * ny`` little-endian float64 values in row-major order.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from ..schemes import TimeSeriesRecord

SERIES_COLUMNS = (
    "step",
    "t",
    "energy",
    "modified_energy",
    "eta",
    "branch",
    "gate_value",
    "sn_proxy",
    "newton_iters",
    "g_residual",
    "mass",
)

MAGIC = 0x4C4D464C4F57  # "LMFLOW"
VERSION = 1
RAW_EXTENSIONS = (".bin", ".raw")
_INT_COLUMNS = ("step", "newton_iters")


def fmt(x):
    return format(float(x), ".17g")


def series_row(rec: TimeSeriesRecord):
    row = []
    for name in SERIES_COLUMNS:
        v = getattr(rec, name)
        if name == "branch":
            row.append(v)
        elif name in _INT_COLUMNS:
            row.append(str(int(v)))
        else:
            row.append(fmt(v))
    return row


def _wrap(path, exc):
    return OSError(f"{path}: {exc}")


class SeriesWriter:
    """Streams records to a series CSV file as they arrive."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            self._fh = open(self.path, "w", newline="")
        except OSError as exc:
            raise _wrap(self.path, exc) from exc
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(SERIES_COLUMNS)

    def write(self, rec):
        self._writer.writerow(series_row(rec))

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_series(records, path):
    with SeriesWriter(path) as w:
        for rec in records:
            w.write(rec)


def read_series(path):
    """Read a series CSV back into a list of :class:`TimeSeriesRecord`."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != SERIES_COLUMNS:
                raise ValueError(f"{path}: unexpected series header {reader.fieldnames}")
            out = []
            for row in reader:
                kw = {}
                for k, v in row.items():
                    if k == "branch":
                        kw[k] = v
                    elif k in _INT_COLUMNS:
                        kw[k] = int(v)
                    else:
                        kw[k] = float(v)
                out.append(TimeSeriesRecord(**kw))
            return out
    except OSError as exc:
        raise _wrap(path, exc) from exc


def _is_raw(path):
    ext = Path(path).suffix.lower()
    if ext in RAW_EXTENSIONS:
        return True
    if ext == ".csv":
        return False
    raise ValueError(f"{path}: unknown snapshot extension {ext!r} (use .csv, .bin or .raw)")


def write_snapshot(phi, path):
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2:
        raise ValueError("snapshot must be a 2-D field")
    raw = _is_raw(path)
    try:
        if raw:
            ny, nx = phi.shape
            header = np.array([MAGIC, VERSION, nx, ny, 0, 0, 0, 0], dtype="<i8")
            with open(path, "wb") as fh:
                fh.write(header.tobytes())
                fh.write(np.ascontiguousarray(phi, dtype="<f8").tobytes())
        else:
            with open(path, "w") as fh:
                for row in phi:
                    fh.write(",".join(fmt(v) for v in row))
                    fh.write("\n")
    except OSError as exc:
        raise _wrap(path, exc) from exc


def read_snapshot(path) -> np.ndarray:
    raw = _is_raw(path)
    try:
        if raw:
            with open(path, "rb") as fh:
                buf = fh.read()
            header = np.frombuffer(buf[:64], dtype="<i8")
            if len(header) != 8 or header[0] != MAGIC:
                raise ValueError(f"{path}: not a snapshot file (bad magic)")
            if header[1] != VERSION:
                raise ValueError(f"{path}: unsupported snapshot version {header[1]}")
            nx, ny = int(header[2]), int(header[3])
            data = np.frombuffer(buf[64:], dtype="<f8")
            if data.size != nx * ny:
                raise ValueError(f"{path}: expected {nx * ny} values, found {data.size}")
            return data.reshape(ny, nx).astype(np.float64)
        phi = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        return phi
    except OSError as exc:
        raise _wrap(path, exc) from exc


class DirectorySink:
    """Run sink writing ``series.csv`` and ``snap_<step>.<ext>`` into a directory."""

    def __init__(self, out_dir, snapshot_ext=".csv"):
        self.out_dir = Path(out_dir)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise _wrap(self.out_dir, exc) from exc
        _is_raw("x" + snapshot_ext)
        self.snapshot_ext = snapshot_ext
        self.series_path = self.out_dir / "series.csv"
        self._series = SeriesWriter(self.series_path)
        self.last = None
        self.count = 0

    def record(self, rec):
        self._series.write(rec)
        self.last = rec
        self.count += 1

    def snapshot(self, step, t, phi):
        write_snapshot(phi, self.out_dir / f"snap_{step:06d}{self.snapshot_ext}")

    def close(self):
        self._series.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def default_out_dir(fallback="."):
    """Output directory, overridable with ``LMFLOW_OUT_DIR``."""
    return os.environ.get("LMFLOW_OUT_DIR", fallback)


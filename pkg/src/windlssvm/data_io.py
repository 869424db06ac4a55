"""CSV ingestion/emission and versioned binary model persistence.

Series CSV format: one ``timestamp,value`` pair per line, UTF-8, optional
``timestamp,value`` header. An empty value field marks a missing sample.

Model files are little-endian binary: magic ``LSVM``, format version (u32),
support row/column counts (u64 each), gamma and sigma2 (f64), the support
matrix row-major (f64), the dual coefficients (f64) and the bias (f64).
"""

from __future__ import annotations

import os
import struct
from datetime import datetime, timedelta

import numpy as np

from .lssvm import Hyperparams, LssvmModel
from .pipeline import TimeSeries

MODEL_MAGIC = b"LSVM"
MODEL_VERSION = 1

DEFAULT_START = datetime(2015, 4, 1, 0, 0)
_TIMESTAMP_FMT = "%Y-%m-%dT%H:%M"


class DataError(ValueError):
    """Malformed input file or un-ingestable data."""


def _atomic_write_bytes(path: str, payload: bytes):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def atomic_write_text(path: str, text: str):
    _atomic_write_bytes(path, text.encode("utf-8"))


def load_csv(path: str, cadence_minutes: int = 20) -> TimeSeries:
    """Parse a series CSV; blank value fields become missing samples.

    Raises DataError naming the offending 1-based line for malformed rows,
    and for empty files.
    """
    values = []
    mask = []
    first_content = True
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise DataError(f"{path}: line {lineno}: expected 'timestamp,value', got {line!r}")
        stamp, value = fields[0].strip(), fields[1].strip()
        if first_content:
            first_content = False
            if stamp.lower() == "timestamp":
                continue  # header row
        if stamp == "":
            raise DataError(f"{path}: line {lineno}: empty timestamp field")
        if value == "":
            values.append(np.nan)
            mask.append(True)
            continue
        try:
            v = float(value)
        except ValueError:
            raise DataError(f"{path}: line {lineno}: unparseable value {value!r}") from None
        if not np.isfinite(v):
            raise DataError(f"{path}: line {lineno}: non-finite value {value!r}")
        values.append(v)
        mask.append(False)
    if not values:
        raise DataError(f"{path}: no samples")
    return TimeSeries(np.array(values), cadence_minutes, np.array(mask, dtype=bool))


def write_series_csv(series: TimeSeries, path: str, start: datetime = DEFAULT_START):
    """Emit a series CSV with a header; missing samples get empty value fields."""
    step = timedelta(minutes=series.cadence_minutes)
    rows = ["timestamp,value"]
    for i in range(len(series)):
        stamp = (start + i * step).strftime(_TIMESTAMP_FMT)
        if series.missing_mask[i]:
            rows.append(f"{stamp},")
        else:
            rows.append(f"{stamp},{float(series.values[i])!r}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def save_model(model: LssvmModel, path: str):
    """Write the versioned binary model file (atomic: temp file then rename)."""
    X = np.ascontiguousarray(model.support_inputs, dtype="<f8")
    a = np.ascontiguousarray(model.dual_coeffs, dtype="<f8")
    n, m = X.shape
    head = MODEL_MAGIC + struct.pack(
        "<IQQdd", MODEL_VERSION, n, m, model.hyperparams.gamma, model.hyperparams.sigma2
    )
    payload = head + X.tobytes() + a.tobytes() + struct.pack("<d", model.bias)
    _atomic_write_bytes(path, payload)


def load_model(path: str) -> LssvmModel:
    """Read a model file; corrupt or future-versioned files raise DataError."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != MODEL_MAGIC:
        raise DataError(f"{path}: not a model file (bad magic)")
    head_size = 4 + struct.calcsize("<IQQdd")
    if len(blob) < head_size:
        raise DataError(f"{path}: truncated model file")
    version, n, m, gamma, sigma2 = struct.unpack("<IQQdd", blob[4:head_size])
    if version != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model format version {version}")
    expected = head_size + 8 * (n * m + n + 1)
    if len(blob) != expected:
        raise DataError(f"{path}: corrupt model file: {len(blob)} bytes, expected {expected}")
    body = blob[head_size:]
    X = np.frombuffer(body[: 8 * n * m], dtype="<f8").reshape(n, m)
    a = np.frombuffer(body[8 * n * m : 8 * n * (m + 1)], dtype="<f8")
    (bias,) = struct.unpack("<d", body[8 * n * (m + 1) :])
    try:
        return LssvmModel(X, a, bias, Hyperparams(gamma, sigma2))
    except ValueError as exc:
        raise DataError(f"{path}: corrupt model file: {exc}") from None

"""Matrix file formats, run-report JSON, and key=value config files.

DSM1 binary layout: 4 magic bytes "DSM1", then rows and cols as
unsigned 64-bit little-endian integers, then rows*cols float64
little-endian values in row-major order.  CSV is plain comma-separated
numeric rows with an optional single header line (auto-detected by a
non-numeric first field).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from dsppa.errors import DataError, FormatError
from dsppa.metrics import MetricReport
from dsppa.solvers import SolveReport

MAGIC = b"DSM1"
_HEADER = struct.Struct("<4sQQ")


def write_matrix_dsm1(path: Union[str, Path], matrix: np.ndarray) -> None:
    """Write a matrix (or vector, stored as a column) in DSM1 binary."""
    m = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if np.ndim(matrix) == 1:
        m = m.T
    rows, cols = m.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def read_matrix_dsm1(path: Union[str, Path]) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic bytes {magic!r}, expected {MAGIC!r}")
    expected = _HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for {rows}x{cols}, got {len(data)}")
    m = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise DataError(f"{path}: non-finite values in matrix payload")
    return np.ascontiguousarray(m)


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def read_matrix_csv(path: Union[str, Path]) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    rows: list[list[float]] = []
    start = 0
    if lines and lines[0].strip() and not _is_number(lines[0].split(",")[0].strip()):
        start = 1  # header line
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        tokens = [t.strip() for t in line.split(",")]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise FormatError(f"{path}:{lineno}: ragged row, {len(tokens)} fields vs {width}")
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: no data rows")
    m = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise DataError(f"{path}: non-finite values in CSV data")
    return m


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    """Dispatch on content: DSM1 magic bytes, otherwise CSV."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_matrix_dsm1(path)
    return read_matrix_csv(path)


def write_matrix(path: Union[str, Path], matrix: np.ndarray, fmt: str = "dsm1") -> None:
    fmt = fmt.lower()
    if fmt == "dsm1":
        write_matrix_dsm1(path, matrix)
    elif fmt == "csv":
        m = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        if np.ndim(matrix) == 1:
            m = m.T
        np.savetxt(path, m, delimiter=",", fmt="%.17g")
    else:
        raise FormatError(f"unknown matrix format {fmt!r}")


def report_dict(report: SolveReport, metrics: Optional[MetricReport] = None) -> dict:
    """Flatten a solve report (and optional metrics) to the JSON schema."""
    trace = report.rel_change_trace
    return {
        "algorithm": report.algorithm,
        "lambda": report.lam,
        "mu": report.mu,
        "K": report.k,
        "iterations": report.iterations,
        "converged": report.converged,
        "termination": report.termination,
        "beta_nnz": report.beta_nnz,
        "metrics": metrics.as_dict() if metrics is not None else {},
        "trace_summary": {
            "final_rel_change": trace[-1] if trace else None,
            "final_feasibility": report.feasibility_trace[-1] if report.feasibility_trace else None,
            "length": len(trace),
        },
        "wall_time_s": report.wall_time_s,
        "precompute_time_s": report.precompute_time_s,
    }


def write_report(report: SolveReport, path: Union[str, Path], metrics: Optional[MetricReport] = None) -> None:
    write_json(report_dict(report, metrics), path)


def write_json(obj, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc}") from exc


def read_config(path: Union[str, Path]) -> dict[str, str]:
    """key=value lines; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise FormatError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out

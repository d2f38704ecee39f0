"""File formats: frequency/coupling inputs, projection JSON, trajectory and
rate CSVs, and the binary state archive.

All quantities carry unit-bearing field names (``*_cm1``, ``*_ps``, ``*_K``,
``*_T``).  CSV floats are written with a fixed format so repeated runs are
byte-identical; every output file starts with a comment header recording the
config hash and tool version.
"""

from __future__ import annotations

import hashlib
import json
import struct
from importlib.metadata import PackageNotFoundError, version as _pkg_version

import numpy as np

from .errors import ValidationError
from .projection import ProjectionResult

MAGIC = b"SPPH"
ARCHIVE_VERSION = 1

try:
    TOOL_VERSION = _pkg_version("spinphonon")
except PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0.1.0"

FLOAT_FMT = "{:.12e}"


def config_hash(obj) -> str:
    """Stable short hash of a JSON-serializable configuration object."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def comment_header(cfg_hash: str) -> str:
    return f"# spinphonon v{TOOL_VERSION} config_hash={cfg_hash}\n"


def read_frequencies(path: str) -> np.ndarray:
    """One positive cm^-1 value per line; '#' comments and blanks allowed."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise ValidationError(
                    f"{path} line {lineno}: cannot parse frequency {text!r}"
                ) from None
            if v <= 0:
                raise ValidationError(
                    f"{path} line {lineno}: frequency must be positive, got {v}"
                )
            values.append(v)
    if not values:
        raise ValidationError(f"{path}: no frequencies found")
    return np.array(values)


def read_coupling(path: str, n_modes: int) -> np.ndarray:
    """CSV with exactly 3 rows (x, y, z) of n_modes cm^-1 values."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split(",")
            row = []
            for col, part in enumerate(parts, start=1):
                try:
                    row.append(float(part))
                except ValueError:
                    raise ValidationError(
                        f"{path} line {lineno} column {col}: "
                        f"cannot parse {part.strip()!r}"
                    ) from None
            if len(row) != n_modes:
                raise ValidationError(
                    f"{path} line {lineno}: expected {n_modes} columns, got {len(row)}"
                )
            rows.append(row)
    if len(rows) != 3:
        raise ValidationError(f"{path}: expected 3 rows (x, y, z), got {len(rows)}")
    return np.array(rows)


def projection_to_dict(result: ProjectionResult) -> dict:
    return {
        "primary_freqs_cm1": result.primary_freqs.tolist(),
        "primary_couplings_cm1": result.primary_couplings.tolist(),
        "residual_freqs_cm1": result.residual_freqs.tolist(),
        "bilinear_couplings_cm2": result.bilinear_couplings.tolist(),
        "rotation": result.rotation.tolist(),
    }


def write_projection(result: ProjectionResult, path: str, cfg_hash: str | None = None):
    doc = projection_to_dict(result)
    doc["tool_version"] = TOOL_VERSION
    if cfg_hash is not None:
        doc["config_hash"] = cfg_hash
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_projection(path: str) -> ProjectionResult:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    try:
        P = len(doc["primary_freqs_cm1"])
        Q = len(doc["residual_freqs_cm1"])
        return ProjectionResult(
            primary_freqs=np.array(doc["primary_freqs_cm1"], dtype=float),
            primary_couplings=np.array(doc["primary_couplings_cm1"], dtype=float).reshape(3, P),
            residual_freqs=np.array(doc["residual_freqs_cm1"], dtype=float),
            bilinear_couplings=np.array(doc["bilinear_couplings_cm2"], dtype=float).reshape(P, Q),
            rotation=np.array(doc["rotation"], dtype=float),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: missing field {exc}") from None


def format_float(x: float) -> str:
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return FLOAT_FMT.format(x)


def write_csv(path: str, header_cols, rows, cfg_hash: str):
    with open(path, "w") as fh:
        fh.write(comment_header(cfg_hash))
        fh.write(",".join(header_cols) + "\n")
        for row in rows:
            fh.write(",".join(format_float(x) for x in row) + "\n")


def read_csv(path: str):
    """Read a CSV written by write_csv; returns (column names, 2-D array)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    cols = None
    data = []
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("#") or not line.strip():
            continue
        if cols is None:
            cols = line.split(",")
            continue
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ValidationError(
                f"{path} line {lineno}: expected {len(cols)} columns, got {len(parts)}"
            )
        try:
            data.append([float(p) for p in parts])
        except ValueError:
            raise ValidationError(f"{path} line {lineno}: non-numeric value") from None
    if cols is None:
        raise ValidationError(f"{path}: empty CSV")
    return cols, np.array(data)


def write_state_archive(path: str, times: np.ndarray, states: np.ndarray, stride: int):
    """Flat little-endian binary: magic 'SPPH', u32 version, u32 total_dim,
    u32 n_steps, u32 stride, then per recorded step an f64 timestamp and the
    row-major complex128 matrix."""
    states = np.asarray(states)
    n_rec, d, _ = states.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIII", ARCHIVE_VERSION, d, n_rec, stride))
        for t, rho in zip(times, states):
            fh.write(struct.pack("<d", float(t)))
            fh.write(np.ascontiguousarray(rho, dtype="<c16").tobytes())


def read_state_archive(path: str):
    """Returns (times, states, stride)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValidationError(f"{path}: bad magic {magic!r}")
        version, d, n_rec, stride = struct.unpack("<IIII", fh.read(16))
        if version != ARCHIVE_VERSION:
            raise ValidationError(f"{path}: unsupported archive version {version}")
        times = np.empty(n_rec)
        states = np.empty((n_rec, d, d), dtype=complex)
        for i in range(n_rec):
            raw_t = fh.read(8)
            raw_m = fh.read(16 * d * d)
            if len(raw_t) < 8 or len(raw_m) < 16 * d * d:
                raise ValidationError(f"{path}: truncated archive at step {i}")
            times[i] = struct.unpack("<d", raw_t)[0]
            states[i] = np.frombuffer(raw_m, dtype="<c16").reshape(d, d)
    return times, states, stride

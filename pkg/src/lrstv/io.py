"""Cube files, CSV/JSON exports and PGM band snapshots.

HSI1 cube file layout (all little-endian)::

    offset  size  field
    0       4     magic b"HSI1"
    4       8     m (rows), uint64
    12      8     n (cols), uint64
    20      8     p (bands), uint64
    28      1     dtype tag, 0x01 = float32
    29      4*m*n*p payload, band-major: band 0 row by row, then band 1, ...

Converting from any raw float32 dump only needs this header prepended, with
the data reordered to band-major first (``cube.transpose(2, 0, 1)``).

Every writer goes through a temporary file in the target directory followed
by :func:`os.replace`, so readers never observe a partial file.
"""
import contextlib
import csv
import json
import math
import os
import struct
import tempfile

import numpy as np

__all__ = [
    "MAGIC",
    "HEADER_SIZE",
    "CubeFormatError",
    "read_cube",
    "write_cube",
    "cube_to_bytes",
    "cube_from_bytes",
    "export_band_pgm",
    "read_pgm",
    "export_csv",
    "read_csv",
    "dump_json",
    "write_json",
    "TRACE_COLUMNS",
    "SPECTRA_COLUMNS",
]

MAGIC = b"HSI1"
DTYPE_F32 = 0x01
_HEADER = struct.Struct("<4sQQQB")
HEADER_SIZE = _HEADER.size  # 29

TRACE_COLUMNS = ("iter", "rel_change", "residual_fit", "residual_split", "objective", "mu")
TRACE_TRUTH_COLUMNS = TRACE_COLUMNS + ("psnr", "ssim")
SPECTRA_COLUMNS = ("direction", "domain", "index", "value")


class CubeFormatError(ValueError):
    """Malformed or unsupported HSI1 data."""


@contextlib.contextmanager
def _atomic(path, mode):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    umask = os.umask(0)
    os.umask(umask)
    os.chmod(tmp, 0o666 & ~umask)
    try:
        with os.fdopen(fd, mode, **({"newline": ""} if "b" not in mode else {})) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def cube_to_bytes(cube):
    cube = np.asarray(cube)
    if cube.ndim != 3 or min(cube.shape) < 1:
        raise ValueError(f"expected a non-empty 3-D cube, got shape {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise ValueError("refusing to write a cube with NaN or Inf")
    m, n, p = cube.shape
    payload = np.ascontiguousarray(np.transpose(cube, (2, 0, 1)), dtype="<f4")
    return _HEADER.pack(MAGIC, m, n, p, DTYPE_F32) + payload.tobytes()


def cube_from_bytes(data):
    if len(data) < HEADER_SIZE:
        raise CubeFormatError("truncated header")
    magic, m, n, p, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CubeFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if tag != DTYPE_F32:
        raise CubeFormatError(f"unsupported dtype tag 0x{tag:02x}")
    if min(m, n, p) == 0:
        raise CubeFormatError(f"zero dimension in header: {(m, n, p)}")
    expected = HEADER_SIZE + 4 * m * n * p
    if len(data) != expected:
        kind = "truncated" if len(data) < expected else "oversized"
        raise CubeFormatError(f"{kind} payload: {len(data)} bytes, expected {expected}")
    flat = np.frombuffer(data, dtype="<f4", offset=HEADER_SIZE)
    if not np.all(np.isfinite(flat)):
        raise CubeFormatError("payload contains NaN or Inf")
    return np.transpose(flat.reshape(p, m, n), (1, 2, 0)).astype(np.float64)


def read_cube(path):
    """Read an HSI1 file into a float64 ``(m, n, p)`` array."""
    with open(path, "rb") as fh:
        return cube_from_bytes(fh.read())


def write_cube(path, cube):
    """Write ``cube`` as HSI1 (float32 payload)."""
    data = cube_to_bytes(cube)
    with _atomic(path, "wb") as fh:
        fh.write(data)


def export_band_pgm(cube, band, path):
    """Write one band (0-based) as an 8-bit binary PGM, min-max scaled.

    A constant band maps to 128 everywhere.
    """
    cube = np.asarray(cube, dtype=np.float64)
    if not 0 <= band < cube.shape[2]:
        raise IndexError(f"band {band} out of range [0, {cube.shape[2]})")
    img = cube[:, :, band]
    lo, hi = img.min(), img.max()
    if hi == lo:
        pix = np.full(img.shape, 128, dtype=np.uint8)
    else:
        pix = np.round((img - lo) / (hi - lo) * 255.0).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    with _atomic(path, "wb") as fh:
        fh.write(header + pix.tobytes())


def read_pgm(path):
    """Minimal reader for the PGM files written by :func:`export_band_pgm`."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit binary PGM")
    w, h = (int(v) for v in dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip form, locale independent
    return str(v)


def export_csv(records, path, columns):
    """Write a header row then one line per record.

    ``records`` are mappings or objects with attributes named by ``columns``.
    """
    def get(rec, col):
        return rec[col] if isinstance(rec, dict) else getattr(rec, col)

    with _atomic(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_fmt(get(rec, c)) for c in columns])


def _parse(v):
    if v == "":
        return None
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def read_csv(path):
    """Parse a file written by :func:`export_csv` into a list of dicts."""
    with open(path, newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite(obj):
    # JSON has no inf/nan
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dump_json(obj, fh):
    """Pretty-print ``obj`` to an open text file; inf and nan become null."""
    json.dump(_finite(obj), fh, indent=2, sort_keys=True, default=_json_default)
    fh.write("\n")


def write_json(obj, path):
    with _atomic(path, "w") as fh:
        dump_json(obj, fh)

"""Voxel-grid containers, VGRID file I/O, thresholding, and Otsu binarization.

Volumes are dense 3D arrays in row-major order with x slowest, matching
the on-disk payload layout byte for byte. Grayscale values are float32;
binary volumes are plain booleans. Both containers are immutable after
construction and safe to share across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

_MAGIC = b"VGRID1\n"


class VgridError(Exception):
    """Base class for volume file errors."""


class MalformedHeaderError(VgridError):
    pass


class TruncatedPayloadError(VgridError):
    pass


class UnsupportedDtypeError(VgridError):
    pass


def _frozen(arr: np.ndarray, original) -> np.ndarray:
    # a view so the writeable flag never leaks back to a caller's array
    if arr is original:
        arr = arr.view()
    arr.flags.writeable = False
    return arr


def _check_grid(arr: np.ndarray):
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError("expected a non-empty 3D grid, got shape %r" % (arr.shape,))


@dataclass(frozen=True, eq=False)
class GrayVolume:
    """Dense 3D scalar grid of finite float32 values."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        _check_grid(arr)
        if not np.isfinite(arr).all():
            raise ValueError("voxel values must be finite")
        object.__setattr__(self, "values", _frozen(arr, self.values))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, GrayVolume):
            return NotImplemented
        return self.shape == other.shape and self.values.tobytes() == other.values.tobytes()

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryVolume:
    """Dense 3D boolean grid; True marks foreground."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.dtype != np.bool_:
            if arr.dtype.kind not in "iu" or not np.isin(arr, (0, 1)).all():
                raise ValueError("bits must be boolean or 0/1 valued")
            arr = arr.astype(np.bool_)
        arr = np.ascontiguousarray(arr)
        _check_grid(arr)
        object.__setattr__(self, "bits", _frozen(arr, self.bits))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.bits.shape

    @property
    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryVolume):
            return NotImplemented
        return self.shape == other.shape and self.bits.tobytes() == other.bits.tobytes()

    __hash__ = None


Volume = GrayVolume | BinaryVolume


def save_volume(v: Volume, path) -> None:
    """Write a volume as VGRID v1; load_volume reads it back bit-exactly."""
    if isinstance(v, GrayVolume):
        dtype, payload = "f32", v.values.astype("<f4", copy=False).tobytes()
    elif isinstance(v, BinaryVolume):
        dtype, payload = "u8", v.bits.astype(np.uint8).tobytes()
    else:
        raise TypeError("expected GrayVolume or BinaryVolume, got %r" % type(v).__name__)
    header = {"dtype": dtype, "shape": list(v.shape), "order": "x-slowest"}
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(json.dumps(header, separators=(",", ":")).encode("ascii"))
        f.write(b"\n")
        f.write(payload)


def load_volume(path) -> Volume:
    """Read a VGRID v1 file.

    f32 payloads come back as GrayVolume; u8 payloads must be 0/1
    valued and come back as BinaryVolume. Header problems, payload size
    mismatches, and unknown dtypes raise distinct error types.
    """
    with open(path, "rb") as f:
        blob = f.read()
    if not blob.startswith(_MAGIC):
        raise MalformedHeaderError("missing VGRID1 magic: %s" % path)
    nl = blob.find(b"\n", len(_MAGIC))
    if nl < 0:
        raise MalformedHeaderError("missing header line")
    try:
        header = json.loads(blob[len(_MAGIC):nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedHeaderError("unparseable header: %s" % e) from None
    if not isinstance(header, dict) or set(header) != {"dtype", "shape", "order"}:
        raise MalformedHeaderError("header must carry exactly dtype, shape, order")
    if header["order"] != "x-slowest":
        raise MalformedHeaderError("unknown voxel order %r" % (header["order"],))
    shape = header["shape"]
    if (not isinstance(shape, list) or len(shape) != 3
            or not all(type(n) is int and n >= 1 for n in shape)):
        raise MalformedHeaderError("shape must be three positive integers")
    dtype = header["dtype"]
    if dtype not in ("f32", "u8"):
        raise UnsupportedDtypeError("unsupported dtype %r" % (dtype,))

    payload = memoryview(blob)[nl + 1:]
    count = shape[0] * shape[1] * shape[2]
    need = count * (4 if dtype == "f32" else 1)
    if len(payload) < need:
        raise TruncatedPayloadError("payload holds %d bytes, need %d" % (len(payload), need))
    if len(payload) > need:
        raise VgridError("%d trailing bytes after payload" % (len(payload) - need))

    if dtype == "f32":
        values = np.frombuffer(payload, dtype="<f4").reshape(shape)
        if not np.isfinite(values).all():
            raise VgridError("f32 payload contains non-finite values")
        return GrayVolume(values.astype(np.float32, copy=False))
    raw = np.frombuffer(payload, dtype=np.uint8)
    if (raw > 1).any():
        raise VgridError("u8 payload must be 0/1 valued")
    return BinaryVolume(raw.reshape(shape).astype(np.bool_))


def binarize(v: GrayVolume, tau: float) -> BinaryVolume:
    """Foreground where value >= tau.

    Compared in float64 so an arbitrary real threshold keeps its exact
    meaning against the float32 voxel values.
    """
    t = float(tau)
    if not math.isfinite(t):
        raise ValueError("threshold must be finite")
    return BinaryVolume(v.values.astype(np.float64) >= t)


def sorted_distinct_union(a: GrayVolume, b: GrayVolume) -> np.ndarray:
    """Strictly increasing array of every distinct value in either volume."""
    if a.shape != b.shape:
        raise ValueError("shape mismatch: %r vs %r" % (a.shape, b.shape))
    return np.union1d(a.values, b.values)


def otsu_threshold(v: GrayVolume) -> float:
    """Cut maximizing between-class variance over a 256-bin histogram.

    Bins span the observed [min, max]; candidate cuts sit at the upper
    edge of each bin; ties resolve to the lowest threshold. A constant
    volume returns the constant so the resulting binarization is
    all-true.
    """
    vals = v.values.astype(np.float64)
    vmin = float(vals.min())
    vmax = float(vals.max())
    if vmin == vmax:
        return vmin
    # f64 throughout so bin edges do not inherit f32 rounding
    hist, edges = np.histogram(vals, bins=256, range=(vmin, vmax))
    w = hist.astype(np.float64)
    centers = (edges[:-1] + edges[1:]) / 2.0
    cum_w = np.cumsum(w)
    cum_wm = np.cumsum(w * centers)
    total_w = cum_w[-1]
    total_wm = cum_wm[-1]
    w0 = cum_w
    w1 = total_w - cum_w
    with np.errstate(invalid="ignore", divide="ignore"):
        m0 = cum_wm / w0
        m1 = (total_wm - cum_wm) / w1
        between = w0 * w1 * (m0 - m1) ** 2
    between[w1 == 0] = 0.0
    cut = int(np.argmax(between))  # first max = lowest threshold on ties
    return float(edges[cut + 1])

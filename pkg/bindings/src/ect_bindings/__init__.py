"""Array-facing layer over voxect for training loops.

Callers hand in plain numpy arrays; every array is wrapped in an
ArrayHandle that validates shape, dtype, and contiguity up front, so a
bad tensor fails with a typed exception before any heavy computation
starts. Results are plain scalars and mappings, not graph nodes.

Numerical contract: `total_loss` and `evaluate` produce values that are
bit-exact equal to what `ect loss` / `ect metrics` print for the same
data and configuration, because both go through the same library calls;
nothing here re-rounds or re-orders the arithmetic.

dtype policy: f32 for grayscale data, u8 (values 0/1) for masks. Nothing
is coerced implicitly; pass float64 data and you get a DtypeError telling
you to convert, because a silent f64-to-f32 cast would quietly break the
bit-exact guarantee.

Concurrency: the functions keep no module state, so they are safe to
call from data-loader worker pools. The heavy kernels run inside numpy,
which drops the interpreter lock; worker-thread fan-out inside the loss
follows ECT_THREADS, exactly as in the CLI.
"""
from __future__ import annotations

import numpy as np

import voxect


class BindingError(ValueError):
    """Base for all boundary-validation failures."""


class ShapeError(BindingError):
    pass


class DtypeError(BindingError):
    pass


class ContiguityError(BindingError):
    pass


class ConfigError(BindingError):
    pass


_CONFIG_DEFAULTS = {
    "lambda": 0.01,
    "thresholds": 40,
    "directions": 100,
    "steps": 30,
    "seed": 0,
    "mode": "random",
    "range": "grid",
}


class ArrayHandle:
    """Zero-copy validated view of a dense (nx, ny, nz) buffer.

    Accepts float32 grayscale or uint8 binary data, row-major with x
    slowest. The underlying buffer is referenced, never copied, and the
    validation happens here so downstream code can assume a clean grid.
    """

    __slots__ = ("array", "kind")

    def __init__(self, array):
        if not isinstance(array, np.ndarray):
            raise DtypeError("expected a numpy array, got %s" % type(array).__name__)
        if array.ndim != 3:
            raise ShapeError("expected a 3d grid, got shape %r" % (array.shape,))
        if min(array.shape) < 1:
            raise ShapeError("all grid extents must be at least 1")
        if array.dtype == np.float32:
            self.kind = "f32"
            if not np.isfinite(array).all():
                raise DtypeError("f32 grid contains non-finite values")
        elif array.dtype == np.uint8:
            self.kind = "u8"
            if array.size and int(array.max()) > 1:
                raise DtypeError("u8 grids must contain only 0 and 1")
        else:
            raise DtypeError(
                "dtype %s is not supported; convert explicitly to float32 or "
                "uint8 first" % array.dtype
            )
        if not array.flags.c_contiguous:
            raise ContiguityError(
                "array must be C-contiguous; call np.ascontiguousarray first"
            )
        self.array = array

    @property
    def shape(self):
        return self.array.shape

    def as_gray(self) -> voxect.GrayVolume:
        # the same u8 widening the CLI applies when a mask feeds the loss
        if self.kind == "u8":
            return voxect.GrayVolume(self.array.astype(np.float32))
        return voxect.GrayVolume(self.array)

    def as_binary(self) -> voxect.BinaryVolume:
        if self.kind == "u8":
            return voxect.BinaryVolume(self.array)
        if np.isin(self.array, (np.float32(0.0), np.float32(1.0))).all():
            return voxect.BinaryVolume(self.array == 1.0)
        raise DtypeError("binary input must be u8 or f32 with 0/1 values only")


def _require_same_shape(a: ArrayHandle, b: ArrayHandle):
    if a.shape != b.shape:
        raise ShapeError("shape mismatch: %r vs %r" % (a.shape, b.shape))


def _as_count(value, key: str) -> int:
    if isinstance(value, (bool, float)) or not isinstance(value, (int, np.integer)):
        raise ConfigError("config key %r must be an integer, got %r" % (key, value))
    return int(value)


def _loss_config(config) -> voxect.LossConfig:
    merged = dict(_CONFIG_DEFAULTS)
    if config is not None:
        unknown = set(config) - set(_CONFIG_DEFAULTS)
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        merged.update(config)
    try:
        return voxect.LossConfig(
            topo_weight=float(merged["lambda"]),
            num_thresholds=_as_count(merged["thresholds"], "thresholds"),
            num_directions=_as_count(merged["directions"], "directions"),
            num_steps=_as_count(merged["steps"], "steps"),
            seed=_as_count(merged["seed"], "seed"),
            direction_mode=str(merged["mode"]),
            range_mode=str(merged["range"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def total_loss(pred, gt, config=None) -> dict:
    """Combined loss for a prediction/ground-truth pair of arrays.

    Returns {"topo", "dice", "total", "per_threshold"} with the same
    numbers `ect loss` prints for the same files and flags.
    """
    hp, hg = ArrayHandle(pred), ArrayHandle(gt)
    _require_same_shape(hp, hg)
    cfg = _loss_config(config)
    report = voxect.total_loss(hp.as_gray(), hg.as_gray(), cfg)
    return {
        "topo": report.topo,
        "dice": report.dice,
        "total": report.total,
        "per_threshold": [[float(t), float(d)] for t, d in report.per_threshold],
    }


def topo_loss(pred, gt, config=None) -> dict:
    """Topological term alone; keys "topo" and "per_threshold"."""
    hp, hg = ArrayHandle(pred), ArrayHandle(gt)
    _require_same_shape(hp, hg)
    cfg = _loss_config(config)
    topo, per = voxect.topo_loss(hp.as_gray(), hg.as_gray(), cfg)
    return {"topo": topo, "per_threshold": [[float(t), float(d)] for t, d in per]}


_ECT_KEYS = ("directions", "steps", "seed", "mode", "range")


def compute_ect(volume, config=None) -> dict:
    """Euler curve matrix of one binary array over sampled directions.

    Config keys: directions, steps, seed, mode, range (loss-only keys are
    rejected so typos surface). Returns numpy arrays: "directions" (l, 3)
    f64, "curves" (l, steps+1) int64, "h_mins"/"h_maxs" (l,) f64.
    """
    bits = ArrayHandle(volume).as_binary()
    merged = {k: _CONFIG_DEFAULTS[k] for k in _ECT_KEYS}
    if config is not None:
        unknown = set(config) - set(_ECT_KEYS)
        if unknown:
            raise ConfigError(
                "unknown config keys for compute_ect: %s" % ", ".join(sorted(unknown))
            )
        merged.update(config)
    try:
        dirs = voxect.sample_directions(
            _as_count(merged["directions"], "directions"),
            _as_count(merged["seed"], "seed"),
            str(merged["mode"]),
        )
        matrix = voxect.compute_ect(
            bits, dirs,
            _as_count(merged["steps"], "steps"), str(merged["range"]),
        )
    except BindingError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    return {
        "directions": np.array(matrix.directions.directions),
        "curves": np.array(matrix.curves),
        "h_mins": np.array(matrix.h_mins),
        "h_maxs": np.array(matrix.h_maxs),
    }


def evaluate(pred, gt) -> dict:
    """Otsu-binarized error metrics; matches `ect metrics` bit-exactly."""
    hp, hg = ArrayHandle(pred), ArrayHandle(gt)
    _require_same_shape(hp, hg)
    report = voxect.evaluate(hp.as_gray(), hg.as_binary())
    return report.to_dict()


def load_volume(path) -> np.ndarray:
    """VGRID file to array: f32 for grayscale, u8 (0/1) for binary."""
    v = voxect.load_volume(path)
    if isinstance(v, voxect.GrayVolume):
        return np.asarray(v.values)
    return v.bits.astype(np.uint8)


def save_volume(array, path):
    """Array to VGRID file after the usual handle validation."""
    handle = ArrayHandle(np.asarray(array))
    if handle.kind == "u8":
        voxect.save_volume(handle.as_binary(), path)
    else:
        voxect.save_volume(handle.as_gray(), path)


__all__ = [
    "ArrayHandle",
    "BindingError",
    "ConfigError",
    "ContiguityError",
    "DtypeError",
    "ShapeError",
    "compute_ect",
    "evaluate",
    "load_volume",
    "save_volume",
    "topo_loss",
    "total_loss",
]

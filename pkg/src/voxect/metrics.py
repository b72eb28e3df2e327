"""Overlap, volume, and surface agreement metrics after Otsu binarization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .volume import BinaryVolume, GrayVolume, binarize, otsu_threshold


class UndefinedMetricError(ValueError):
    """Raised when a metric's denominator set is empty."""


@dataclass(frozen=True)
class MetricsReport:
    iou_error: float
    volume_error: float
    surface_error: float
    otsu_threshold_used: float

    def to_dict(self) -> dict:
        return {
            "iou_error": self.iou_error,
            "volume_error": self.volume_error,
            "surface_error": self.surface_error,
            "otsu_threshold_used": self.otsu_threshold_used,
        }


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ValueError("shape mismatch: %r vs %r" % (a.shape, b.shape))


def iou_error(pred: BinaryVolume, gt: BinaryVolume) -> float:
    """1 - |intersection| / |union|; zero exactly when the masks agree."""
    _check_shapes(pred, gt)
    union = int(np.count_nonzero(pred.bits | gt.bits))
    if union == 0:
        raise UndefinedMetricError("both masks are empty")
    inter = int(np.count_nonzero(pred.bits & gt.bits))
    return 1.0 - inter / union


def volume_error(pred: BinaryVolume, gt: BinaryVolume) -> float:
    """|count(pred) - count(gt)| / count(gt), exact integer arithmetic upstairs."""
    _check_shapes(pred, gt)
    vg = gt.foreground_count
    if vg == 0:
        raise UndefinedMetricError("ground truth is empty")
    return abs(pred.foreground_count - vg) / vg


def surface_voxel_count(b: BinaryVolume) -> int:
    """Foreground voxels with at least one background face neighbor.

    The grid boundary counts as background, so voxels on the border are
    always surface.
    """
    bits = b.bits
    padded = np.pad(bits, 1)
    buried = (
        padded[:-2, 1:-1, 1:-1] & padded[2:, 1:-1, 1:-1]
        & padded[1:-1, :-2, 1:-1] & padded[1:-1, 2:, 1:-1]
        & padded[1:-1, 1:-1, :-2] & padded[1:-1, 1:-1, 2:]
    )
    return int(np.count_nonzero(bits & ~buried))


def surface_error(pred: BinaryVolume, gt: BinaryVolume) -> float:
    _check_shapes(pred, gt)
    sg = surface_voxel_count(gt)
    if sg == 0:
        raise UndefinedMetricError("ground truth has no surface voxels")
    return abs(surface_voxel_count(pred) - sg) / sg


def evaluate(pred: GrayVolume, gt: BinaryVolume) -> MetricsReport:
    """Binarize pred at its Otsu threshold, then compare against gt."""
    _check_shapes(pred, gt)
    threshold = otsu_threshold(pred)
    mask = binarize(pred, threshold)
    return MetricsReport(
        iou_error=iou_error(mask, gt),
        volume_error=volume_error(mask, gt),
        surface_error=surface_error(mask, gt),
        otsu_threshold_used=threshold,
    )

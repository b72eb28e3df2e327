"""Multi-threshold topological loss, soft DICE, and their combination.

The topological term walks an evenly spaced selection of the two
volumes' distinct values, binarizes both at each threshold, and
accumulates the squared transform distance between the resulting
complexes, all under one direction set sampled once per call. DICE is
the standard smoothed soft complement. The combined value is
dice + weight * topo with topo already normalized by the threshold
count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ect import (
    GridCurveEngine,
    _binned_curve,
    _height_grid,
    _reduce_rows,
    _row_weights,
    _run_indexed,
    _sample_heights,
    sample_directions,
)
from .volume import GrayVolume, binarize, sorted_distinct_union

_DIRECTION_MODES = ("random", "fibonacci")
_RANGE_MODES = ("grid", "complex")


@dataclass(frozen=True)
class LossConfig:
    """Knobs of the combined loss.

    Defaults are the reference configuration: weight 0.01, 40
    thresholds, 100 directions, 30 curve steps.
    """

    topo_weight: float = 0.01
    num_thresholds: int = 40
    num_directions: int = 100
    num_steps: int = 30
    seed: int = 0
    direction_mode: str = "random"
    range_mode: str = "grid"

    def __post_init__(self):
        if not math.isfinite(self.topo_weight) or self.topo_weight < 0:
            raise ValueError("topo_weight must be finite and non-negative")
        if min(self.num_thresholds, self.num_directions, self.num_steps) < 1:
            raise ValueError("threshold, direction, and step counts must be positive")
        if self.direction_mode not in _DIRECTION_MODES:
            raise ValueError("direction_mode must be one of %r" % (_DIRECTION_MODES,))
        if self.range_mode not in _RANGE_MODES:
            raise ValueError("range_mode must be one of %r" % (_RANGE_MODES,))


@dataclass(frozen=True)
class LossReport:
    """topo is already divided by the threshold count; total = dice + weight * topo."""

    topo: float
    dice: float
    total: float
    per_threshold: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "topo": self.topo,
            "dice": self.dice,
            "total": self.total,
            "per_threshold": [[tau, dsq] for tau, dsq in self.per_threshold],
        }


def select_thresholds(pred: GrayVolume, gt: GrayVolume, n: int) -> np.ndarray:
    """Evenly spaced picks from the sorted distinct union of both volumes.

    With m distinct values, pick k = 1..n maps to the value at 1-based
    index ceil(k*m/n), clamped to [1, m]; the last pick is always the
    maximum value.
    """
    if n < 1:
        raise ValueError("need at least one threshold")
    values = sorted_distinct_union(pred, gt)
    m = len(values)
    idx = np.array([min(m, max(1, -((-k * m) // n))) for k in range(1, n + 1)])
    return values[idx - 1]


def _shared_complex_gap_sq(pa, pb, engine: GridCurveEngine, threads) -> float:
    """Squared gap with per-direction ranges from the union foreground.

    The complex policy adapts the sample range to content; using the
    union of both foregrounds keeps the two curves on one height grid
    (the union is never empty because thresholds come from the values
    actually present).
    """
    gaps = engine._gap_densities(pa.bits, pb.bits)
    union = pa.bits | pb.bits
    n_dir = len(engine.patterns)
    sq = np.empty(n_dir)
    h_mins = np.empty(n_dir)
    h_maxs = np.empty(n_dir)

    def one(i):
        u = engine.dirs.directions[i]
        H = _height_grid(engine.shape, u)
        fg = H[union]
        h_min, h_max = float(fg.min()), float(fg.max())
        heights, _ = _sample_heights(h_min, h_max, engine.steps)
        bins = np.searchsorted(heights, H.ravel(), side="left")
        delta = _binned_curve(gaps[engine.patterns[i]], bins, engine.steps)
        sq[i] = (delta * delta).sum()
        h_mins[i] = h_min
        h_maxs[i] = h_max

    _run_indexed(one, n_dir, threads)
    return _reduce_rows(sq, _row_weights(h_mins, h_maxs, engine.steps)) / n_dir


def topo_loss(pred: GrayVolume, gt: GrayVolume, cfg: LossConfig = LossConfig(),
              threads: int | None = None) -> tuple[float, tuple[tuple[float, float], ...]]:
    """Normalized topological loss plus the per-threshold breakdown.

    One direction set is sampled from cfg.seed and shared by every
    threshold and both volumes, so curves subtract on a common grid.
    """
    if pred.shape != gt.shape:
        raise ValueError("shape mismatch: %r vs %r" % (pred.shape, gt.shape))
    dirs = sample_directions(cfg.num_directions, cfg.seed, cfg.direction_mode)
    taus = select_thresholds(pred, gt, cfg.num_thresholds)
    engine = GridCurveEngine(pred.shape, dirs, cfg.num_steps, threads)
    per = np.empty(len(taus))
    for k, tau in enumerate(taus):
        pa = binarize(pred, float(tau))
        pb = binarize(gt, float(tau))
        if cfg.range_mode == "grid":
            per[k] = engine.curve_gap_sq(pa, pb, threads)
        else:
            per[k] = _shared_complex_gap_sq(pa, pb, engine, threads)
    topo = float(np.sum(per)) / cfg.num_thresholds
    return topo, tuple((float(t), float(d)) for t, d in zip(taus, per))


def dice_loss(pred: GrayVolume, gt: GrayVolume) -> float:
    """Soft DICE complement with 1e-6 smoothing; inputs must lie in [0, 1]."""
    if pred.shape != gt.shape:
        raise ValueError("shape mismatch: %r vs %r" % (pred.shape, gt.shape))
    p = pred.values.astype(np.float64).ravel()
    g = gt.values.astype(np.float64).ravel()
    if p.min() < 0.0 or p.max() > 1.0 or g.min() < 0.0 or g.max() > 1.0:
        raise ValueError("dice inputs must lie in [0, 1]")
    eps = 1e-6
    inter = float(np.sum(p * g))
    return 1.0 - (2.0 * inter + eps) / (float(np.sum(p)) + float(np.sum(g)) + eps)


def total_loss(pred: GrayVolume, gt: GrayVolume, cfg: LossConfig = LossConfig(),
               threads: int | None = None) -> LossReport:
    """DICE plus weighted topological term, with the breakdown attached."""
    topo, per = topo_loss(pred, gt, cfg, threads)
    dice = dice_loss(pred, gt)
    return LossReport(topo=topo, dice=dice, total=dice + cfg.topo_weight * topo,
                      per_threshold=per)

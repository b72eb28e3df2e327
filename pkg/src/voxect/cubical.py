"""Cubical-complex cell semantics over binary volumes.

An i-cube is a set of 2^i face-adjacent foreground voxels spanning i
distinct axes; its anchor is the coordinatewise minimum voxel. Nothing
is materialized on production paths: cells are counted by intersecting
shifted slabs of the bit grid, one pass per axis subset. The explicit
Cube stream exists for oracle tests and debugging.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .volume import BinaryVolume

_AXES = (0, 1, 2)

# all 8 axis subsets, ordered by dimension then lexicographically
AXIS_SUBSETS = tuple(tuple(c) for r in range(4) for c in combinations(_AXES, r))


@dataclass(frozen=True)
class Cube:
    """One cell: its anchor voxel and the set of spanned axes."""

    anchor: tuple[int, int, int]
    axes: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    def voxels(self):
        """The 2^dim constituent voxel coordinates."""
        ranges = [(0, 1) if a in self.axes else (0,) for a in _AXES]
        for dx, dy, dz in product(*ranges):
            yield (self.anchor[0] + dx, self.anchor[1] + dy, self.anchor[2] + dz)


@dataclass(frozen=True)
class CellCounts:
    """Number of cells per dimension, counts[i] = i-cubes."""

    counts: tuple[int, int, int, int]

    def __getitem__(self, i: int) -> int:
        return self.counts[i]

    def __iter__(self):
        return iter(self.counts)


def anchor_mask(bits: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Boolean anchor grid: True where a cube spanning `axes` is fully foreground.

    Shape shrinks by one along each spanned axis.
    """
    m = bits
    for a in axes:
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[a] = slice(None, -1)
        hi[a] = slice(1, None)
        m = m[tuple(lo)] & m[tuple(hi)]
    return m


def enumerate_cells(b: BinaryVolume):
    """Yield every cube of the complex exactly once."""
    for axes in AXIS_SUBSETS:
        anchors = anchor_mask(b.bits, axes)
        for idx in np.argwhere(anchors):
            yield Cube((int(idx[0]), int(idx[1]), int(idx[2])), axes)


def cell_counts(b: BinaryVolume) -> CellCounts:
    """Count cells of every dimension without materializing them."""
    totals = [0, 0, 0, 0]
    for axes in AXIS_SUBSETS:
        totals[len(axes)] += int(np.count_nonzero(anchor_mask(b.bits, axes)))
    return CellCounts(tuple(totals))


def euler_characteristic(c: CellCounts) -> int:
    """Alternating sum over dimensions."""
    return c[0] - c[1] + c[2] - c[3]


def count_incident_cubes(b: BinaryVolume, voxel) -> int:
    """Number of cells of b's complex that contain the given voxel."""
    nx, ny, nz = b.shape
    x, y, z = (int(voxel[0]), int(voxel[1]), int(voxel[2]))
    if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
        raise IndexError("voxel %r outside grid %r" % ((x, y, z), b.shape))
    bits = b.bits
    if not bits[x, y, z]:
        return 0
    shape = (nx, ny, nz)
    total = 0
    for axes in AXIS_SUBSETS:
        for delta in product((0, 1), repeat=len(axes)):
            anchor = [x, y, z]
            for a, d in zip(axes, delta):
                anchor[a] -= d
            if any(anchor[i] < 0 or anchor[i] + (i in axes) >= shape[i] for i in _AXES):
                continue
            if _all_foreground(bits, anchor, axes):
                total += 1
    return total


def _all_foreground(bits, anchor, axes) -> bool:
    ranges = [(0, 1) if a in axes else (0,) for a in _AXES]
    for dx, dy, dz in product(*ranges):
        if not bits[anchor[0] + dx, anchor[1] + dy, anchor[2] + dz]:
            return False
    return True

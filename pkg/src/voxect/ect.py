"""Height filtrations, Euler characteristic curves/transforms, and distances.

The sublevel complex at height h keeps every cube whose vertices all
have height u.v <= h, so a cube enters the filtration at the height of
its maximal corner. Curves are built in one pass: each cube deposits
(-1)^dim at its entry corner's sample bin, and a prefix sum turns the
binned totals into chi per sample height. That is O(cells + steps) per
direction instead of re-walking the complex per height.

Floating-point layout is deliberately rigid so independently computed
paths agree bitwise: vertex heights always evaluate as
(x*u0 + y*u1) + z*u2 in float64, range endpoints are evaluated with the
same expression at sign-selected extreme corners, and sample heights
are clamped so the final sample lands exactly on h_max. Rounding
monotonicity then guarantees the fast path and the explicit oracle see
identical bins.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import SplitMix64
from .cubical import AXIS_SUBSETS, anchor_mask
from .volume import BinaryVolume, _frozen

# ---------------------------------------------------------------------------
# directions


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """A fixed set of unit vectors plus its provenance.

    seed is the PRNG seed for random mode and None for the
    deterministic fibonacci lattice.
    """

    directions: np.ndarray  # (l, 3) float64, unit rows
    seed: int | None
    mode: str

    def __post_init__(self):
        arr = np.array(self.directions, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
            raise ValueError("directions must form a non-empty (l, 3) array")
        norms = np.linalg.norm(arr, axis=1)
        if not np.all(np.abs(norms - 1.0) <= 1e-12):
            raise ValueError("directions must be unit vectors")
        arr.flags.writeable = False
        object.__setattr__(self, "directions", arr)

    def __len__(self) -> int:
        return self.directions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DirectionSet):
            return NotImplemented
        return (self.mode == other.mode and self.seed == other.seed
                and self.directions.shape == other.directions.shape
                and self.directions.tobytes() == other.directions.tobytes())

    __hash__ = None


def sample_directions(l: int, seed: int = 0, mode: str = "random") -> DirectionSet:
    """Draw l unit vectors.

    random mode draws three Box-Muller standard normals per vector from
    a splitmix64 stream and normalizes (near-zero draws are redrawn);
    fibonacci mode returns the spherical Fibonacci lattice, which is
    seed-independent.
    """
    if l < 1:
        raise ValueError("need at least one direction")
    if mode == "random":
        rng = SplitMix64(seed)
        out = np.empty((l, 3), dtype=np.float64)
        for i in range(l):
            out[i] = rng.unit_vector()
        return DirectionSet(out, seed, "random")
    if mode == "fibonacci":
        i = np.arange(l, dtype=np.float64)
        z = 1.0 - (2.0 * i + 1.0) / l
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        phi = (2.0 * math.pi) * (i / golden)
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        out = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
        out /= np.linalg.norm(out, axis=1, keepdims=True)
        return DirectionSet(out, None, "fibonacci")
    raise ValueError("mode must be 'random' or 'fibonacci'")


# ---------------------------------------------------------------------------
# heights


def vertex_height(v, u) -> float:
    """Height of a lattice vertex along u: the dot product u . v.

    Evaluated as (x*u0 + y*u1) + z*u2, the exact association order used
    by the vectorized height tables, so scalar and grid paths agree
    bitwise.
    """
    x, y, z = v
    u0, u1, u2 = float(u[0]), float(u[1]), float(u[2])
    return (float(x) * u0 + float(y) * u1) + float(z) * u2


def _height_grid(shape, u) -> np.ndarray:
    nx, ny, nz = shape
    hx = np.arange(nx, dtype=np.float64) * float(u[0])
    hy = np.arange(ny, dtype=np.float64) * float(u[1])
    hz = np.arange(nz, dtype=np.float64) * float(u[2])
    return (hx[:, None, None] + hy[None, :, None]) + hz[None, None, :]


def _grid_range(shape, u) -> tuple[float, float]:
    # per-axis extremes sit at coordinate 0 or n-1; summing them in the
    # shared association order keeps the endpoints bitwise consistent
    # with (and, by rounding monotonicity, bounding) every table entry
    lo = []
    hi = []
    for n, c in zip(shape, (float(u[0]), float(u[1]), float(u[2]))):
        a = 0.0 * c
        b = float(n - 1) * c
        lo.append(min(a, b))
        hi.append(max(a, b))
    return (lo[0] + lo[1]) + lo[2], (hi[0] + hi[1]) + hi[2]


def _sample_heights(h_min: float, h_max: float, steps: int) -> tuple[np.ndarray, float]:
    dh = (h_max - h_min) / steps
    h = h_min + np.arange(steps + 1, dtype=np.float64) * dh
    np.minimum(h, h_max, out=h)  # guard float overshoot near the top
    h[steps] = h_max             # final sample lands exactly on h_max
    return h, dh


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True, eq=False)
class EulerCurve:
    """Sampled Euler characteristic curve along one direction.

    samples[j] is chi of the sublevel complex at height
    min(h_min + j*step, h_max), with the final sample exactly at h_max.
    """

    h_min: float
    h_max: float
    samples: np.ndarray  # int64, length steps + 1

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.int64)
        object.__setattr__(self, "samples", _frozen(arr, self.samples))

    @property
    def steps(self) -> int:
        return len(self.samples) - 1

    @property
    def step(self) -> float:
        return (self.h_max - self.h_min) / self.steps

    def sample_heights(self) -> np.ndarray:
        return _sample_heights(self.h_min, self.h_max, self.steps)[0]


def _pattern_of(u) -> tuple[bool, bool, bool]:
    # which corner of a cube is maximal along u, per axis
    return (float(u[0]) > 0.0, float(u[1]) > 0.0, float(u[2]) > 0.0)


def _anchor_masks(bits: np.ndarray) -> dict:
    return {axes: anchor_mask(bits, axes) for axes in AXIS_SUBSETS}


def _density_from_masks(masks: dict, pattern, shape) -> np.ndarray:
    """Signed cell density on the vertex grid.

    Every cube deposits (-1)^dim at its maximal corner for the sign
    pattern: offset 1 along spanned axes where the direction component
    is positive. Background vertices hold 0, so downstream code can
    bin the whole grid unconditionally.
    """
    density = np.zeros(shape, dtype=np.int16)
    for axes, anchors in masks.items():
        off = tuple(1 if (i in axes and pattern[i]) else 0 for i in range(3))
        sl = tuple(slice(off[i], off[i] + anchors.shape[i]) for i in range(3))
        if len(axes) % 2:
            density[sl] -= anchors
        else:
            density[sl] += anchors
    return density


def _signed_density(bits: np.ndarray, pattern) -> np.ndarray:
    return _density_from_masks(_anchor_masks(bits), pattern, bits.shape)


def _range_for(b: BinaryVolume, H: np.ndarray, u, range_mode: str) -> tuple[float, float]:
    if range_mode == "grid":
        return _grid_range(b.shape, u)
    if range_mode == "complex":
        if not b.bits.any():
            raise ValueError("complex range is undefined for an empty volume")
        fg = H[b.bits]
        return float(fg.min()), float(fg.max())
    raise ValueError("range_mode must be 'grid' or 'complex'")


def _binned_curve(density_f64: np.ndarray, bins: np.ndarray, steps: int) -> np.ndarray:
    # bincount sums small integers in float64, which is exact; entries
    # past h_max (possible for background vertices in complex mode)
    # land in the overflow bin and are dropped
    hist = np.bincount(bins, weights=density_f64, minlength=steps + 2)
    return np.cumsum(hist[: steps + 1])


def euler_curve(b: BinaryVolume, u, steps: int, range_mode: str = "complex") -> EulerCurve:
    """Sample h -> chi of the sublevel complex along direction u.

    complex mode spans the foreground's own height range; grid mode
    spans the full grid's corner heights regardless of content, which
    makes curves of different volumes on one grid directly comparable.
    """
    _check_steps(steps)
    H = _height_grid(b.shape, u)
    h_min, h_max = _range_for(b, H, u, range_mode)
    heights, _ = _sample_heights(h_min, h_max, steps)
    pattern = _pattern_of(u)
    density = _signed_density(b.bits, pattern).ravel().astype(np.float64)
    bins = np.searchsorted(heights, H.ravel(), side="left")
    samples = _binned_curve(density, bins, steps).astype(np.int64)
    return EulerCurve(h_min, h_max, samples)


def _check_steps(steps: int):
    if steps < 1:
        raise ValueError("need at least one step")


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True, eq=False)
class EctMatrix:
    """One Euler curve per direction, plus shared range metadata."""

    directions: DirectionSet
    curves: np.ndarray   # (l, steps + 1) int64
    h_mins: np.ndarray   # (l,) float64
    h_maxs: np.ndarray   # (l,) float64
    range_mode: str
    grid_shape: tuple[int, int, int]

    def __post_init__(self):
        for name in ("curves", "h_mins", "h_maxs"):
            original = getattr(self, name)
            arr = np.ascontiguousarray(original)
            object.__setattr__(self, name, _frozen(arr, original))

    @property
    def steps(self) -> int:
        return self.curves.shape[1] - 1

    def row(self, i: int) -> EulerCurve:
        return EulerCurve(float(self.h_mins[i]), float(self.h_maxs[i]), self.curves[i])


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else ECT_THREADS, else all cores."""
    if threads is None:
        env = os.environ.get("ECT_THREADS", "").strip()
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def _run_indexed(fn, n: int, threads: int | None):
    """Run fn(0..n-1), possibly in a thread pool.

    Each call writes to its own output slot, so results are identical
    for any worker count.
    """
    workers = min(resolve_threads(threads), n)
    if workers <= 1:
        for i in range(n):
            fn(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, range(n)))


def compute_ect(b: BinaryVolume, dirs: DirectionSet, steps: int,
                range_mode: str = "grid", threads: int | None = None) -> EctMatrix:
    """One Euler curve per direction of dirs.

    Rows are independent; signed densities are shared across directions
    with the same sign pattern.
    """
    _check_steps(steps)
    n_dir = len(dirs)
    masks = _anchor_masks(b.bits)
    densities = {}
    patterns = []
    for i in range(n_dir):
        p = _pattern_of(dirs.directions[i])
        patterns.append(p)
        if p not in densities:
            densities[p] = _density_from_masks(masks, p, b.shape).ravel().astype(np.float64)

    curves = np.empty((n_dir, steps + 1), dtype=np.int64)
    h_mins = np.empty(n_dir)
    h_maxs = np.empty(n_dir)

    def one(i):
        u = dirs.directions[i]
        H = _height_grid(b.shape, u)
        h_min, h_max = _range_for(b, H, u, range_mode)
        heights, _ = _sample_heights(h_min, h_max, steps)
        bins = np.searchsorted(heights, H.ravel(), side="left")
        curves[i] = _binned_curve(densities[patterns[i]], bins, steps).astype(np.int64)
        h_mins[i] = h_min
        h_maxs[i] = h_max

    _run_indexed(one, n_dir, threads)
    return EctMatrix(dirs, curves, h_mins, h_maxs, range_mode, tuple(b.shape))


# ---------------------------------------------------------------------------
# distances


def _row_weights(h_mins: np.ndarray, h_maxs: np.ndarray, steps: int) -> np.ndarray:
    # integration weight per row: the step size, or 1/(steps+1) when the
    # range degenerates to a point so identical rows still cancel and a
    # lone differing sample keeps unit weight
    dh = (h_maxs - h_mins) / steps
    return np.where(dh == 0.0, 1.0 / (steps + 1), dh)


def _reduce_rows(sq_sums: np.ndarray, weights: np.ndarray) -> float:
    # single shared reduction so every caller produces bit-identical sums
    return float(np.sum(sq_sums * weights))


def _check_comparable(A: EctMatrix, B: EctMatrix):
    if A.range_mode != B.range_mode or A.grid_shape != B.grid_shape:
        raise ValueError("matrices were built under different range policies")
    if A.curves.shape != B.curves.shape:
        raise ValueError("direction or step counts differ")
    if A.directions != B.directions:
        raise ValueError("direction sets differ")
    if not (np.array_equal(A.h_mins, B.h_mins) and np.array_equal(A.h_maxs, B.h_maxs)):
        raise ValueError("height ranges differ")


def ect_distance_sq(A: EctMatrix, B: EctMatrix) -> float:
    """Mean over directions of the height-integrated squared curve gap.

    Non-negative, symmetric, and zero exactly when the matrices match.
    """
    _check_comparable(A, B)
    delta = (A.curves - B.curves).astype(np.float64)
    sq = (delta * delta).sum(axis=1)
    weights = _row_weights(A.h_mins, A.h_maxs, A.steps)
    return _reduce_rows(sq, weights) / A.curves.shape[0]


def ect_distance(A: EctMatrix, B: EctMatrix) -> float:
    """Square root of ect_distance_sq; a pseudometric on transforms."""
    return math.sqrt(ect_distance_sq(A, B))


# ---------------------------------------------------------------------------
# shared-grid engine for repeated comparisons


class GridCurveEngine:
    """Reusable per-direction bins on one grid.

    Grid-mode ranges depend only on the grid shape, so the sample
    heights and every vertex's bin index can be computed once and then
    reused across any number of volume pairs (the multi-threshold loss
    reuses them across all thresholds). curve_gap_sq produces floats
    bit-identical to composing compute_ect with ect_distance_sq.
    """

    def __init__(self, shape, dirs: DirectionSet, steps: int, threads: int | None = None):
        _check_steps(steps)
        self.shape = tuple(shape)
        self.dirs = dirs
        self.steps = steps
        n_dir = len(dirs)
        n_vox = shape[0] * shape[1] * shape[2]
        self.patterns = [_pattern_of(dirs.directions[i]) for i in range(n_dir)]
        self.h_mins = np.empty(n_dir)
        self.h_maxs = np.empty(n_dir)
        self._bins = np.empty((n_dir, n_vox), dtype=np.int32)

        def one(i):
            u = dirs.directions[i]
            H = _height_grid(self.shape, u)
            h_min, h_max = _grid_range(self.shape, u)
            heights, _ = _sample_heights(h_min, h_max, steps)
            self._bins[i] = np.searchsorted(heights, H.ravel(), side="left")
            self.h_mins[i] = h_min
            self.h_maxs[i] = h_max

        _run_indexed(one, n_dir, threads)
        self.weights = _row_weights(self.h_mins, self.h_maxs, steps)

    def _gap_densities(self, bits_a, bits_b) -> dict:
        masks_a = _anchor_masks(bits_a)
        masks_b = _anchor_masks(bits_b)
        out = {}
        for p in set(self.patterns):
            da = _density_from_masks(masks_a, p, self.shape)
            db = _density_from_masks(masks_b, p, self.shape)
            out[p] = (da - db).ravel().astype(np.float64)
        return out

    def curve_gap_sq(self, a: BinaryVolume, b: BinaryVolume, threads: int | None = None) -> float:
        """ect_distance_sq of the two volumes' grid-mode transforms."""
        if a.shape != self.shape or b.shape != self.shape:
            raise ValueError("volume shape differs from the engine grid")
        gaps = self._gap_densities(a.bits, b.bits)
        n_dir = len(self.patterns)
        sq = np.empty(n_dir)

        def one(i):
            delta = _binned_curve(gaps[self.patterns[i]], self._bins[i], self.steps)
            sq[i] = (delta * delta).sum()

        _run_indexed(one, n_dir, threads)
        return _reduce_rows(sq, self.weights) / n_dir

"""Evaluation metrics and the built-in verification suites.

Metrics: Otsu-binarize the prediction, then score overlap (IoU error),
relative volume error, and surface-voxel error against the mask.

Verification: randomized checks of the combinatorial facts the loss
rests on. Threshold sequences pin down a grayscale volume once every
distinct value gets a threshold; a voxel meets at most 27 cells; a
k-voxel edit moves a curve distance by at most k * 3^d * n / sqrt(d).
"""
import numpy as np

from voxect import (
    BinaryVolume,
    GrayVolume,
    check_cube_count_bound,
    check_lemma1,
    evaluate,
    run_stability_suite,
)

rng = np.random.default_rng(21)

gt_bits = np.zeros((10, 10, 10), dtype=bool)
gt_bits[2:8, 2:8, 2:8] = True
pred = np.where(gt_bits, 0.75, 0.15).astype(np.float32)
pred += rng.normal(0, 0.1, pred.shape).astype(np.float32)
pred = np.clip(pred, 0.0, 1.0)

report = evaluate(GrayVolume(pred), BinaryVolume(gt_bits))
for key, value in report.to_dict().items():
    print(f"{key:<22} {value:.4f}")

print()

# threshold sequences determine the volume (and mismatches are caught)
a = GrayVolume((rng.integers(0, 4, (4, 4, 4)) / 3).astype(np.float32))
b = GrayVolume((rng.integers(0, 4, (4, 4, 4)) / 3).astype(np.float32))
from voxect import sorted_distinct_union

t = len(sorted_distinct_union(a, b))
print("binarization-sequence equivalence holds:", check_lemma1(a, b, t))

# incidence cap, with equality exactly at interior voxels
print("incidence bound on every grid up to 5^3:",
      all(check_cube_count_bound((i, j, k))
          for i in range(1, 6) for j in range(1, 6) for k in range(1, 6)))

# measured curve distances under k random flips stay below the bound
suite = run_stability_suite(trials=40, grid_shape=(4, 4, 4), k_max=5, seed=9)
print(f"stability: {sum(t.passed for t in suite.trials)}/40 trials under the "
      f"bound, worst slack {suite.worst_slack:.2e}")
print(f"aggregate: 4pi * mean measured {suite.corollary_measured:.3f} "
      f"<= 4pi * mean bound {suite.corollary_bound:.1f}")

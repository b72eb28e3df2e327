"""One evaluation step of the combined loss, as a training loop would run it.

Usage:

    python3 examples/training_step.py pred.vgrid gt.vgrid

The network side is stubbed: `pred` stands in for a model's sigmoid
output on one batch element. The loss value comes back as a plain float
with a per-threshold breakdown for logging.

Gradient caveat: the topological term hard-thresholds both volumes at
every level, and a hard threshold has zero gradient almost everywhere.
This score is therefore a monitoring/selection signal (or a term for
gradient-free outer loops), not something to backpropagate through as
is; a training integration needs a smooth surrogate for the
binarization step.
"""
import sys

import numpy as np

from ect_bindings import evaluate, load_volume, total_loss


def training_step(pred: np.ndarray, gt: np.ndarray, step: int) -> float:
    report = total_loss(pred, gt, config={"lambda": 0.01, "seed": step})
    worst = max(report["per_threshold"], key=lambda td: td[1])
    print(f"step {step}: total={report['total']:.6f} "
          f"dice={report['dice']:.6f} topo={report['topo']:.6f}")
    print(f"  worst threshold tau={worst[0]:.4f} "
          f"contributes distance_sq={worst[1]:.6f}")
    return report["total"]


def main(argv):
    if len(argv) != 3:
        print(__doc__.strip().splitlines()[2].strip(), file=sys.stderr)
        return 2
    pred = load_volume(argv[1])
    gt = load_volume(argv[2])
    if pred.dtype != np.float32:
        pred = pred.astype(np.float32)  # explicit: the boundary never coerces

    total = training_step(pred, gt, step=0)

    # a checkpoint-selection metric pass, same arrays
    metrics = evaluate(pred, gt)
    print("evaluation:", {k: round(v, 6) for k, v in metrics.items()})
    return 0 if np.isfinite(total) else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))

"""Command-line entry point: `ect <subcommand>`.

Every JSON payload carries a `config` block echoing the resolved knobs
(threads excluded, so output is byte-identical at any worker count),
and all numbers serialize at full precision. Exit codes: 0 success,
1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from statistics import median

import numpy as np

from ._rng import SplitMix64, mix_seed
from .cubical import cell_counts, count_incident_cubes, euler_characteristic
from .ect import (
    GridCurveEngine,
    _binned_curve,
    _reduce_rows,
    compute_ect,
    ect_distance_sq,
    euler_curve,
    sample_directions,
)
from .loss import LossConfig, select_thresholds, total_loss
from .metrics import evaluate
from .verify import check_cube_count_bound, check_lemma1, run_stability_suite
from .volume import (
    BinaryVolume,
    GrayVolume,
    VgridError,
    binarize,
    load_volume,
    sorted_distinct_union,
)

_DEFAULTS = {"lambda": 0.01, "thresholds": 40, "directions": 100, "steps": 30,
             "seed": 0, "mode": "random", "range": "grid"}


# ---------------------------------------------------------------------------
# plumbing


def _py(obj):
    """Recursively convert numpy scalars/arrays for json serialization."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    return obj


def _config_echo(args) -> dict:
    return {
        "lambda": float(getattr(args, "topo_weight", _DEFAULTS["lambda"])),
        "thresholds": int(getattr(args, "thresholds", _DEFAULTS["thresholds"])),
        "directions": int(getattr(args, "directions", _DEFAULTS["directions"])),
        "steps": int(getattr(args, "steps", _DEFAULTS["steps"])),
        "seed": int(getattr(args, "seed", _DEFAULTS["seed"])),
        "mode": getattr(args, "mode", _DEFAULTS["mode"]),
        "range": getattr(args, "range_mode", _DEFAULTS["range"]),
    }


def _as_gray(v) -> GrayVolume:
    if isinstance(v, GrayVolume):
        return v
    return GrayVolume(v.bits.astype(np.float32))


def _as_binary(v, what: str) -> BinaryVolume:
    if isinstance(v, BinaryVolume):
        return v
    if np.isin(v.values, (0.0, 1.0)).all():
        return BinaryVolume(v.values == 1.0)
    raise ValueError("%s must be binary (u8, or f32 with 0/1 values only)" % what)


def _parse_direction(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError("direction must be three comma-separated numbers")
    vec = [float(p) for p in parts]
    norm = math.sqrt(vec[0] ** 2 + vec[1] ** 2 + vec[2] ** 2)
    if not math.isfinite(norm) or norm < 1e-12:
        raise ValueError("direction must be a finite nonzero vector")
    return vec[0] / norm, vec[1] / norm, vec[2] / norm


def _emit(payload: dict, rows, output: str):
    if output == "json":
        print(json.dumps(_py(payload), indent=2))
    else:
        for row in rows:
            print(",".join(_csv_cell(c) for c in row))


def _csv_cell(c) -> str:
    if isinstance(c, (float, np.floating)):
        return repr(float(c))
    return str(c)


def _flat_rows(payload: dict):
    rows = [("key", "value")]
    for k, v in payload.items():
        if k == "config" or isinstance(v, (dict, list, tuple)):
            continue
        rows.append((k, v))
    return rows


# ---------------------------------------------------------------------------
# subcommands


def _cmd_cells(args):
    b = _as_binary(load_volume(args.input), "input")
    counts = cell_counts(b)
    payload = {
        "config": _config_echo(args),
        "shape": list(b.shape),
        "counts": list(counts),
        "euler_characteristic": euler_characteristic(counts),
    }
    rows = [("dim", "count")] + [(i, counts[i]) for i in range(4)]
    return payload, rows, 0


def _cmd_curve(args):
    b = _as_binary(load_volume(args.input), "input")
    u = _parse_direction(args.direction)
    curve = euler_curve(b, u, args.steps, args.range_mode)
    payload = {
        "config": _config_echo(args),
        "direction": list(u),
        "h_min": curve.h_min,
        "h_max": curve.h_max,
        "step": curve.step,
        "samples": curve.samples.tolist(),
    }
    heights = curve.sample_heights()
    rows = [("h", "chi")] + [(float(h), int(c)) for h, c in zip(heights, curve.samples)]
    return payload, rows, 0


def _cmd_transform(args):
    b = _as_binary(load_volume(args.input), "input")
    dirs = sample_directions(args.directions, args.seed, args.mode)
    matrix = compute_ect(b, dirs, args.steps, args.range_mode, args.threads)
    payload = {
        "config": _config_echo(args),
        "directions": matrix.directions.directions.tolist(),
        "h_range": [[float(a), float(z)] for a, z in zip(matrix.h_mins, matrix.h_maxs)],
        "curves": matrix.curves.tolist(),
    }
    rows = [("direction", "h", "chi")]
    for i in range(len(dirs)):
        for h, c in zip(matrix.row(i).sample_heights(), matrix.curves[i]):
            rows.append((i, float(h), int(c)))
    return payload, rows, 0


def _cmd_distance(args):
    a = _as_binary(load_volume(args.a), "first input")
    b = _as_binary(load_volume(args.b), "second input")
    if a.shape != b.shape:
        raise ValueError("shape mismatch: %r vs %r" % (a.shape, b.shape))
    dirs = sample_directions(args.directions, args.seed, args.mode)
    A = compute_ect(a, dirs, args.steps, args.range_mode, args.threads)
    B = compute_ect(b, dirs, args.steps, args.range_mode, args.threads)
    dsq = ect_distance_sq(A, B)
    payload = {
        "config": _config_echo(args),
        "distance_sq": dsq,
        "distance": math.sqrt(dsq),
    }
    return payload, _flat_rows(payload), 0


def _cmd_loss(args):
    pred = _as_gray(load_volume(args.pred))
    gt = _as_gray(load_volume(args.gt))
    cfg = LossConfig(
        topo_weight=args.topo_weight,
        num_thresholds=args.thresholds,
        num_directions=args.directions,
        num_steps=args.steps,
        seed=args.seed,
        direction_mode=args.mode,
        range_mode=args.range_mode,
    )
    report = total_loss(pred, gt, cfg, args.threads)
    payload = {"config": _config_echo(args)}
    payload.update(report.to_dict())
    rows = [("tau", "distance_sq")] + [(float(t), float(d)) for t, d in report.per_threshold]
    return payload, rows, 0


def _cmd_metrics(args):
    pred = _as_gray(load_volume(args.pred))
    gt = _as_binary(load_volume(args.gt), "ground truth")
    report = evaluate(pred, gt)
    payload = {"config": _config_echo(args)}
    payload.update(report.to_dict())
    return payload, _flat_rows(payload), 0


# ---------------------------------------------------------------------------
# verify suites


def _lemma1_volume(rng: SplitMix64, shape, levels: int) -> GrayVolume:
    n = shape[0] * shape[1] * shape[2]
    vals = np.fromiter((rng.below(levels) for _ in range(n)), dtype=np.int64)
    return GrayVolume((vals.reshape(shape) / (levels - 1)).astype(np.float32))


def _verify_lemma1(trials: int, seed: int) -> dict:
    shape = (4, 4, 4)
    passes = 0
    for i in range(trials):
        rng = SplitMix64(mix_seed(seed, i))
        i1 = _lemma1_volume(rng, shape, levels=4)
        # every tenth pair is identical so both directions of the
        # equivalence get exercised
        i2 = i1 if i % 10 == 0 else _lemma1_volume(rng, shape, levels=4)
        t = len(sorted_distinct_union(i1, i2))
        passes += bool(check_lemma1(i1, i2, t))
    return {"suite": "lemma1", "trials": trials, "passes": passes,
            "all_pass": passes == trials}


def _verify_lemma2() -> dict:
    checked = 0
    passes = 0
    for nx in range(1, 7):
        for ny in range(1, 7):
            for nz in range(1, 7):
                checked += 1
                passes += bool(check_cube_count_bound((nx, ny, nz)))
    full3 = BinaryVolume(np.ones((5, 5, 5), dtype=np.bool_))
    slab2 = BinaryVolume(np.ones((5, 5, 1), dtype=np.bool_))
    max3 = max(count_incident_cubes(full3, v) for v in np.ndindex(5, 5, 5))
    max2 = max(count_incident_cubes(slab2, v) for v in np.ndindex(5, 5, 1))
    return {"suite": "lemma2", "grids_checked": checked, "passes": passes,
            "max_incident_3d": max3, "max_incident_2d": max2,
            "slack_ratio": max(max3 / 27.0, max2 / 9.0),
            "all_pass": passes == checked and max3 == 27 and max2 == 9}


def _verify_stability(trials: int, seed: int) -> dict:
    groups = []
    all_pass = True
    for shape, count in (((4, 4, 4), (trials + 1) // 2), ((5, 5, 1), trials // 2)):
        if count == 0:
            continue
        report = run_stability_suite(count, shape, k_max=5, seed=seed)
        groups.append({
            "grid": list(shape),
            "trials": count,
            "passes": sum(t.passed for t in report.trials),
            "worst_slack": report.worst_slack,
            "corollary_measured": report.corollary_measured,
            "corollary_bound": report.corollary_bound,
            "corollary_pass": report.corollary_passed,
        })
        all_pass = all_pass and report.all_passed
    return {"suite": "stability", "trials": trials, "groups": groups,
            "worst_slack": max(g["worst_slack"] for g in groups),
            "all_pass": all_pass}


def _cmd_verify(args):
    if args.suite == "lemma1":
        summary = _verify_lemma1(args.trials if args.trials else 1000, args.seed)
    elif args.suite == "lemma2":
        summary = _verify_lemma2()
    else:
        summary = _verify_stability(args.trials if args.trials else 500, args.seed)
    payload = {"config": _config_echo(args)}
    payload.update(summary)
    return payload, _flat_rows(payload), 0 if summary["all_pass"] else 1


# ---------------------------------------------------------------------------
# bench


def _bench_pipeline(pred, gt, cfg: LossConfig, threads):
    """One instrumented loss evaluation; returns seconds per phase."""
    dirs = sample_directions(cfg.num_directions, cfg.seed, cfg.direction_mode)
    taus = select_thresholds(pred, gt, cfg.num_thresholds)
    phases = {}

    t0 = time.perf_counter()
    pairs = [(binarize(pred, float(t)), binarize(gt, float(t))) for t in taus]
    phases["binarize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    engine = GridCurveEngine(pred.shape, dirs, cfg.num_steps, threads)
    curve_time = time.perf_counter() - t0

    cells_time = 0.0
    distance_time = 0.0
    n_dir = len(engine.patterns)
    for pa, pb in pairs:
        t0 = time.perf_counter()
        gaps = engine._gap_densities(pa.bits, pb.bits)
        cells_time += time.perf_counter() - t0

        t0 = time.perf_counter()
        sq = np.empty(n_dir)
        for i in range(n_dir):
            delta = _binned_curve(gaps[engine.patterns[i]], engine._bins[i], cfg.num_steps)
            sq[i] = (delta * delta).sum()
        curve_time += time.perf_counter() - t0

        t0 = time.perf_counter()
        _reduce_rows(sq, engine.weights)
        distance_time += time.perf_counter() - t0

    phases["cells"] = cells_time
    phases["curve"] = curve_time
    phases["distance"] = distance_time
    return phases


def _cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise ValueError("need at least one size")
    repeats = max(5, args.repeats)  # medians need a few runs to mean anything
    cfg = LossConfig(num_thresholds=args.thresholds, num_directions=args.directions,
                     num_steps=args.steps, seed=args.seed, direction_mode=args.mode)
    results = []
    rows = [("shape", "phase", "seconds")]
    for s in sizes:
        shape = (s, s, s)
        rng = np.random.default_rng(mix_seed(args.seed, s))
        pred = GrayVolume(rng.random(shape, dtype=np.float32))
        gt = GrayVolume((rng.random(shape) < 0.5).astype(np.float32))
        runs = [_bench_pipeline(pred, gt, cfg, args.threads) for _ in range(repeats)]
        phases = {k: median(r[k] for r in runs) for k in ("binarize", "cells", "curve", "distance")}
        total = sum(phases.values())
        results.append({"shape": list(shape), "phases": phases, "total": total})
        for k, v in phases.items():
            rows.append(("%dx%dx%d" % shape, k, v))
        rows.append(("%dx%dx%d" % shape, "total", total))
    payload = {"config": _config_echo(args), "repeats": repeats, "results": results}
    return payload, rows, 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p, *, steps=True, sampling=False, range_default=None, threads=False,
                loss_knobs=False, output_default="json"):
    if loss_knobs:
        p.add_argument("--lambda", dest="topo_weight", type=float,
                       default=_DEFAULTS["lambda"], help="topological term weight")
        p.add_argument("--thresholds", type=int, default=_DEFAULTS["thresholds"],
                       help="number of thresholds")
    if sampling:
        p.add_argument("--directions", type=int, default=_DEFAULTS["directions"],
                       help="number of directions")
        p.add_argument("--seed", type=int, default=_DEFAULTS["seed"], help="PRNG seed")
        p.add_argument("--mode", choices=("random", "fibonacci"),
                       default=_DEFAULTS["mode"], help="direction sampling mode")
    if steps:
        p.add_argument("--steps", type=int, default=_DEFAULTS["steps"],
                       help="curve sample steps")
    if range_default is not None:
        p.add_argument("--range", dest="range_mode", choices=("grid", "complex"),
                       default=range_default, help="height range policy")
    if threads:
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: ECT_THREADS or all cores)")
    p.add_argument("--output", choices=("json", "csv"), default=output_default)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ect",
        description="Euler characteristic transforms, topological losses, and "
                    "metrics for voxel volumes (VGRID files)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("cells", help="cell counts per dimension")
    p.add_argument("input")
    _add_common(p, steps=False)
    p.set_defaults(handler=_cmd_cells)

    p = sub.add_parser("curve", help="Euler curve along one direction")
    p.add_argument("--input", required=True)
    p.add_argument("--direction", required=True, help="x,y,z (normalized internally)")
    _add_common(p, range_default="complex", output_default="csv")
    p.set_defaults(handler=_cmd_curve)

    p = sub.add_parser("transform", help="Euler curves for sampled directions")
    p.add_argument("input")
    _add_common(p, sampling=True, range_default="grid", threads=True)
    p.set_defaults(handler=_cmd_transform)

    p = sub.add_parser("distance", help="transform distance between two volumes")
    p.add_argument("a")
    p.add_argument("b")
    _add_common(p, sampling=True, range_default="grid", threads=True)
    p.set_defaults(handler=_cmd_distance)

    p = sub.add_parser("loss", help="combined DICE + topological loss")
    p.add_argument("pred")
    p.add_argument("gt")
    _add_common(p, sampling=True, range_default="grid", threads=True, loss_knobs=True)
    p.set_defaults(handler=_cmd_loss)

    p = sub.add_parser("metrics", help="Otsu-binarized overlap/volume/surface errors")
    p.add_argument("pred")
    p.add_argument("gt")
    _add_common(p, steps=False)
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("verify", help="randomized verification suites")
    p.add_argument("--suite", required=True, choices=("lemma1", "lemma2", "stability"))
    p.add_argument("--trials", type=int, default=0, help="trial count (suite default if 0)")
    p.add_argument("--seed", type=int, default=_DEFAULTS["seed"])
    _add_common(p, steps=False, threads=True)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("bench", help="phase timings across grid sizes")
    p.add_argument("--sizes", default="8,16", help="comma-separated cubic edge lengths")
    p.add_argument("--repeats", type=int, default=5, help="runs per size (min 5)")
    p.add_argument("--thresholds", type=int, default=_DEFAULTS["thresholds"])
    p.add_argument("--directions", type=int, default=_DEFAULTS["directions"])
    p.add_argument("--seed", type=int, default=_DEFAULTS["seed"])
    p.add_argument("--mode", choices=("random", "fibonacci"), default=_DEFAULTS["mode"])
    _add_common(p, threads=True)
    p.set_defaults(handler=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        payload, rows, code = args.handler(args)
    except FileNotFoundError as e:
        parser.print_usage(sys.stderr)
        print("ect: no such file: %s" % (e.filename or e), file=sys.stderr)
        return 2
    except (VgridError, ValueError, IndexError, OSError) as e:
        print(json.dumps({"error": {"type": type(e).__name__, "message": str(e)}}),
              file=sys.stderr)
        return 1
    _emit(payload, rows, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())

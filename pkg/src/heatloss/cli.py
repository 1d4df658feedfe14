"""Command-line surface tying the modules into reproducible pipelines.

Every subcommand validates its inputs before writing anything, exits 0 on
success, and on failure writes a machine-readable JSON object
``{"error": <code>, "message": <text>}`` to stderr with a nonzero exit
status.  Grid outputs use the binary format unless the path ends in
``.csv``.  Randomized subcommands (synth, fit, experiment, grad-check)
require an explicit --seed.  The experiment subcommand fans fits out over
worker threads capped by the HEATLOSS_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import serialization as ser
from .counting import compute_metrics, extract_peaks
from .errors import HeatlossError, SchemaError
from .grid import Grid, read_grid, read_grid_csv, write_grid, write_grid_csv
from .ground_truth import SigmaParams, interpolate_boxes, render_heatmap, render_mask
from .ground_truth import SceneAnnotation
from .losses import (
    GroundTruthBundle,
    LossConfig,
    LossVariant,
    batched_loss_values,
    loss_with_grad,
)
from .synth import FitConfig, InitMode, SynthParams, fit_direct, generate_scene

GRAD_CHECK_TOLERANCE = 1e-6
_EXIT_CODES = {
    "SCHEMA_ERROR": 2,
    "DIM_MISMATCH": 3,
    "VALIDATION_ERROR": 4,
    "INFEASIBLE_PLACEMENT": 5,
    "NON_FINITE_LOSS": 6,
    "GRAD_CHECK_FAILED": 7,
    "IO_ERROR": 8,
}


def _write_grid_auto(grid: Grid, path: str) -> None:
    if path.endswith(".csv"):
        write_grid_csv(grid, path)
    else:
        write_grid(grid, path)


def _read_grid_auto(path: str) -> Grid:
    if path.endswith(".csv"):
        return read_grid_csv(path)
    return read_grid(path)


def _emit(obj: dict) -> None:
    print(json.dumps(obj, indent=2))


def _cmd_render_gt(args: argparse.Namespace) -> int:
    scene = ser.load_scene(args.annotation)
    params = SigmaParams(eta=args.eta, eps_sigma=args.eps_sigma)
    outputs = (args.heatmap_out, args.mask_out, args.binary_out, args.masked_heatmap_out)
    if not any(outputs):
        raise SchemaError("render-gt: provide at least one of --heatmap-out/--mask-out/--binary-out/--masked-heatmap-out")
    mask = render_mask(scene, args.stride)
    if args.heatmap_out or args.masked_heatmap_out:
        heat = render_heatmap(scene, params, args.stride)
        if args.heatmap_out:
            _write_grid_auto(heat, args.heatmap_out)
        if args.masked_heatmap_out:
            _write_grid_auto(Grid(heat.values * mask.values), args.masked_heatmap_out)
    if args.mask_out:
        _write_grid_auto(mask, args.mask_out)
    if args.binary_out:
        _write_grid_auto(mask, args.binary_out)
    return 0


def _cmd_interpolate(args: argparse.Namespace) -> int:
    anchors = ser.load_anchors(args.anchors)
    points = ser.load_points(args.points)
    boxes = interpolate_boxes(anchors, points)
    scene = SceneAnnotation(width=args.width, height=args.height, boxes=tuple(boxes))
    ser.dump_scene(scene, args.out)
    return 0


def _cmd_eval_loss(args: argparse.Namespace) -> int:
    pred = _read_grid_auto(args.pred)
    heat = _read_grid_auto(args.heatmap)
    if args.mask:
        mask = _read_grid_auto(args.mask)
    else:
        mask = Grid((heat.values > 0.0).astype(np.float64))
    cfg = ser.load_loss_config(args.loss_config)
    bundle = GroundTruthBundle(heatmap=heat, mask=mask, n_objects=args.n_objects)
    result = loss_with_grad(pred, bundle, cfg)
    write_grid(result.grad, args.grad_out)
    ser.dump_loss_report(result.value, args.grad_out, args.report_out, result.degenerate_n)
    return 0


def _grad_check_instances(variant: LossVariant, size: int, instances: int, seed: int):
    """Random (pred, bundle, config) triples away from branch kinks."""
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        cfg = LossConfig(
            variant=variant,
            alpha=float(rng.choice([0.25, 0.5, 1.0])),
            beta=float(rng.choice([0.0, 0.5, 1.0, 2.0, 4.0])),
            gamma=float(rng.choice([0.0, 0.5, 1.0, 2.0, 4.0])),
            eps1=float(rng.choice([0.0, 0.5, 1.0])),
        )
        if variant in (LossVariant.FOCAL_SCALAR, LossVariant.ALPHA_FOCAL):
            heat = rng.integers(0, 2, size=(size, size)).astype(np.float64)
            mask = heat
        elif variant in (LossVariant.MASK_FOCAL, LossVariant.MASK_FOCAL_POLY1):
            mask = (rng.random((size, size)) < 0.5).astype(np.float64)
            heat = np.where(mask == 1.0, rng.uniform(0.05, 1.0, (size, size)), 0.0)
            keypoints = (rng.random((size, size)) < 0.1) & (mask == 1.0)
            heat = np.where(keypoints, 1.0, heat)
        else:
            heat = rng.uniform(0.0, 1.0, (size, size))
            keypoints = rng.random((size, size)) < 0.1
            heat = np.where(keypoints, 1.0, heat)
            mask = (heat > 0.0).astype(np.float64)
        pred = rng.uniform(0.05, 0.95, (size, size))
        # keep a margin from the |p - q| kink of the mask variants
        near_kink = np.abs(pred - heat) < 1e-3
        pred = np.where(near_kink, pred + 2e-3, pred)
        bundle = GroundTruthBundle(Grid(heat), Grid(mask), int(rng.integers(1, 6)))
        yield Grid(pred), bundle, cfg


def max_grad_deviation(variant: LossVariant, size: int, instances: int, seed: int, step: float = 1e-6) -> float:
    """Max relative deviation between analytic gradients and central differences."""
    worst = 0.0
    eye = np.eye(size * size).reshape(size * size, size, size)
    for pred, bundle, cfg in _grad_check_instances(variant, size, instances, seed):
        grad = loss_with_grad(pred, bundle, cfg).grad.values.ravel()
        batch = np.concatenate([pred.values + step * eye, pred.values - step * eye])
        values = batched_loss_values(batch, bundle, cfg)
        fd = (values[: size * size] - values[size * size :]) / (2.0 * step)
        deviation = np.abs(grad - fd) / (1.0 + np.abs(grad))
        worst = max(worst, float(deviation.max()))
    return worst


def _cmd_grad_check(args: argparse.Namespace) -> int:
    variant = LossVariant(args.variant)
    worst = max_grad_deviation(variant, args.size, args.instances, args.seed)
    ok = worst <= GRAD_CHECK_TOLERANCE
    _emit(
        {
            "variant": variant.value,
            "instances": args.instances,
            "size": args.size,
            "max_relative_deviation": worst,
            "tolerance": GRAD_CHECK_TOLERANCE,
            "pass": ok,
        }
    )
    if not ok:
        _fail("GRAD_CHECK_FAILED", f"max relative deviation {worst:.3e} exceeds {GRAD_CHECK_TOLERANCE}")
    return 0


def _cmd_peaks(args: argparse.Namespace) -> int:
    heatmap = _read_grid_auto(args.heatmap)
    peaks = extract_peaks(heatmap, window=args.window, threshold=args.threshold)
    ser.dump_peaks(peaks, args.out)
    return 0


def _cmd_eval_count(args: argparse.Namespace) -> int:
    pairs = ser.load_count_pairs(args.counts)
    report = compute_metrics(pairs)
    ser.dump_count_report(report, args.out)
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    params = SynthParams(
        seed=args.seed,
        width=args.width,
        height=args.height,
        n_heads=args.n_heads,
        size_range=(args.min_side, args.max_side),
        min_center_gap=args.min_gap,
    )
    ser.dump_scene(generate_scene(params), args.out)
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    scene = ser.load_scene(args.annotation)
    sigma = SigmaParams(eta=args.eta, eps_sigma=args.eps_sigma)
    cfg = FitConfig(
        loss=ser.load_loss_config(args.loss_config),
        steps=args.steps,
        learning_rate=args.learning_rate,
        init=InitMode(args.init),
        record_every=args.record_every,
        seed=args.seed,
    )
    trace = fit_direct(scene, sigma, cfg)
    if args.trace_out:
        ser.dump_fit_trace_csv(trace, args.trace_out)
    if args.pred_out:
        _write_grid_auto(trace.final_pred, args.pred_out)
    _emit(
        {
            "final_count": trace.final_count,
            "gt_count": trace.gt_count,
            "initial_loss": trace.losses[0][1],
            "final_loss": trace.losses[-1][1],
        }
    )
    return 0


def _worker_count() -> int:
    env = os.environ.get("HEATLOSS_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise SchemaError(f"HEATLOSS_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise SchemaError(f"HEATLOSS_THREADS must be >= 1, got {cap}")
        return cap
    return os.cpu_count() or 1


def _cmd_experiment(args: argparse.Namespace) -> int:
    scenes, variants, sigma, fit_cfg = ser.load_experiment_config(args.config, args.seed)
    jobs = [(vi, si) for vi in range(len(variants)) for si in range(len(scenes))]

    def run(job: tuple[int, int]) -> int:
        vi, si = job
        return fit_direct(scenes[si], sigma, replace(fit_cfg, loss=variants[vi])).final_count

    workers = min(_worker_count(), max(1, len(jobs)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        counts = list(pool.map(run, jobs))  # ordered by input index
    results = []
    for vi, cfg in enumerate(variants):
        per_image = [
            (counts[vi * len(scenes) + si], len(scenes[si].boxes)) for si in range(len(scenes))
        ]
        report = compute_metrics(per_image)
        results.append({"variant": ser.loss_config_to_obj(cfg), "report": ser.count_report_to_obj(report)})
    Path(args.out).write_text(json.dumps(results, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatloss", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render-gt", help="render heatmap/mask/binary grids from an annotation")
    p.add_argument("--annotation", required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--eps-sigma", type=float, default=3.0)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--heatmap-out")
    p.add_argument("--mask-out")
    p.add_argument("--binary-out")
    p.add_argument("--masked-heatmap-out", help="heatmap truncated to box interiors")
    p.set_defaults(func=_cmd_render_gt)

    p = sub.add_parser("interpolate", help="derive box sizes for center points from anchors")
    p.add_argument("--anchors", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_interpolate)

    p = sub.add_parser("eval-loss", help="evaluate a loss on a prediction grid")
    p.add_argument("--pred", required=True)
    p.add_argument("--heatmap", required=True)
    p.add_argument("--mask", help="defaults to (heatmap > 0)")
    p.add_argument("--n-objects", type=int, required=True)
    p.add_argument("--loss-config", required=True)
    p.add_argument("--report-out", required=True)
    p.add_argument("--grad-out", required=True)
    p.set_defaults(func=_cmd_eval_loss)

    p = sub.add_parser("grad-check", help="verify analytic gradients against finite differences")
    p.add_argument("--variant", required=True, choices=[v.value for v in LossVariant])
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_grad_check)

    p = sub.add_parser("peaks", help="extract peaks from a heatmap grid")
    p.add_argument("--heatmap", required=True)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_peaks)

    p = sub.add_parser("eval-count", help="aggregate per-image counts into MAE/RMSE")
    p.add_argument("--counts", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_count)

    p = sub.add_parser("synth", help="generate a deterministic synthetic scene")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--n-heads", type=int, required=True)
    p.add_argument("--min-side", type=float, default=6.0)
    p.add_argument("--max-side", type=float, default=12.0)
    p.add_argument("--min-gap", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("fit", help="fit a free prediction grid to a scene under one loss")
    p.add_argument("--annotation", required=True)
    p.add_argument("--loss-config", required=True)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--eps-sigma", type=float, default=3.0)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--learning-rate", type=float, required=True)
    p.add_argument("--init", default=InitMode.UNIFORM_HALF.value, choices=[m.value for m in InitMode])
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trace-out", help="CSV of step,loss")
    p.add_argument("--pred-out", help="grid dump of the fitted prediction")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("experiment", help="fit scenes under several variants and report counts")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_experiment)

    return parser


class _CliFailure(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


def _fail(code: str, message: str) -> None:
    raise _CliFailure(code, message)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        code = exc.code
        message = str(exc)
    except HeatlossError as exc:
        code = exc.code
        message = str(exc)
    except OSError as exc:
        code = "IO_ERROR"
        message = str(exc)
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return _EXIT_CODES.get(code, 1)


if __name__ == "__main__":
    raise SystemExit(main())

"""Tour of the loss variants and their algebraic relationships.

Evaluates every variant on one random prediction grid, then demonstrates the
identities that knit the family together: on binary ground truth the heatmap
and mask losses reduce to the plain binary focal loss, and the poly-1 forms
collapse to their base variants when the perturbation is switched off.
"""

from dataclasses import replace

import numpy as np

from heatloss import (
    Grid,
    GroundTruthBundle,
    LossConfig,
    LossVariant,
    eval_alpha_focal,
    eval_heatmap_focal,
    eval_mask_focal,
    eval_poly1,
    loss_with_grad,
)

rng = np.random.default_rng(2024)

# binary ground truth: box-interior pixels are 1
binary = rng.integers(0, 2, (12, 12)).astype(float)
binary_gt = GroundTruthBundle(Grid(binary), Grid(binary), n_objects=4)

# smooth ground truth: graded heat inside the mask, zero outside
mask = (rng.random((12, 12)) < 0.4).astype(float)
heat = np.where(mask == 1.0, rng.uniform(0.3, 1.0, (12, 12)), 0.0)
smooth_gt = GroundTruthBundle(Grid(heat), Grid(mask), n_objects=4)

pred = Grid(rng.uniform(0.05, 0.95, (12, 12)))

print("loss values on one random prediction grid (alpha=1, beta=0.5, gamma=2):")
for variant in LossVariant:
    gt = binary_gt if variant in (LossVariant.FOCAL_SCALAR, LossVariant.ALPHA_FOCAL) else smooth_gt
    cfg = LossConfig(variant, alpha=1.0, beta=0.5, gamma=2.0)
    result = loss_with_grad(pred, gt, cfg)
    print(f"  {variant.value:18s} {result.value:10.4f}   |grad|_max {np.abs(result.grad.values).max():8.4f}")

print("\nreduction identities on binary ground truth:")
cfg = LossConfig(LossVariant.ALPHA_FOCAL, alpha=1.0, beta=4.0, gamma=2.0)
base = eval_alpha_focal(pred, binary_gt, cfg).value
via_heatmap = eval_heatmap_focal(pred, binary_gt, cfg).value
via_mask = eval_mask_focal(pred, binary_gt, replace(cfg, beta=0.0)).value
print(f"  binary focal        {base:.12f}")
print(f"  heatmap focal       {via_heatmap:.12f}   (beta irrelevant: every negative has zero heat)")
print(f"  mask focal, beta=0  {via_mask:.12f}")

print("\npoly-1 perturbation strength on the smooth ground truth:")
for eps1 in (0.0, 0.5, 1.0):
    cfg = LossConfig(LossVariant.MASK_FOCAL_POLY1, beta=0.5, gamma=4.0, eps1=eps1)
    value = eval_poly1(pred, smooth_gt, cfg).value
    print(f"  eps1 = {eps1:3.1f} -> {value:.6f}")
base = eval_mask_focal(pred, smooth_gt, LossConfig(LossVariant.MASK_FOCAL, beta=0.5, gamma=4.0)).value
print(f"  base mask focal     {base:.6f}   (equals the eps1 = 0 row exactly)")

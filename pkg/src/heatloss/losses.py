"""The focal-loss family over prediction grids, with analytic gradients.

Six variants share a common shape: a per-pixel term split into a positive
and a negative branch, summed over the grid, and scaled by ``-alpha / N``
(``N`` = object count; the plain scalar variant is an unscaled sum).

* ``FOCAL_SCALAR``  - per-pixel focal loss against binary labels, no scaling.
* ``ALPHA_FOCAL``   - binary feature map supervision: box interiors are
  positives with target 1, everything else a plain negative.
* ``HEATMAP_FOCAL`` - keypoint supervision: only exact-1 pixels are
  positives; negatives are down-weighted by ``(1 - p)^beta`` near keypoints.
* ``MASK_FOCAL``    - mask=1 pixels are graded by the absolute prediction
  error ``dp = |p - q|`` against the heatmap value, weighted by ``p^beta``;
  mask=0 pixels are plain negatives.
* ``POLY1_PIXELWISE`` / ``MASK_FOCAL_POLY1`` - the two variants above with a
  first-order polynomial perturbation scaled by ``eps1``.

Predictions are clamped to ``[clamp, 1 - clamp]`` before any logarithm, and
``dp`` is capped below ``1 - clamp``; gradients are zero where the clamp is
active and use subgradient 0 at the ``dp = 0`` kink.  Natural logarithms
throughout.  Sums use numpy's pairwise reduction over row-major pixels, so
results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .grid import Grid


class LossVariant(Enum):
    FOCAL_SCALAR = "FOCAL_SCALAR"
    ALPHA_FOCAL = "ALPHA_FOCAL"
    HEATMAP_FOCAL = "HEATMAP_FOCAL"
    MASK_FOCAL = "MASK_FOCAL"
    POLY1_PIXELWISE = "POLY1_PIXELWISE"
    MASK_FOCAL_POLY1 = "MASK_FOCAL_POLY1"


_POLY_VARIANTS = (LossVariant.POLY1_PIXELWISE, LossVariant.MASK_FOCAL_POLY1)
_MASK_VARIANTS = (LossVariant.MASK_FOCAL, LossVariant.MASK_FOCAL_POLY1)
_BINARY_GT_VARIANTS = (LossVariant.FOCAL_SCALAR, LossVariant.ALPHA_FOCAL)


@dataclass(frozen=True)
class LossConfig:
    """Variant selector plus every loss hyper-parameter."""

    variant: LossVariant
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 2.0
    eps1: float = 1.0
    clamp: float = 1e-4

    def __post_init__(self) -> None:
        if isinstance(self.variant, str):
            try:
                object.__setattr__(self, "variant", LossVariant(self.variant))
            except ValueError as exc:
                raise ValidationError(f"unknown loss variant {self.variant!r}") from exc
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError(f"alpha must be finite and > 0, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError(f"beta must be finite and >= 0, got {self.beta}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValidationError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not math.isfinite(self.eps1):
            raise ValidationError(f"eps1 must be finite, got {self.eps1}")
        if not (0.0 < self.clamp < 0.5):
            raise ValidationError(f"clamp must lie in (0, 0.5), got {self.clamp}")


@dataclass(frozen=True)
class ScalarSample:
    """A single predicted object probability with its binary class label."""

    p: float
    c: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise ValidationError(f"probability must lie in [0, 1], got {self.p}")
        if self.c not in (0, 1):
            raise ValidationError(f"class label must be 0 or 1, got {self.c}")


@dataclass(frozen=True)
class GroundTruthBundle:
    """Supervision target: heatmap grid, mask grid, and object count."""

    heatmap: Grid
    mask: Grid
    n_objects: int

    def __post_init__(self) -> None:
        if self.heatmap.shape != self.mask.shape:
            raise DimensionMismatchError(
                f"heatmap {self.heatmap.shape} and mask {self.mask.shape} differ in shape"
            )
        if not self.heatmap.is_unit_range():
            raise ValidationError("heatmap values must lie in [0, 1]")
        if not self.mask.is_binary():
            raise ValidationError("mask values must be exactly 0 or 1")
        if self.n_objects < 0:
            raise ValidationError(f"n_objects must be >= 0, got {self.n_objects}")


@dataclass(frozen=True)
class LossResult:
    """Total loss value plus the per-pixel gradient w.r.t. the prediction.

    ``degenerate_n`` is set when the bundle contained zero objects and the
    normalizer fell back to 1.
    """

    value: float
    grad: Grid
    degenerate_n: bool = False


def focal_scalar(sample: ScalarSample, gamma: float, clamp: float = 1e-4) -> float:
    """Focal loss ``-(1 - p_t)^gamma * ln(p_t)`` for one scalar sample.

    ``p_t`` is the predicted probability of the true class; the prediction is
    clamped to ``[clamp, 1 - clamp]`` first.
    """
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ValidationError(f"gamma must be finite and >= 0, got {gamma}")
    if not (0.0 < clamp < 0.5):
        raise ValidationError(f"clamp must lie in (0, 0.5), got {clamp}")
    q = min(max(sample.p, clamp), 1.0 - clamp)
    p_t = q if sample.c == 1 else 1.0 - q
    return -((1.0 - p_t) ** gamma) * math.log(p_t)


# --- shared subexpressions ------------------------------------------------
# Keypoint term (1-q)^g * ln(q) and background term q^g * ln(1-q) appear
# verbatim in several variants; sharing them keeps the algebraic reduction
# identities between variants exact at the bit level.


def _keypoint_term(q: np.ndarray, gamma: float) -> np.ndarray:
    return np.power(1.0 - q, gamma) * np.log(q)


def _keypoint_grad(q: np.ndarray, gamma: float) -> np.ndarray:
    return -gamma * np.power(1.0 - q, gamma - 1.0) * np.log(q) + np.power(1.0 - q, gamma) / q


def _background_term(q: np.ndarray, gamma: float) -> np.ndarray:
    return np.power(q, gamma) * np.log1p(-q)


def _background_grad(q: np.ndarray, gamma: float) -> np.ndarray:
    return gamma * np.power(q, gamma - 1.0) * np.log1p(-q) - np.power(q, gamma) / (1.0 - q)


def _error_delta(q: np.ndarray, heat: np.ndarray, clamp: float) -> np.ndarray:
    return np.minimum(np.abs(heat - q), 1.0 - clamp)


def _graded_pos_grad_core(q: np.ndarray, heat: np.ndarray, dp: np.ndarray, gamma: float) -> np.ndarray:
    # d/d(dp) of dp^g * ln(1-dp), times sign(q - p); sign 0 at the kink
    # doubles as the chosen subgradient and suppresses the 0^negative inf.
    sign = np.sign(q - heat)
    dp_safe = np.where(dp == 0.0, 1.0, dp)
    inner = gamma * np.power(dp_safe, gamma - 1.0) * np.log1p(-dp) - np.power(dp, gamma) / (1.0 - dp)
    return sign * inner


# --- per-variant assemblies -------------------------------------------------


def _terms_binary(q: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    return np.where(pos, _keypoint_term(q, cfg.gamma), _background_term(q, cfg.gamma))


def _grads_binary(q: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    return np.where(pos, _keypoint_grad(q, cfg.gamma), _background_grad(q, cfg.gamma))


def _terms_heatmap(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    neg_w = np.power(1.0 - heat, cfg.beta)
    return np.where(pos, _keypoint_term(q, cfg.gamma), neg_w * _background_term(q, cfg.gamma))


def _grads_heatmap(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    neg_w = np.power(1.0 - heat, cfg.beta)
    return np.where(pos, _keypoint_grad(q, cfg.gamma), neg_w * _background_grad(q, cfg.gamma))


def _terms_poly_pixelwise(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    neg_w = np.power(1.0 - heat, cfg.beta)
    pos_t = _keypoint_term(q, cfg.gamma) - cfg.eps1 * np.power(1.0 - q, cfg.gamma + 1.0)
    neg_t = neg_w * (_background_term(q, cfg.gamma) - cfg.eps1 * np.power(q, cfg.gamma + 1.0))
    return np.where(pos, pos_t, neg_t)


def _grads_poly_pixelwise(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    neg_w = np.power(1.0 - heat, cfg.beta)
    pos_g = _keypoint_grad(q, cfg.gamma) + cfg.eps1 * (cfg.gamma + 1.0) * np.power(1.0 - q, cfg.gamma)
    neg_g = neg_w * (_background_grad(q, cfg.gamma) - cfg.eps1 * (cfg.gamma + 1.0) * np.power(q, cfg.gamma))
    return np.where(pos, pos_g, neg_g)


def _terms_mask(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    dp = _error_delta(q, heat, cfg.clamp)
    graded = np.power(heat, cfg.beta) * np.power(dp, cfg.gamma) * np.log1p(-dp)
    return np.where(pos, graded, _background_term(q, cfg.gamma))


def _grads_mask(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    dp = _error_delta(q, heat, cfg.clamp)
    graded = np.power(heat, cfg.beta) * _graded_pos_grad_core(q, heat, dp, cfg.gamma)
    return np.where(pos, graded, _background_grad(q, cfg.gamma))


def _terms_mask_poly(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    # eps1 interpolates the mask=1 log-term weight between p^beta (eps1=0,
    # the unperturbed mask focal loss) and 1 (eps1=1, the unit-coefficient
    # poly-1 form, whose beta weight sits on the polynomial term instead).
    dp = _error_delta(q, heat, cfg.clamp)
    pb = np.power(heat, cfg.beta)
    log_w = (1.0 - cfg.eps1) * pb + cfg.eps1
    pos_t = log_w * np.power(dp, cfg.gamma) * np.log1p(-dp) - cfg.eps1 * pb * np.power(dp, cfg.gamma + 1.0)
    neg_t = _background_term(q, cfg.gamma) - cfg.eps1 * np.power(q, cfg.gamma + 1.0)
    return np.where(pos, pos_t, neg_t)


def _grads_mask_poly(q: np.ndarray, heat: np.ndarray, pos: np.ndarray, cfg: LossConfig) -> np.ndarray:
    dp = _error_delta(q, heat, cfg.clamp)
    pb = np.power(heat, cfg.beta)
    log_w = (1.0 - cfg.eps1) * pb + cfg.eps1
    sign = np.sign(q - heat)
    pos_g = log_w * _graded_pos_grad_core(q, heat, dp, cfg.gamma) - cfg.eps1 * pb * (
        cfg.gamma + 1.0
    ) * np.power(dp, cfg.gamma) * sign
    neg_g = _background_grad(q, cfg.gamma) - cfg.eps1 * (cfg.gamma + 1.0) * np.power(q, cfg.gamma)
    return np.where(pos, pos_g, neg_g)


_TERMS = {
    LossVariant.FOCAL_SCALAR: lambda q, heat, pos, cfg: _terms_binary(q, pos, cfg),
    LossVariant.ALPHA_FOCAL: lambda q, heat, pos, cfg: _terms_binary(q, pos, cfg),
    LossVariant.HEATMAP_FOCAL: _terms_heatmap,
    LossVariant.POLY1_PIXELWISE: _terms_poly_pixelwise,
    LossVariant.MASK_FOCAL: _terms_mask,
    LossVariant.MASK_FOCAL_POLY1: _terms_mask_poly,
}

_GRADS = {
    LossVariant.FOCAL_SCALAR: lambda q, heat, pos, cfg: _grads_binary(q, pos, cfg),
    LossVariant.ALPHA_FOCAL: lambda q, heat, pos, cfg: _grads_binary(q, pos, cfg),
    LossVariant.HEATMAP_FOCAL: _grads_heatmap,
    LossVariant.POLY1_PIXELWISE: _grads_poly_pixelwise,
    LossVariant.MASK_FOCAL: _grads_mask,
    LossVariant.MASK_FOCAL_POLY1: _grads_mask_poly,
}


def _positive_selector(variant: LossVariant, gt: GroundTruthBundle) -> np.ndarray:
    if variant in _MASK_VARIANTS:
        return gt.mask.values == 1.0
    return gt.heatmap.values == 1.0


def _check_bundle(variant: LossVariant, gt: GroundTruthBundle) -> None:
    if variant in _BINARY_GT_VARIANTS and not gt.heatmap.is_binary():
        raise ValidationError(
            f"{variant.value} requires a binary heatmap ground truth (values in {{0, 1}})"
        )
    if variant in _MASK_VARIANTS:
        support = gt.heatmap.values > 0.0
        if not np.array_equal(gt.mask.values == 1.0, support):
            raise ValidationError(
                f"{variant.value} requires mask=1 exactly where the heatmap is positive"
            )


def _check_pred_shape(pred_shape: tuple[int, ...], gt: GroundTruthBundle) -> None:
    if pred_shape[-2:] != gt.heatmap.shape:
        raise DimensionMismatchError(
            f"prediction shape {pred_shape[-2:]} does not match ground truth {gt.heatmap.shape}"
        )


def _scale(variant: LossVariant, gt: GroundTruthBundle, cfg: LossConfig) -> tuple[float, bool]:
    if variant is LossVariant.FOCAL_SCALAR:
        return -1.0, False
    degenerate = gt.n_objects == 0
    return -cfg.alpha / (1 if degenerate else gt.n_objects), degenerate


def _evaluate(variant: LossVariant, pred: Grid, gt: GroundTruthBundle, cfg: LossConfig) -> LossResult:
    _check_pred_shape(pred.shape, gt)
    if not pred.is_unit_range():
        raise ValidationError("prediction values must lie in [0, 1]")
    _check_bundle(variant, gt)
    raw = pred.values
    q = np.clip(raw, cfg.clamp, 1.0 - cfg.clamp)
    pos = _positive_selector(variant, gt)
    scale, degenerate = _scale(variant, gt, cfg)
    value = scale * float(_TERMS[variant](q, gt.heatmap.values, pos, cfg).sum())
    interior = (raw > cfg.clamp) & (raw < 1.0 - cfg.clamp)
    grad = scale * _GRADS[variant](q, gt.heatmap.values, pos, cfg) * interior
    return LossResult(value=value, grad=Grid(grad), degenerate_n=degenerate)


def eval_alpha_focal(pred: Grid, gt: GroundTruthBundle, cfg: LossConfig) -> LossResult:
    """Binary-feature-map focal loss: positives where the heatmap is 1."""
    return _evaluate(LossVariant.ALPHA_FOCAL, pred, gt, cfg)


def eval_heatmap_focal(pred: Grid, gt: GroundTruthBundle, cfg: LossConfig) -> LossResult:
    """Keypoint focal loss with ``(1 - p)^beta`` down-weighted negatives."""
    return _evaluate(LossVariant.HEATMAP_FOCAL, pred, gt, cfg)


def eval_mask_focal(pred: Grid, gt: GroundTruthBundle, cfg: LossConfig) -> LossResult:
    """Mask focal loss graded by the prediction error ``|p - q|`` inside the mask.

    Requires mask=1 exactly where the heatmap is positive.
    """
    return _evaluate(LossVariant.MASK_FOCAL, pred, gt, cfg)


def eval_poly1(pred: Grid, gt: GroundTruthBundle, cfg: LossConfig) -> LossResult:
    """Poly-1 perturbed variants; ``cfg.variant`` picks the base family.

    With ``eps1 = 0`` the result equals the base variant exactly; with the
    default ``eps1 = 1`` the perturbation enters with unit coefficient.
    """
    if cfg.variant not in _POLY_VARIANTS:
        raise ValidationError(
            f"eval_poly1 requires POLY1_PIXELWISE or MASK_FOCAL_POLY1, got {cfg.variant.value}"
        )
    return _evaluate(cfg.variant, pred, gt, cfg)


def loss_with_grad(pred: Grid, gt: GroundTruthBundle, cfg: LossConfig) -> LossResult:
    """Evaluate ``cfg.variant`` on ``pred`` against ``gt``.

    The gradient is analytic and matches central finite differences of the
    value (step 1e-6) to 1e-6 relative at clamp-interior predictions.
    """
    return _evaluate(cfg.variant, pred, gt, cfg)


def batched_loss_values(preds: np.ndarray, gt: GroundTruthBundle, cfg: LossConfig) -> np.ndarray:
    """Loss values for a stack of prediction arrays of shape ``(..., H, W)``.

    Vectorized value-only path sharing the per-pixel term definitions with
    :func:`loss_with_grad`; used for parameter sweeps and finite-difference
    verification.
    """
    preds = np.asarray(preds, dtype=np.float64)
    _check_pred_shape(preds.shape, gt)
    if preds.min() < 0.0 or preds.max() > 1.0:
        raise ValidationError("prediction values must lie in [0, 1]")
    _check_bundle(cfg.variant, gt)
    q = np.clip(preds, cfg.clamp, 1.0 - cfg.clamp)
    pos = _positive_selector(cfg.variant, gt)
    scale, _ = _scale(cfg.variant, gt, cfg)
    terms = _TERMS[cfg.variant](q, gt.heatmap.values, pos, cfg)
    return scale * terms.sum(axis=(-2, -1))

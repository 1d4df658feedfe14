"""Annotation types and ground-truth synthesis.

Builds the three supervision targets used by the loss family:

* Gaussian heatmap: per-pixel maximum over per-box kernels
  ``exp(-(dx^2 + dy^2) / (2 sigma^2))``, value 1 at box centers.
* Area mask: 1 inside any box rectangle, 0 outside.
* Binary feature map: identical to the area mask (every box-interior pixel
  is a positive with target value 1).

The kernel width sigma grows with the box but is boosted for small boxes:
``sigma = d * (1 + eta * exp(-d)) / eps`` with sensing factor
``d = 2 * min(w, h) + 1``.

Everything here is a pure function returning freshly allocated grids, so
concurrent calls are safe; grid values are immutable once constructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Grid


@dataclass(frozen=True)
class BoxAnnotation:
    """An axis-aligned box given by center (cx, cy) and sides (w, h), in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cx) and math.isfinite(self.cy)):
            raise ValidationError(f"box center must be finite, got ({self.cx}, {self.cy})")
        if not (math.isfinite(self.w) and self.w > 0 and math.isfinite(self.h) and self.h > 0):
            raise ValidationError(f"box sides must be finite and positive, got ({self.w}, {self.h})")


@dataclass(frozen=True)
class SceneAnnotation:
    """Per-image annotation: image dimensions plus head boxes."""

    width: int
    height: int
    boxes: tuple[BoxAnnotation, ...]

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"scene dimensions must be >= 1, got {self.width}x{self.height}")
        object.__setattr__(self, "boxes", tuple(self.boxes))
        for box in self.boxes:
            if not (0 <= box.cx < self.width and 0 <= box.cy < self.height):
                raise ValidationError(
                    f"box center ({box.cx}, {box.cy}) outside [0, {self.width}) x [0, {self.height})"
                )


@dataclass(frozen=True)
class AnchorSet:
    """Manually preset reference boxes used by box-size interpolation."""

    anchors: tuple[BoxAnnotation, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchors", tuple(self.anchors))
        if not self.anchors:
            raise ValidationError("anchor set must contain at least one anchor")
        centers = {(a.cx, a.cy) for a in self.anchors}
        if len(centers) != len(self.anchors):
            raise ValidationError("anchors must not share identical centers")


@dataclass(frozen=True)
class SigmaParams:
    """Kernel-width parameters: small-object boost strength and divisor."""

    eta: float = 1.0
    eps_sigma: float = 3.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ValidationError(f"eta must be finite and >= 0, got {self.eta}")
        if not (math.isfinite(self.eps_sigma) and self.eps_sigma > 0):
            raise ValidationError(f"eps_sigma must be finite and > 0, got {self.eps_sigma}")


def sigma_from_sensing_factor(d: float, params: SigmaParams) -> float:
    """Kernel width for a given sensing factor ``d``.

    The boost ``1 + eta * exp(-d)`` strengthens the response of small boxes
    (small ``d``) and decays to 1 for large ones.
    """
    if not (math.isfinite(d) and d > 0):
        raise ValidationError(f"sensing factor must be finite and > 0, got {d}")
    return d * (1.0 + params.eta * math.exp(-d)) / params.eps_sigma


def compute_sigma(box: BoxAnnotation, params: SigmaParams) -> float:
    """Kernel width for ``box``: sensing factor is ``2 * min(w, h) + 1``."""
    return sigma_from_sensing_factor(2.0 * min(box.w, box.h) + 1.0, params)


def _output_shape(scene: SceneAnnotation, stride: int) -> tuple[int, int]:
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    return -(-scene.height // stride), -(-scene.width // stride)


def render_heatmap(scene: SceneAnnotation, params: SigmaParams, stride: int = 1) -> Grid:
    """Render the Gaussian heatmap of ``scene`` at the given output stride.

    Per box, a kernel centered at the stride-scaled box center with width
    from :func:`compute_sigma` on the stride-scaled box; kernels combine by
    element-wise maximum, so values stay in [0, 1] and equal 1 exactly at
    centers that land on a pixel.  An empty scene yields an all-zero grid.
    """
    out_h, out_w = _output_shape(scene, stride)
    heat = np.zeros((out_h, out_w))
    if not scene.boxes:
        return Grid(heat)
    ys = np.arange(out_h, dtype=np.float64)[:, None]
    xs = np.arange(out_w, dtype=np.float64)[None, :]
    for box in scene.boxes:
        sigma = sigma_from_sensing_factor(2.0 * min(box.w, box.h) / stride + 1.0, params)
        dx = xs - box.cx / stride
        dy = ys - box.cy / stride
        kernel = np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
        np.maximum(heat, kernel, out=heat)
    return Grid(heat)


def render_mask(scene: SceneAnnotation, stride: int = 1) -> Grid:
    """Render the area mask: 1 where a pixel lies in any (closed) box rectangle.

    A pixel (x, y) belongs to a box when its coordinate falls inside
    ``[cx - w/2, cx + w/2] x [cy - h/2, cy + h/2]`` after stride scaling;
    boundary ties are inclusive.
    """
    out_h, out_w = _output_shape(scene, stride)
    mask = np.zeros((out_h, out_w), dtype=bool)
    ys = np.arange(out_h, dtype=np.float64)[:, None]
    xs = np.arange(out_w, dtype=np.float64)[None, :]
    for box in scene.boxes:
        half_w = box.w / (2.0 * stride)
        half_h = box.h / (2.0 * stride)
        inside = (np.abs(xs - box.cx / stride) <= half_w) & (np.abs(ys - box.cy / stride) <= half_h)
        mask |= inside
    return Grid(mask.astype(np.float64))


def render_binary_map(scene: SceneAnnotation, stride: int = 1) -> Grid:
    """Render the binary feature map: identical to :func:`render_mask`."""
    return render_mask(scene, stride)


def interpolate_boxes(
    anchors: AnchorSet, centers: list[tuple[float, float]]
) -> list[BoxAnnotation]:
    """Assign a box size to each query center from its two nearest anchors.

    Sizes are linearly interpolated between the nearest anchor A and the
    second-nearest B with weight ``t = d_A / (d_A + d_B)``, applied to width
    and height independently.  A single anchor, or a query sitting exactly on
    an anchor center, copies that anchor's size.  Distance ties are broken by
    anchor order.
    """
    anchor_xy = np.array([(a.cx, a.cy) for a in anchors.anchors])
    result: list[BoxAnnotation] = []
    for cx, cy in centers:
        if not (math.isfinite(cx) and math.isfinite(cy)):
            raise ValidationError(f"query center must be finite, got ({cx}, {cy})")
        dists = np.hypot(anchor_xy[:, 0] - cx, anchor_xy[:, 1] - cy)
        order = np.lexsort((np.arange(len(dists)), dists))
        near = anchors.anchors[order[0]]
        if len(order) == 1 or dists[order[0]] == 0.0:
            result.append(BoxAnnotation(cx, cy, near.w, near.h))
            continue
        second = anchors.anchors[order[1]]
        d_a, d_b = float(dists[order[0]]), float(dists[order[1]])
        t = d_a / (d_a + d_b)
        result.append(
            BoxAnnotation(
                cx,
                cy,
                near.w + t * (second.w - near.w),
                near.h + t * (second.h - near.h),
            )
        )
    return result

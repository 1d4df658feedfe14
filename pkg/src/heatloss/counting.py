"""Peak-based counting and the MAE/RMSE evaluation metrics.

A detection is a pixel whose value equals the maximum of its
``window x window`` neighborhood (truncated at grid edges) and clears a
confidence threshold; the number of peaks is the predicted count.

All functions are pure; per-image evaluation parallelizes trivially and the
metric aggregation is order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ValidationError
from .grid import Grid
from .ground_truth import SceneAnnotation

DEFAULT_WINDOW = 3
DEFAULT_THRESHOLD = 0.3


@dataclass(frozen=True)
class Peak:
    x: int
    y: int
    score: float


@dataclass(frozen=True)
class PeakSet:
    """Detected peaks, ordered by (y, x)."""

    peaks: tuple[Peak, ...]

    def __len__(self) -> int:
        return len(self.peaks)


@dataclass(frozen=True)
class CountReport:
    """Per-image predicted/true counts with their aggregate MAE and RMSE."""

    per_image: tuple[tuple[int, int], ...]
    mae: float
    rmse: float
    m: int


def _has_equal_neighbor(values: np.ndarray, subset: np.ndarray) -> bool:
    """True when any ``subset`` pixel shares its value with an 8-neighbor."""
    v, s = values, subset
    pairs = (
        (v[:, :-1], v[:, 1:], s[:, :-1], s[:, 1:]),
        (v[:-1, :], v[1:, :], s[:-1, :], s[1:, :]),
        (v[:-1, :-1], v[1:, 1:], s[:-1, :-1], s[1:, 1:]),
        (v[:-1, 1:], v[1:, :-1], s[:-1, 1:], s[1:, :-1]),
    )
    return any(((a == b) & (sa | sb)).any() for a, b, sa, sb in pairs)


def _plateau_roots(values: np.ndarray) -> np.ndarray:
    """Label maximal 8-connected regions of equal value via union-find."""
    h, w = values.shape
    parent = list(range(h * w))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for y in range(h):
        for x in range(w):
            i = y * w + x
            if x + 1 < w and values[y, x] == values[y, x + 1]:
                union(i, i + 1)
            if y + 1 < h:
                if values[y, x] == values[y + 1, x]:
                    union(i, i + w)
                if x + 1 < w and values[y, x] == values[y + 1, x + 1]:
                    union(i, i + w + 1)
                if x - 1 >= 0 and values[y, x] == values[y + 1, x - 1]:
                    union(i, i + w - 1)
    return np.array([find(i) for i in range(h * w)])


def extract_peaks(heatmap: Grid, window: int = DEFAULT_WINDOW, threshold: float = DEFAULT_THRESHOLD) -> PeakSet:
    """Select pixels that are neighborhood maxima at or above ``threshold``.

    Edge neighborhoods are truncated.  When a plateau of equal values
    qualifies, only its lexicographically smallest (y, x) pixel is kept, with
    plateaus taken as maximal 8-connected equal-value regions.
    """
    if window < 3 or window % 2 == 0:
        raise ValidationError(f"window must be odd and >= 3, got {window}")
    if not (0.0 < threshold < 1.0):
        raise ValidationError(f"threshold must lie in (0, 1), got {threshold}")
    if not heatmap.is_unit_range():
        raise ValidationError("heatmap values must lie in [0, 1]")

    values = heatmap.values
    neighborhood_max = ndimage.maximum_filter(values, size=window, mode="constant", cval=-np.inf)
    candidates = (values == neighborhood_max) & (values >= threshold)
    if not candidates.any():
        return PeakSet(())

    flat_idx = np.flatnonzero(candidates.ravel())  # ascending == (y, x) lexicographic
    if _has_equal_neighbor(values, candidates):
        roots = _plateau_roots(values)
        kept: dict[int, int] = {}
        for i in flat_idx:
            root = int(roots[i])
            if root not in kept:
                kept[root] = int(i)
        flat_idx = sorted(kept.values())
    h, w = values.shape
    peaks = tuple(
        Peak(x=int(i % w), y=int(i // w), score=float(values.flat[i])) for i in flat_idx
    )
    return PeakSet(peaks)


def count_image(heatmap: Grid, window: int = DEFAULT_WINDOW, threshold: float = DEFAULT_THRESHOLD) -> int:
    """Predicted object count: the number of extracted peaks."""
    return len(extract_peaks(heatmap, window, threshold))


def compute_metrics(per_image: list[tuple[int, int]]) -> CountReport:
    """MAE and RMSE of predicted vs. true counts over a list of images."""
    if not per_image:
        raise ValidationError("per-image count list must be non-empty")
    pairs = tuple((int(p), int(t)) for p, t in per_image)
    errors = np.array([p - t for p, t in pairs], dtype=np.float64)
    mae = float(np.mean(np.abs(errors)))
    rmse = float(math.sqrt(np.mean(errors * errors)))
    return CountReport(per_image=pairs, mae=mae, rmse=rmse, m=len(pairs))


def match_localizations(
    peaks: PeakSet, scene: SceneAnnotation, radius_factor: float = 0.5
) -> tuple[int, int, int]:
    """Greedy nearest-first matching of peaks to annotated box centers.

    A peak may match a box only within ``radius_factor * min(w, h)`` of that
    box's center; the globally closest unmatched pair is taken repeatedly.
    Returns ``(matched, missed, spurious)`` with ``matched + missed`` equal to
    the box count and ``matched + spurious`` equal to the peak count.
    """
    if not (math.isfinite(radius_factor) and radius_factor > 0):
        raise ValidationError(f"radius_factor must be > 0, got {radius_factor}")
    candidates = []
    for bi, box in enumerate(scene.boxes):
        radius = radius_factor * min(box.w, box.h)
        for pi, peak in enumerate(peaks.peaks):
            dist = math.hypot(peak.x - box.cx, peak.y - box.cy)
            if dist <= radius:
                candidates.append((dist, bi, pi))
    candidates.sort()
    box_taken = [False] * len(scene.boxes)
    peak_taken = [False] * len(peaks.peaks)
    matched = 0
    for _, bi, pi in candidates:
        if not box_taken[bi] and not peak_taken[pi]:
            box_taken[bi] = True
            peak_taken[pi] = True
            matched += 1
    return matched, len(scene.boxes) - matched, len(peaks.peaks) - matched

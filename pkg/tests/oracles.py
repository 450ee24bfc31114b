"""Independent reference implementations used only to check the library.

These deliberately use different algorithms from the package: rasterized
pixel counting for IoU, exact step-curve envelope area for AP, and
exhaustive search for matching.
"""

from __future__ import annotations

import numpy as np


def raster_iou(a, b, grid: int = 1) -> float:
    """IoU by rasterizing both boxes on an integer grid and counting cells.

    Boxes must have integer coordinates divisible by the cell size.
    """
    x_max = int(max(a[2], b[2])) + 1
    y_max = int(max(a[3], b[3])) + 1
    ga = np.zeros((y_max, x_max), dtype=bool)
    gb = np.zeros((y_max, x_max), dtype=bool)
    ga[int(a[1]) : int(a[3]), int(a[0]) : int(a[2])] = True
    gb[int(b[1]) : int(b[3]), int(b[0]) : int(b[2])] = True
    union = np.logical_or(ga, gb).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(ga, gb).sum() / union)


def exact_ap(tp_flags, total_gt: int) -> float:
    """Exact area under the precision monotone envelope of the step PR curve.

    tp_flags must already be in score-descending order.
    """
    if total_gt == 0:
        return 0.0
    tp_flags = np.asarray(tp_flags, dtype=bool)
    if tp_flags.size == 0:
        return 0.0
    tp_cum = np.cumsum(tp_flags)
    fp_cum = np.cumsum(~tp_flags)
    recalls = tp_cum / total_gt
    precisions = tp_cum / (tp_cum + fp_cum)
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    area = 0.0
    prev_r = 0.0
    for r, e in zip(recalls, envelope):
        area += (r - prev_r) * e
        prev_r = r
    return float(area)


def _feasible(det_boxes, gt_boxes, iou_fn, threshold):
    pairs = set()
    for i, d in enumerate(det_boxes):
        for j, g in enumerate(gt_boxes):
            if iou_fn(d, g) >= threshold:
                pairs.add((i, j))
    return pairs


def max_matching_tp(det_boxes, gt_boxes, iou_fn, threshold) -> int:
    """Maximum-cardinality IoU-feasible matching by exhaustive search."""
    pairs = _feasible(det_boxes, gt_boxes, iou_fn, threshold)
    n_gt = len(gt_boxes)

    def best_from(i: int, used: int) -> int:
        if i == len(det_boxes):
            return 0
        best = best_from(i + 1, used)  # detection i unmatched
        for j in range(n_gt):
            if not used >> j & 1 and (i, j) in pairs:
                best = max(best, 1 + best_from(i + 1, used | 1 << j))
        return best

    return best_from(0, 0)

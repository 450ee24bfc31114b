"""Detection post-processing: confidence filtering and greedy NMS.

Pure functions; pages may be post-processed in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import area, iou
from .model import Detection


@dataclass(frozen=True)
class PostprocessConfig:
    score_threshold: float = 0.25
    nms_iou_threshold: float = 0.45
    class_agnostic: bool = False
    max_detections_per_page: int = 300

    def __post_init__(self):
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ValueError("score_threshold outside [0, 1]")
        if not 0.0 <= self.nms_iou_threshold <= 1.0:
            raise ValueError("nms_iou_threshold outside [0, 1]")
        if self.max_detections_per_page <= 0:
            raise ValueError("max_detections_per_page must be positive")


def filter_by_score(dets: list[Detection], threshold: float) -> list[Detection]:
    """Keep detections with score >= threshold, preserving order."""
    return [d for d in dets if d.score >= threshold]


def nms(
    dets: list[Detection],
    iou_threshold: float = 0.45,
    class_agnostic: bool = False,
    max_detections: int = 300,
) -> list[Detection]:
    """Greedy non-maximum suppression.

    Candidates are ranked by score descending, ties broken by smaller area
    then input index, so the result is deterministic under input permutation.
    A kept detection suppresses remaining ones with IoU strictly greater
    than the threshold (same class only, unless class_agnostic). Output is
    score-descending, capped at max_detections.
    """
    order = sorted(
        range(len(dets)), key=lambda i: (-dets[i].score, area(dets[i].bbox), i)
    )
    kept: list[int] = []
    suppressed = [False] * len(dets)
    for pos, i in enumerate(order):
        if suppressed[i]:
            continue
        kept.append(i)
        if len(kept) >= max_detections:
            break
        for j in order[pos + 1 :]:
            if suppressed[j]:
                continue
            if not class_agnostic and dets[j].label != dets[i].label:
                continue
            if iou(dets[i].bbox, dets[j].bbox) > iou_threshold:
                suppressed[j] = True
    return [dets[i] for i in kept]


def postprocess(dets: list[Detection], config: PostprocessConfig) -> list[Detection]:
    """Apply score filtering then class-wise NMS per the config."""
    return nms(
        filter_by_score(dets, config.score_threshold),
        config.nms_iou_threshold,
        config.class_agnostic,
        config.max_detections_per_page,
    )

"""Rectangle arithmetic: area, IoU, clamping, normalized-coordinate conversion.

Boxes are treated as continuous real rectangles (no +1 pixel convention),
matching the COCO continuous convention and normalized-coordinate arithmetic.
All functions are pure.
"""

from __future__ import annotations

from .model import BBox


def area(b: BBox) -> float:
    """Box area in pixels^2; zero for degenerate boxes."""
    return (b.x2 - b.x1) * (b.y2 - b.y1)


def intersection_area(a: BBox, b: BBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Two degenerate boxes (union area 0) give 0, not NaN, so metric code
    stays total.
    """
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def clamp_to_image(b: BBox, image_w: float, image_h: float) -> BBox:
    """Clip all coordinates into [0, w] x [0, h]; may yield a zero-area box."""
    return BBox(
        min(max(b.x1, 0.0), image_w),
        min(max(b.y1, 0.0), image_h),
        min(max(b.x2, 0.0), image_w),
        min(max(b.y2, 0.0), image_h),
    )


def from_normalized_center(
    cx: float, cy: float, bw: float, bh: float, image_w: float, image_h: float
) -> BBox:
    """Convert a unit-normalized (center, size) box to absolute pixels.

    The result is clamped to the image so downstream code never sees
    out-of-image boxes.
    """
    box = BBox(
        max((cx - bw / 2.0) * image_w, 0.0),
        max((cy - bh / 2.0) * image_h, 0.0),
        max((cx + bw / 2.0) * image_w, 0.0),
        max((cy + bh / 2.0) * image_h, 0.0),
    )
    return clamp_to_image(box, image_w, image_h)


def to_normalized_center(
    b: BBox, image_w: float, image_h: float
) -> tuple[float, float, float, float]:
    """Inverse of from_normalized_center for in-bounds boxes."""
    cx = (b.x1 + b.x2) / 2.0 / image_w
    cy = (b.y1 + b.y2) / 2.0 / image_h
    return (cx, cy, (b.x2 - b.x1) / image_w, (b.y2 - b.y1) / image_h)

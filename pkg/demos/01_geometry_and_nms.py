"""Walk-through: box geometry and non-maximum suppression.

Run with: python3 demos/01_geometry_and_nms.py
"""

from layoutkit import BBox, ClassLabel, Detection, area, iou, nms

# ---------------------------------------------------------------------------
# Boxes are continuous rectangles in pixel coordinates, origin top-left.

a = BBox(0, 0, 2, 2)
b = BBox(1, 1, 3, 3)
print("area of a:", area(a))
print("iou(a, b):", iou(a, b), "(intersection 1, union 7)")

# Corner order does not matter; construction normalizes it.
print("swapped corners:", BBox(10, 10, 2, 2) == BBox(2, 2, 10, 10))

# ---------------------------------------------------------------------------
# NMS keeps the best-scoring detection in each cluster of overlapping
# same-class boxes. A caption overlapping a table is untouched because
# suppression is per class.

dets = [
    Detection(BBox(100, 100, 300, 200), ClassLabel.TABLE, 0.95),
    Detection(BBox(102, 98, 305, 203), ClassLabel.TABLE, 0.80),  # duplicate
    Detection(BBox(100, 205, 300, 230), ClassLabel.CAPTION, 0.90),
    Detection(BBox(400, 100, 500, 200), ClassLabel.TABLE, 0.70),  # elsewhere
]
kept = nms(dets, iou_threshold=0.45)
print("\nbefore NMS:", len(dets), "detections")
for d in kept:
    print(f"  kept {d.label.canonical_name:<8} score={d.score:.2f} at {d.bbox.as_tuple()}")

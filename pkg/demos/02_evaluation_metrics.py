"""Walk-through: matching, AP, and the evaluation report.

Run with: python3 demos/02_evaluation_metrics.py
"""

import random

from layoutkit import (
    Annotation,
    BBox,
    ClassLabel,
    Dataset,
    Detection,
    PageRecord,
    evaluate,
)
from layoutkit.metrics import report_table

rng = random.Random(7)

# Build a small synthetic dataset: ground truth plus detections that are
# mostly right, with jittered boxes, one miss, and a few false positives.
pages = []
for i in range(8):
    gts, dets = [], []
    for _ in range(rng.randrange(2, 6)):
        x1, y1 = rng.randrange(0, 500), rng.randrange(0, 500)
        w, h = rng.randrange(40, 140), rng.randrange(20, 90)
        label = ClassLabel(rng.randrange(3))  # title / text / image
        gts.append(Annotation(BBox(x1, y1, x1 + w, y1 + h), label))
        if rng.random() < 0.85:  # detector finds it, slightly off
            j = rng.randrange(0, 12)
            dets.append(
                Detection(BBox(x1, y1, x1 + w + j, y1 + h + j), label, round(rng.uniform(0.4, 1.0), 2))
            )
    for _ in range(rng.randrange(0, 2)):  # spurious detection
        x1, y1 = rng.randrange(0, 550), rng.randrange(0, 550)
        dets.append(Detection(BBox(x1, y1, x1 + 50, y1 + 30), ClassLabel.TEXT, 0.35))
    pages.append(PageRecord(f"page{i}", 640, 640, tuple(gts), tuple(dets)))

dataset = Dataset(pages=pages)
report = evaluate(dataset, score_threshold=0.25, eval_iou=0.5)

print("per-class results:")
for row in report.classes:
    print(
        f"  {row.class_name:<8} AP50={row.ap50:.3f} AP50-95={row.ap50_95:.3f} "
        f"P={row.precision:.3f} R={row.recall:.3f} (TP={row.tp} FP={row.fp} FN={row.fn})"
    )

print("\nheadline table:")
print(report_table(report))

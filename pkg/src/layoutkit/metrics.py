"""Detection evaluation: matching, precision/recall/F1, AP, mAP50, mAP50-95.

Matching is greedy in score-descending order against the unmatched
same-class ground truth with the highest IoU; AP uses COCO-style 101-point
interpolation over the precision monotone envelope. Match records are
sorted by (score desc, page_id, input index) before cumulation so results
are identical regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoGroundTruth
from .formats import Dataset
from .geometry import iou
from .model import Annotation, ClassLabel, Detection

#: IoU thresholds for mAP50-95: 0.50 to 0.95 step 0.05.
IOU_THRESHOLDS_50_95 = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))

_RECALL_SAMPLES = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class MatchRecord:
    """Outcome for a single detection at one IoU threshold."""

    page_id: str
    label: ClassLabel
    score: float
    matched: bool
    matched_iou: float
    det_index: int


@dataclass
class MatchResult:
    """All detection outcomes plus ground-truth counts, at one IoU threshold."""

    iou_threshold: float
    records: list[MatchRecord] = field(default_factory=list)
    gt_counts: dict[ClassLabel, int] = field(default_factory=dict)

    def sorted_records(self, label: ClassLabel | None = None) -> list[MatchRecord]:
        recs = self.records if label is None else [r for r in self.records if r.label == label]
        return sorted(recs, key=lambda r: (-r.score, r.page_id, r.det_index))

    def counts(self, label: ClassLabel | None = None) -> tuple[int, int, int]:
        """(TP, FP, FN) for one class, or summed over all classes."""
        labels = [label] if label is not None else list(ClassLabel)
        tp = sum(1 for r in self.records if r.matched and r.label in labels)
        fp = sum(1 for r in self.records if not r.matched and r.label in labels)
        gt = sum(self.gt_counts.get(c, 0) for c in labels)
        return tp, fp, gt - tp


def match_page(
    dets: list[Detection],
    gts: list[Annotation],
    iou_threshold: float,
    page_id: str = "",
) -> list[MatchRecord]:
    """Greedy per-class matching for one page.

    Detections are taken in score-descending order (input index breaks ties)
    and claim the unmatched same-class ground truth with the highest IoU,
    provided that IoU >= iou_threshold.
    """
    records = []
    gt_taken = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    for i in order:
        det = dets[i]
        best_iou, best_gt = 0.0, -1
        for g, ann in enumerate(gts):
            if gt_taken[g] or ann.label != det.label:
                continue
            v = iou(det.bbox, ann.bbox)
            if v > best_iou:
                best_iou, best_gt = v, g
        if best_gt >= 0 and best_iou >= iou_threshold:
            gt_taken[best_gt] = True
            records.append(MatchRecord(page_id, det.label, det.score, True, best_iou, i))
        else:
            records.append(MatchRecord(page_id, det.label, det.score, False, 0.0, i))
    return records


def match_detections(dataset: Dataset, iou_threshold: float) -> MatchResult:
    """Match every page of the dataset at one IoU threshold."""
    result = MatchResult(iou_threshold=iou_threshold)
    for c in ClassLabel:
        result.gt_counts[c] = 0
    for page in dataset.pages:
        for ann in page.annotations:
            result.gt_counts[ann.label] += 1
        result.records.extend(
            match_page(list(page.detections), list(page.annotations), iou_threshold, page.page_id)
        )
    return result


def precision(tp: int, fp: int) -> float:
    """TP / (TP + FP); 1.0 when there are no predictions (vacuously precise)."""
    if tp + fp == 0:
        return 1.0
    return tp / (tp + fp)


def recall(tp: int, fn: int) -> float:
    """TP / (TP + FN); 1.0 when there are no ground truths."""
    if tp + fn == 0:
        return 1.0
    return tp / (tp + fn)


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


def pr_curve(tp_flags: np.ndarray, total_gt: int) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (recall, precision) points from score-ordered TP flags."""
    tp_cum = np.cumsum(tp_flags)
    fp_cum = np.cumsum(~tp_flags)
    recalls = tp_cum / total_gt if total_gt > 0 else np.zeros_like(tp_cum, dtype=float)
    precisions = tp_cum / (tp_cum + fp_cum)
    return recalls, precisions


def average_precision(records: list[MatchRecord], total_gt: int) -> float | None:
    """COCO-style 101-point interpolated AP for one class at one threshold.

    Records must belong to a single (class, IoU threshold) pair; they are
    re-sorted deterministically here. Returns 0.0 when there are detections
    but no ground truth, and None (excluded from averaging) when there is
    neither.
    """
    if total_gt == 0:
        return 0.0 if records else None
    if not records:
        return 0.0
    ordered = sorted(records, key=lambda r: (-r.score, r.page_id, r.det_index))
    tp_flags = np.array([r.matched for r in ordered], dtype=bool)
    recalls, precisions = pr_curve(tp_flags, total_gt)
    # Monotone envelope: precision at recall r becomes max precision at >= r.
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    # Sample at 101 recall points; recall beyond the curve contributes 0.
    idx = np.searchsorted(recalls, _RECALL_SAMPLES, side="left")
    sampled = np.where(idx < len(envelope), envelope[np.minimum(idx, len(envelope) - 1)], 0.0)
    return float(sampled.mean())


def per_class_ap(match: MatchResult) -> dict[ClassLabel, float | None]:
    return {
        c: average_precision(match.sorted_records(c), match.gt_counts.get(c, 0))
        for c in ClassLabel
    }


def map_at(match: MatchResult) -> float:
    """Mean per-class AP over classes that have ground truth."""
    present = [c for c in ClassLabel if match.gt_counts.get(c, 0) > 0]
    if not present:
        raise NoGroundTruth()
    aps = per_class_ap(match)
    return float(np.mean([aps[c] for c in present]))


def map_50_95(dataset: Dataset) -> float:
    """Mean of map_at over IoU thresholds 0.50-0.95 (matching per threshold)."""
    return float(
        np.mean([map_at(match_detections(dataset, t)) for t in IOU_THRESHOLDS_50_95])
    )


# ---------------------------------------------------------------------------
# Report assembly


@dataclass
class ClassReport:
    class_name: str
    ap50: float
    ap50_95: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    def to_dict(self, with_class: bool = True) -> dict:
        d = {"class": self.class_name} if with_class else {}
        d.update(
            ap50=self.ap50,
            ap50_95=self.ap50_95,
            precision=self.precision,
            recall=self.recall,
            f1=self.f1,
            tp=self.tp,
            fp=self.fp,
            fn=self.fn,
        )
        return d


@dataclass
class EvalReport:
    config: dict
    classes: list[ClassReport]
    aggregate: ClassReport

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "classes": [c.to_dict() for c in self.classes],
            "aggregate": self.aggregate.to_dict(with_class=False),
        }


def evaluate(
    dataset: Dataset,
    score_threshold: float = 0.25,
    eval_iou: float = 0.5,
) -> EvalReport:
    """Full evaluation: AP50/AP50-95 per class plus operating-point P/R/F1.

    Precision/recall counts are taken at the configured score threshold;
    AP uses all detections. Raises NoGroundTruth on a dataset with zero
    annotations.
    """
    if dataset.total_annotations() == 0:
        raise NoGroundTruth()

    matches = {t: match_detections(dataset, t) for t in IOU_THRESHOLDS_50_95}
    aps = {t: per_class_ap(matches[t]) for t in IOU_THRESHOLDS_50_95}

    operating = Dataset(
        pages=[
            type(p)(
                p.page_id,
                p.image_width,
                p.image_height,
                p.annotations,
                tuple(d for d in p.detections if d.score >= score_threshold),
            )
            for p in dataset.pages
        ]
    )
    op_match = match_detections(operating, eval_iou)

    present = [c for c in ClassLabel if matches[0.5].gt_counts.get(c, 0) > 0]
    class_rows = []
    for c in present:
        tp, fp, fn = op_match.counts(c)
        p, r = precision(tp, fp), recall(tp, fn)
        ap50 = aps[0.5][c]
        ap_all = [aps[t][c] for t in IOU_THRESHOLDS_50_95]
        class_rows.append(
            ClassReport(c.canonical_name, ap50, float(np.mean(ap_all)), p, r, f1(p, r), tp, fp, fn)
        )

    tp, fp, fn = op_match.counts()
    p, r = precision(tp, fp), recall(tp, fn)
    aggregate = ClassReport(
        "all",
        float(np.mean([row.ap50 for row in class_rows])),
        float(np.mean([row.ap50_95 for row in class_rows])),
        p,
        r,
        f1(p, r),
        tp,
        fp,
        fn,
    )
    config = {
        "score_threshold": score_threshold,
        "eval_iou": eval_iou,
        "iou_thresholds": list(IOU_THRESHOLDS_50_95),
    }
    return EvalReport(config=config, classes=class_rows, aggregate=aggregate)


def format_metric(v: float) -> str:
    """Fixed 3-decimal rendering with trailing zeros trimmed to 2 decimals."""
    s = f"{v:.3f}"
    if s.endswith("0"):
        s = s[:-1]
    return s


def render_report_table(
    map50: float, map50_95: float, prec: float, rec: float
) -> str:
    """Plain-text Metric/Value table for the aggregate headline numbers."""
    rows = [
        ("Metric", "Value"),
        ("mAP50", format_metric(map50)),
        ("mAP50-95", format_metric(map50_95)),
        ("Precision", format_metric(prec)),
        ("Recall", format_metric(rec)),
    ]
    width = max(len(name) for name, _ in rows) + 2
    return "".join(f"{name:<{width}}{value}\n" for name, value in rows)


def report_table(report: EvalReport) -> str:
    agg = report.aggregate
    return render_report_table(agg.ap50, agg.ap50_95, agg.precision, agg.recall)

"""Interchange formats: YOLO label text, Label Studio JSON export, page JSONL.

All parsers reject malformed records with an error that carries the location;
nothing is silently skipped. Boxes are converted to absolute pixels and
clamped to the image at the parsing boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (
    DuplicatePage,
    MalformedLine,
    OutOfRange,
    SchemaError,
    UnknownClass,
)
from .geometry import clamp_to_image, from_normalized_center, to_normalized_center
from .model import (
    CLASS_NAMES,
    Annotation,
    BBox,
    Detection,
    PageRecord,
    class_from_id,
    class_from_name,
)

_NORM_TOL = 1e-6


@dataclass
class Dataset:
    """A set of pages with a shared class-name table (canonical order)."""

    pages: list[PageRecord] = field(default_factory=list)
    class_names: tuple[str, ...] = CLASS_NAMES

    def __post_init__(self):
        seen = set()
        for p in self.pages:
            if p.page_id in seen:
                raise DuplicatePage(p.page_id)
            seen.add(p.page_id)

    def page_ids(self) -> list[str]:
        return [p.page_id for p in self.pages]

    def total_annotations(self) -> int:
        return sum(len(p.annotations) for p in self.pages)


# ---------------------------------------------------------------------------
# YOLO label files


def parse_yolo_labels(text, image_w, image_h, with_scores=False):
    """Parse YOLO label lines into Annotations (or Detections with scores).

    Each non-empty line is `class_id cx cy w h` or, with scores,
    `class_id cx cy w h score`. Normalized values must lie in [0, 1]
    (tolerance 1e-6). Line order is preserved.
    """
    n_fields = 6 if with_scores else 5
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != n_fields:
            raise MalformedLine(line_no, f"expected {n_fields} fields, got {len(parts)}")
        try:
            class_id = int(parts[0])
            values = [float(v) for v in parts[1:]]
        except ValueError:
            raise MalformedLine(line_no, f"non-numeric field in {line!r}") from None
        label = class_from_id(class_id)
        for v in values[:4]:
            if v < -_NORM_TOL or v > 1.0 + _NORM_TOL:
                raise OutOfRange(line_no, v)
        cx, cy, bw, bh = (min(max(v, 0.0), 1.0) for v in values[:4])
        bbox = from_normalized_center(cx, cy, bw, bh, image_w, image_h)
        if with_scores:
            score = values[4]
            if score < 0.0 or score > 1.0:
                raise MalformedLine(line_no, f"score {score} outside [0, 1]")
            records.append(Detection(bbox, label, score))
        else:
            records.append(Annotation(bbox, label))
    return records


def emit_yolo_labels(records, image_w, image_h) -> str:
    """Inverse of parse_yolo_labels; 6 decimal places, trailing newline."""
    lines = []
    for rec in records:
        cx, cy, bw, bh = to_normalized_center(rec.bbox, image_w, image_h)
        fields = f"{rec.label.value} {cx:.6f} {cy:.6f} {bw:.6f} {bh:.6f}"
        if isinstance(rec, Detection):
            fields += f" {rec.score:.6f}"
        lines.append(fields + "\n")
    return "".join(lines)


# ---------------------------------------------------------------------------
# Label Studio export (rectangle-labels subset, percent coordinates)


def _require(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return obj[key]


def parse_label_studio(json_text: str) -> Dataset:
    """Parse a Label Studio JSON export (array-of-tasks form) into a Dataset.

    Only rectangle results with percent coordinates are accepted; other
    result types raise SchemaError. Percent coordinates are converted to
    absolute pixels and clamped to the image.
    """
    try:
        tasks = json.loads(json_text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e}") from None
    if not isinstance(tasks, list):
        raise SchemaError("$", "expected a top-level array of tasks")

    pages = []
    for ti, task in enumerate(tasks):
        tpath = f"$[{ti}]"
        data = _require(task, "data", tpath)
        image_ref = _require(data, "image", f"{tpath}.data")
        page_id = str(image_ref).rsplit("/", 1)[-1].rsplit(".", 1)[0]
        if not page_id:
            raise SchemaError(f"{tpath}.data.image", "empty image reference")

        annotations = []
        width = height = None
        for ai, ann in enumerate(task.get("annotations", [])):
            results = _require(ann, "result", f"{tpath}.annotations[{ai}]")
            for ri, result in enumerate(results):
                rpath = f"{tpath}.annotations[{ai}].result[{ri}]"
                if result.get("type") != "rectanglelabels":
                    raise SchemaError(f"{rpath}.type", "only rectanglelabels results are supported")
                width = _require(result, "original_width", rpath)
                height = _require(result, "original_height", rpath)
                value = _require(result, "value", rpath)
                names = _require(value, "rectanglelabels", f"{rpath}.value")
                if not names:
                    raise SchemaError(f"{rpath}.value.rectanglelabels", "empty label list")
                label = class_from_name(names[0])
                x = _require(value, "x", f"{rpath}.value") / 100.0 * width
                y = _require(value, "y", f"{rpath}.value") / 100.0 * height
                w = _require(value, "width", f"{rpath}.value") / 100.0 * width
                h = _require(value, "height", f"{rpath}.value") / 100.0 * height
                bbox = clamp_to_image(
                    BBox(max(x, 0.0), max(y, 0.0), max(x + w, 0.0), max(y + h, 0.0)),
                    width,
                    height,
                )
                annotations.append(Annotation(bbox, label))
        if width is None:
            # No rectangle results; fall back to task-level dimensions.
            width = _require(data, "original_width", f"{tpath}.data")
            height = _require(data, "original_height", f"{tpath}.data")
        pages.append(
            PageRecord(page_id, int(width), int(height), annotations=tuple(annotations))
        )
    pages.sort(key=lambda p: p.page_id)
    return Dataset(pages=pages)


# ---------------------------------------------------------------------------
# Internal page JSONL (canonical format)

_PAGE_KEYS = {"page_id", "image_width", "image_height", "annotations", "detections"}
_ANN_KEYS = {"bbox", "class"}
_DET_KEYS = {"bbox", "class", "score"}


def _parse_bbox(raw, w, h, path):
    if not (isinstance(raw, list) and len(raw) == 4):
        raise SchemaError(path, "bbox must be a 4-element array")
    try:
        bbox = BBox(*(float(v) for v in raw))
    except (TypeError, ValueError) as e:
        raise SchemaError(path, str(e)) from None
    return clamp_to_image(bbox, w, h)


def read_pages_jsonl(text: str) -> Dataset:
    """Read the internal page JSONL format; unknown fields are rejected."""
    pages = []
    seen = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        loc = f"line {line_no}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(loc, f"invalid JSON: {e}") from None
        if not isinstance(obj, dict) or set(obj) != _PAGE_KEYS:
            raise SchemaError(loc, f"page object must have exactly keys {sorted(_PAGE_KEYS)}")
        page_id = obj["page_id"]
        if page_id in seen:
            raise DuplicatePage(page_id)
        seen.add(page_id)
        w, h = obj["image_width"], obj["image_height"]
        annotations = []
        for i, raw in enumerate(obj["annotations"]):
            path = f"{loc}.annotations[{i}]"
            if set(raw) != _ANN_KEYS:
                raise SchemaError(path, f"annotation must have exactly keys {sorted(_ANN_KEYS)}")
            annotations.append(
                Annotation(_parse_bbox(raw["bbox"], w, h, path), class_from_name(raw["class"]))
            )
        detections = []
        for i, raw in enumerate(obj["detections"]):
            path = f"{loc}.detections[{i}]"
            if set(raw) != _DET_KEYS:
                raise SchemaError(path, f"detection must have exactly keys {sorted(_DET_KEYS)}")
            score = raw["score"]
            if not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
                raise SchemaError(f"{path}.score", f"score {score!r} outside [0, 1]")
            detections.append(
                Detection(
                    _parse_bbox(raw["bbox"], w, h, path),
                    class_from_name(raw["class"]),
                    float(score),
                )
            )
        pages.append(PageRecord(page_id, w, h, tuple(annotations), tuple(detections)))
    pages.sort(key=lambda p: p.page_id)
    return Dataset(pages=pages)


def write_pages_jsonl(dataset: Dataset) -> str:
    """Emit the canonical page JSONL; lossless inverse of read_pages_jsonl."""
    lines = []
    for page in sorted(dataset.pages, key=lambda p: p.page_id):
        obj = {
            "page_id": page.page_id,
            "image_width": page.image_width,
            "image_height": page.image_height,
            "annotations": [
                {"bbox": list(a.bbox.as_tuple()), "class": a.label.canonical_name}
                for a in page.annotations
            ],
            "detections": [
                {
                    "bbox": list(d.bbox.as_tuple()),
                    "class": d.label.canonical_name,
                    "score": d.score,
                }
                for d in page.detections
            ],
        }
        lines.append(json.dumps(obj, ensure_ascii=False) + "\n")
    return "".join(lines)

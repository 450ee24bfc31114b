"""Core domain types: class taxonomy, boxes, detections, annotations, pages.

All types are immutable value objects (frozen dataclasses / IntEnum) and safe
to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import UnknownClass


class ClassLabel(IntEnum):
    """The fixed 7-class layout taxonomy.

    Ids follow the canonical row order of the class table; the id <-> name
    mapping is a bijection and stable across releases.
    """

    TITLE = 0
    TEXT = 1
    IMAGE = 2
    CAPTION = 3
    IMAGE_CAPTION = 4
    TABLE = 5
    TABLE_CAPTION = 6

    @property
    def canonical_name(self) -> str:
        return self.name.lower()


#: Group classes bound an element together with its caption; they carry
#: children in assembled layouts and are never routed to extraction backends.
GROUP_CLASSES = frozenset({ClassLabel.IMAGE_CAPTION, ClassLabel.TABLE_CAPTION})

#: Canonical lowercase names in id order.
CLASS_NAMES = tuple(c.canonical_name for c in ClassLabel)

_NAME_TO_LABEL = {c.canonical_name: c for c in ClassLabel}


def class_from_name(name: str) -> ClassLabel:
    """Look up a class by name, case-insensitively.

    Raises UnknownClass for names outside the taxonomy.
    """
    label = _NAME_TO_LABEL.get(name.strip().lower())
    if label is None:
        raise UnknownClass(name)
    return label


def class_from_id(class_id: int) -> ClassLabel:
    try:
        return ClassLabel(class_id)
    except ValueError:
        raise UnknownClass(class_id) from None


@dataclass(frozen=True, slots=True)
class BBox:
    """Axis-aligned rectangle in absolute pixel coordinates, origin top-left.

    Corners are normalized on construction so that x1 <= x2 and y1 <= y2;
    annotation tools emit either corner order. Coordinates must be finite
    and non-negative.
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite bbox coordinates: {coords}")
        if min(coords) < 0:
            raise ValueError(f"negative bbox coordinates: {coords}")
        if self.x1 > self.x2:
            object.__setattr__(self, "x1", coords[2])
            object.__setattr__(self, "x2", coords[0])
        if self.y1 > self.y2:
            object.__setattr__(self, "y1", coords[3])
            object.__setattr__(self, "y2", coords[1])

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


@dataclass(frozen=True, slots=True)
class Annotation:
    """Ground truth for one layout region."""

    bbox: BBox
    label: ClassLabel


@dataclass(frozen=True, slots=True)
class Detection:
    """Model output for one layout region: box, class, confidence."""

    bbox: BBox
    label: ClassLabel
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class PageRecord:
    """One page of a dataset: dimensions plus its annotations and detections."""

    page_id: str
    image_width: int
    image_height: int
    annotations: tuple[Annotation, ...] = field(default_factory=tuple)
    detections: tuple[Detection, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.page_id:
            raise ValueError("page_id must be non-empty")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        object.__setattr__(self, "annotations", tuple(self.annotations))
        object.__setattr__(self, "detections", tuple(self.detections))

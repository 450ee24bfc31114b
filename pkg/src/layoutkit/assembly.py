"""Page assembly: caption grouping, reading order, layout JSON.

Turns final (post-NMS) detections into an ordered component tree and emits
the per-page layout JSON document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import SchemaError
from .geometry import area, intersection_area
from .model import GROUP_CLASSES, BBox, ClassLabel, Detection, class_from_name

#: Minimum intersection-over-child-area for a detection to join a group box.
CHILD_COVERAGE_THRESHOLD = 0.5

#: Two components share a column when their horizontal extents overlap by at
#: least this fraction of the narrower extent.
COLUMN_OVERLAP_FRACTION = 0.2

#: Horizontal gaps below this fraction of the page width merge columns.
COLUMN_GAP_FRACTION = 0.05

_GROUP_CHILD_CLASSES = {
    ClassLabel.IMAGE_CAPTION: frozenset({ClassLabel.IMAGE, ClassLabel.CAPTION}),
    ClassLabel.TABLE_CAPTION: frozenset({ClassLabel.TABLE, ClassLabel.CAPTION}),
}


@dataclass(frozen=True)
class LayoutComponent:
    """One assembled component; group classes may carry children."""

    bbox: BBox
    label: ClassLabel
    score: float | None = None
    data: object = None  # str for text, list of rows for tables, path for images
    error: str | None = None
    children: tuple["LayoutComponent", ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class PageLayout:
    page_id: str
    image_width: int
    image_height: int
    components: tuple[LayoutComponent, ...] = field(default_factory=tuple)


def group_components(dets: list[Detection]) -> list[LayoutComponent]:
    """Attach image/table and caption detections to their group boxes.

    A detection becomes a child of the group box covering >= 50% of its own
    area; the best-coverage parent wins when several compete, and each
    parent keeps at most one image/table child and one caption child
    (again by best coverage). Everything else stays top-level. No detection
    is lost or duplicated.
    """
    parents = [i for i, d in enumerate(dets) if d.label in GROUP_CLASSES]
    # child index -> (coverage, parent index), best parent per child
    claimed: dict[int, tuple[float, int]] = {}
    for pi in parents:
        parent = dets[pi]
        eligible = _GROUP_CHILD_CLASSES[parent.label]
        for ci, child in enumerate(dets):
            if ci == pi or child.label not in eligible:
                continue
            child_area = area(child.bbox)
            if child_area <= 0.0:
                continue
            coverage = intersection_area(parent.bbox, child.bbox) / child_area
            if coverage >= CHILD_COVERAGE_THRESHOLD and (
                ci not in claimed or coverage > claimed[ci][0]
            ):
                claimed[ci] = (coverage, pi)

    # One child per slot (caption / non-caption) per parent, best coverage wins.
    slots: dict[tuple[int, bool], tuple[float, int]] = {}
    for ci, (coverage, pi) in claimed.items():
        key = (pi, dets[ci].label == ClassLabel.CAPTION)
        if key not in slots or coverage > slots[key][0]:
            slots[key] = (coverage, ci)
    winners = {ci: pi for (pi, _), (_, ci) in slots.items()}

    components = []
    for i, det in enumerate(dets):
        if i in winners:
            continue
        children = tuple(
            LayoutComponent(dets[ci].bbox, dets[ci].label, dets[ci].score)
            for ci in sorted(winners)
            if winners[ci] == i
        )
        components.append(LayoutComponent(det.bbox, det.label, det.score, children=children))
    return components


def _column_clusters(components, page_width):
    """Union-find clustering of components into columns.

    Components merge when their horizontal extents overlap by >= 20% of the
    narrower one, or when the horizontal gap between them is <= 5% of the
    page width. Full-width elements therefore collapse the page to a single
    column, degrading to a plain top-to-bottom sort.
    """
    n = len(components)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    for i in range(n):
        a = components[i].bbox
        for j in range(i + 1, n):
            b = components[j].bbox
            overlap = min(a.x2, b.x2) - max(a.x1, b.x1)
            narrower = max(min(a.width, b.width), 1e-9)
            if overlap >= COLUMN_OVERLAP_FRACTION * narrower:
                union(i, j)
            elif -overlap <= COLUMN_GAP_FRACTION * page_width:
                union(i, j)
    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    return list(clusters.values())


def reading_order(
    components: list[LayoutComponent], page_width: float
) -> list[LayoutComponent]:
    """Column-aware reading order.

    Components cluster into columns; columns run left to right, and within
    a column components sort top-to-bottom by y1, ties by x1 then input
    index. Single-column pages reduce to a plain (y1, x1) sort. The result
    is a permutation of the input and deterministic under input permutation.
    """
    clusters = _column_clusters(components, page_width)
    clusters.sort(key=lambda idxs: min(components[i].bbox.x1 for i in idxs))
    ordered = []
    for idxs in clusters:
        idxs.sort(key=lambda i: (components[i].bbox.y1, components[i].bbox.x1, i))
        ordered.extend(components[i] for i in idxs)
    return ordered


def assemble_page(
    page_id: str,
    image_width: int,
    image_height: int,
    dets: list[Detection],
) -> PageLayout:
    """Group then order final detections into a PageLayout."""
    components = reading_order(group_components(dets), image_width)
    return PageLayout(page_id, image_width, image_height, tuple(components))


# ---------------------------------------------------------------------------
# Layout JSON


def _round2(v: float) -> float:
    return round(v + 0.0, 2)


def _component_to_dict(c: LayoutComponent) -> dict:
    d = {
        "bbox": [_round2(v) for v in c.bbox.as_tuple()],
        "class": c.label.canonical_name,
        "score": None if c.score is None else round(c.score, 6),
        "data": c.data,
    }
    if c.error is not None:
        d["error"] = c.error
    if c.label in GROUP_CLASSES:
        d["children"] = [_component_to_dict(ch) for ch in c.children]
    return d


def emit_layout_json(layout: PageLayout) -> str:
    """Serialize a PageLayout; stable key order, coordinates at 2 decimals."""
    obj = {
        "page_id": layout.page_id,
        "image_width": layout.image_width,
        "image_height": layout.image_height,
        "components": [_component_to_dict(c) for c in layout.components],
    }
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def _component_from_dict(d: dict, path: str) -> LayoutComponent:
    for key in ("bbox", "class", "score", "data"):
        if key not in d:
            raise SchemaError(f"{path}.{key}", "missing required field")
    label = class_from_name(d["class"])
    children = tuple(
        _component_from_dict(ch, f"{path}.children[{i}]")
        for i, ch in enumerate(d.get("children", []))
    )
    return LayoutComponent(
        BBox(*(float(v) for v in d["bbox"])),
        label,
        d["score"],
        d["data"],
        d.get("error"),
        children,
    )


def parse_layout_json(text: str) -> PageLayout:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e}") from None
    for key in ("page_id", "image_width", "image_height", "components"):
        if key not in obj:
            raise SchemaError(f"$.{key}", "missing required field")
    return PageLayout(
        obj["page_id"],
        obj["image_width"],
        obj["image_height"],
        tuple(
            _component_from_dict(c, f"$.components[{i}]")
            for i, c in enumerate(obj["components"])
        ),
    )


def flatten(components) -> list[LayoutComponent]:
    """All components depth-first, children after their parent."""
    out = []
    for c in components:
        out.append(c)
        out.extend(flatten(c.children))
    return out


def leaf_components(layout: PageLayout) -> list[tuple[tuple[int, ...], LayoutComponent]]:
    """(tree path, component) for every non-group component in reading order."""
    leaves = []
    for i, c in enumerate(layout.components):
        if c.label in GROUP_CLASSES:
            leaves.extend(((i, j), ch) for j, ch in enumerate(c.children))
        else:
            leaves.append(((i,), c))
    return leaves


def with_component(layout: PageLayout, path: tuple[int, ...], component: LayoutComponent) -> PageLayout:
    """Return a copy of the layout with the component at `path` replaced."""
    components = list(layout.components)
    if len(path) == 1:
        components[path[0]] = component
    else:
        parent = components[path[0]]
        children = list(parent.children)
        children[path[1]] = component
        components[path[0]] = replace(parent, children=tuple(children))
    return replace(layout, components=tuple(components))

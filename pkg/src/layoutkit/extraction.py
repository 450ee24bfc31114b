"""Extraction: route leaf components to backends, crop, invoke, merge.

Backends are external commands speaking a file + standard-streams protocol:
the toolkit writes the cropped region as a PNG, runs
`command <png_path> <class_name>`, and reads stdout (plain UTF-8 text for
text classes, JSON {"rows": [[...], ...]} for tables). Exit code 0 means
success; anything else is a crash. Image components are cropped to file
with no backend call. Failures are recorded per component and never abort
the page.
"""

from __future__ import annotations

import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from PIL import Image

from .assembly import LayoutComponent, PageLayout, leaf_components, with_component
from .errors import (
    BackendCrash,
    BackendTimeout,
    MalformedBackendOutput,
    UnroutedClass,
)
from .geometry import clamp_to_image
from .model import BBox, ClassLabel

import json

MAX_OUTPUT_BYTES = 10 * 1024 * 1024

#: Crop boxes are expanded by this many pixels; detector boxes frequently
#: clip glyph ascenders.
DEFAULT_CROP_PAD = 2.0

TEXT_CLASSES = frozenset({ClassLabel.TITLE, ClassLabel.TEXT, ClassLabel.CAPTION})


@dataclass(frozen=True)
class BackendSpec:
    """An external extraction command serving a set of classes.

    command is the executable plus leading arguments; the crop path and
    class name are appended per the wire protocol. command=None is the
    skip sentinel: the class is routed nowhere and its data stays null.
    """

    name: str
    command: tuple[str, ...] | None
    classes: frozenset[ClassLabel]
    timeout: float = 30.0


@dataclass(frozen=True)
class PlanItem:
    """One planned backend call (or built-in crop) for a leaf component."""

    path: tuple[int, ...]
    component: LayoutComponent
    backend: BackendSpec | None  # None: built-in image crop


@dataclass
class ExtractionResult:
    path: tuple[int, ...]
    payload: object = None
    backend: str = ""
    elapsed: float = 0.0
    error: str | None = None


SKIP = "skip"


def route(layout: PageLayout, specs: list[BackendSpec]) -> list[PlanItem]:
    """Build the extraction plan: one call per leaf component, reading order.

    Group classes are never routed; their children are. The image class is
    cropped to file unless a spec marks it skip. Any other leaf class with
    neither a backend nor a skip marker raises UnroutedClass.
    """
    by_class: dict[ClassLabel, BackendSpec] = {}
    for spec in specs:
        for c in spec.classes:
            by_class[c] = spec
    plan = []
    for path, component in leaf_components(layout):
        spec = by_class.get(component.label)
        if spec is not None and spec.command is None:
            continue  # skip sentinel
        if spec is None:
            if component.label is ClassLabel.IMAGE:
                spec = None  # built-in crop
            else:
                raise UnroutedClass(component.label.canonical_name)
        plan.append(PlanItem(path, component, spec))
    return plan


def crop_filename(index: int, component: LayoutComponent) -> str:
    b = component.bbox
    coords = "_".join(str(round(v)) for v in (b.x1, b.y1, b.x2, b.y2))
    return f"{index:03d}_{component.label.canonical_name}_{coords}.png"


def _write_crop(image: Image.Image, item: PlanItem, index: int, crop_dir: Path, pad: float) -> Path:
    b = item.component.bbox
    padded = clamp_to_image(
        BBox(max(b.x1 - pad, 0.0), max(b.y1 - pad, 0.0), b.x2 + pad, b.y2 + pad),
        image.width,
        image.height,
    )
    crop = image.crop(
        (round(padded.x1), round(padded.y1), max(round(padded.x2), round(padded.x1) + 1), max(round(padded.y2), round(padded.y1) + 1))
    )
    out = crop_dir / crop_filename(index, item.component)
    crop.save(out, format="PNG")
    return out


def rectangularize(rows: list[list[str]]) -> list[list[str]]:
    """Pad ragged table rows with empty strings to a rectangle."""
    width = max((len(r) for r in rows), default=0)
    return [list(r) + [""] * (width - len(r)) for r in rows]


def _invoke(item: PlanItem, png_path: Path) -> object:
    spec = item.backend
    component = f"{item.component.label.canonical_name}@{item.path}"
    try:
        proc = subprocess.run(
            [*spec.command, str(png_path), item.component.label.canonical_name],
            capture_output=True,
            timeout=spec.timeout,
        )
    except subprocess.TimeoutExpired:
        raise BackendTimeout(component, spec.timeout) from None
    if proc.returncode != 0:
        raise BackendCrash(component, proc.returncode, proc.stderr.decode(errors="replace"))
    if len(proc.stdout) > MAX_OUTPUT_BYTES:
        raise MalformedBackendOutput(component, f"{len(proc.stdout)} bytes exceeds limit")
    try:
        text = proc.stdout.decode("utf-8")
    except UnicodeDecodeError as e:
        raise MalformedBackendOutput(component, f"not UTF-8: {e}") from None

    if item.component.label is ClassLabel.TABLE:
        try:
            obj = json.loads(text)
            rows = obj["rows"]
            if not all(isinstance(r, list) for r in rows):
                raise TypeError("rows must be arrays")
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise MalformedBackendOutput(component, str(e)) from None
        return rectangularize([[str(c) for c in r] for r in rows])
    return text.rstrip("\n")


def _run_one(item: PlanItem, index: int, image: Image.Image, crop_dir: Path, pad: float, base_dir: Path | None) -> ExtractionResult:
    start = time.perf_counter()
    result = ExtractionResult(item.path, backend=item.backend.name if item.backend else "crop")
    try:
        png_path = _write_crop(image, item, index, crop_dir, pad)
        if item.backend is None:
            rel = png_path.relative_to(base_dir) if base_dir else png_path
            result.payload = rel.as_posix()
        else:
            result.payload = _invoke(item, png_path)
    except (OSError, BackendCrash, BackendTimeout, MalformedBackendOutput) as e:
        result.error = str(e)
    result.elapsed = time.perf_counter() - start
    return result


def run_extraction(
    plan: list[PlanItem],
    page_image: Image.Image,
    crop_dir: Path,
    pad: float = DEFAULT_CROP_PAD,
    jobs: int = 1,
    base_dir: Path | None = None,
) -> list[ExtractionResult]:
    """Execute the plan against the page image.

    Crops land in crop_dir; image payloads are paths relative to base_dir
    when given. Calls may run concurrently (jobs > 1) but results come back
    in plan order regardless of completion order.
    """
    crop_dir.mkdir(parents=True, exist_ok=True)
    page_image.load()  # force full decode; lazy PIL images are not thread-safe
    if jobs <= 1 or len(plan) <= 1:
        return [
            _run_one(item, i, page_image, crop_dir, pad, base_dir)
            for i, item in enumerate(plan)
        ]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(_run_one, item, i, page_image, crop_dir, pad, base_dir)
            for i, item in enumerate(plan)
        ]
        return [f.result() for f in futures]


def merge_results(layout: PageLayout, results: list[ExtractionResult]) -> PageLayout:
    """Fill component data fields from results; tree shape is unchanged."""
    for res in results:
        target = layout.components[res.path[0]]
        if len(res.path) > 1:
            target = target.children[res.path[1]]
        if res.error is None:
            updated = replace(target, data=res.payload)
        else:
            updated = replace(target, data=None, error=res.error)
        layout = with_component(layout, res.path, updated)
    return layout


def extract_page(
    layout: PageLayout,
    page_image: Image.Image,
    specs: list[BackendSpec],
    crop_dir: Path,
    pad: float = DEFAULT_CROP_PAD,
    jobs: int = 1,
    base_dir: Path | None = None,
) -> tuple[PageLayout, list[ExtractionResult]]:
    """Route, run, and merge for one page."""
    plan = route(layout, specs)
    results = run_extraction(plan, page_image, crop_dir, pad, jobs, base_dir)
    return merge_results(layout, results), results

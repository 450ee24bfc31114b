"""Command-line entry point: convert, postprocess, evaluate, assemble, extract, report.

Exit codes are stable: 0 success, 1 input or backend error, 2 evaluation
with no ground truth. Output files are written atomically (temp + rename).
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from PIL import Image

from . import assembly, extraction, metrics
from .detector import DetectorSpec, load_detections
from .errors import LayoutKitError, NoGroundTruth
from .formats import (
    Dataset,
    emit_yolo_labels,
    parse_label_studio,
    read_pages_jsonl,
    write_pages_jsonl,
)
from .model import GROUP_CLASSES, PageRecord, class_from_name
from .postprocess import PostprocessConfig, postprocess

log = logging.getLogger("layoutkit")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_GROUND_TRUTH = 2

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with open(fd, "w", encoding="utf-8") as f:
            f.write(text)
        Path(tmp).replace(path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _parse_image_size(value: str) -> tuple[int, int]:
    try:
        w, h = value.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {value!r}") from None


def _parse_backend(value: str) -> extraction.BackendSpec:
    if "=" not in value:
        raise argparse.ArgumentTypeError(f"expected <class[,class...]>=<command>, got {value!r}")
    classes_part, command_part = value.split("=", 1)
    classes = frozenset(class_from_name(n) for n in classes_part.split(","))
    bad = classes & GROUP_CLASSES
    if bad:
        names = ", ".join(sorted(c.canonical_name for c in bad))
        raise argparse.ArgumentTypeError(f"group classes are never routed: {names}")
    command = None if command_part.strip() == extraction.SKIP else tuple(shlex.split(command_part))
    return extraction.BackendSpec(classes_part, command, classes)


def _coerce(value: str):
    lowered = value.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def _load_config_file(path: str) -> dict:
    """Read a key=value config file into an overrides dict."""
    overrides = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise LayoutKitError(f"{path}:{line_no}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        overrides[key.replace("-", "_")] = _coerce(value)
    return overrides


# ---------------------------------------------------------------------------
# Subcommands


def cmd_convert(args) -> int:
    if args.from_format == "label-studio":
        dataset = parse_label_studio(Path(args.input).read_text(encoding="utf-8"))
    elif args.from_format == "yolo":
        if not args.labels_dir or not args.image_size:
            raise LayoutKitError("yolo input requires --labels-dir and --image-size")
        w, h = args.image_size
        pages = []
        for sidecar in sorted(Path(args.labels_dir).glob("*.txt")):
            records = _parse_yolo_sidecar(sidecar, w, h, args.with_scores)
            kwargs = {"detections": records} if args.with_scores else {"annotations": records}
            pages.append(PageRecord(sidecar.stem, w, h, **kwargs))
        dataset = Dataset(pages=pages)
    else:
        dataset = read_pages_jsonl(Path(args.input).read_text(encoding="utf-8"))

    if args.to_format == "jsonl":
        atomic_write(Path(args.out), write_pages_jsonl(dataset))
    else:
        out_dir = Path(args.out)
        for page in dataset.pages:
            records = page.detections if args.with_scores else page.annotations
            atomic_write(
                out_dir / f"{page.page_id}.txt",
                emit_yolo_labels(records, page.image_width, page.image_height),
            )
    return EXIT_OK


def _parse_yolo_sidecar(path: Path, w: int, h: int, with_scores: bool):
    from .formats import parse_yolo_labels

    return parse_yolo_labels(path.read_text(encoding="utf-8"), w, h, with_scores=with_scores)


def cmd_postprocess(args) -> int:
    config = PostprocessConfig(
        args.score_threshold, args.nms_iou, args.class_agnostic, args.max_detections
    )
    dataset = read_pages_jsonl(Path(args.input).read_text(encoding="utf-8"))
    pages = [
        PageRecord(
            p.page_id,
            p.image_width,
            p.image_height,
            p.annotations,
            tuple(postprocess(list(p.detections), config)),
        )
        for p in dataset.pages
    ]
    atomic_write(Path(args.out), write_pages_jsonl(Dataset(pages=pages)))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = read_pages_jsonl(Path(args.input).read_text(encoding="utf-8"))
    report = metrics.evaluate(dataset, args.score_threshold, args.iou)
    atomic_write(Path(args.out), json.dumps(report.to_dict(), indent=2) + "\n")
    table = metrics.report_table(report)
    atomic_write(Path(args.out).with_suffix(".txt"), table)
    agg = report.aggregate
    fm = metrics.format_metric
    print(
        f"mAP50 {fm(agg.ap50)} mAP50-95 {fm(agg.ap50_95)} "
        f"P {fm(agg.precision)} R {fm(agg.recall)} F1 {fm(agg.f1)}"
    )
    return EXIT_OK


def cmd_assemble(args) -> int:
    config = PostprocessConfig(args.score_threshold, args.nms_iou)
    dataset = read_pages_jsonl(Path(args.input).read_text(encoding="utf-8"))
    out_dir = Path(args.out)
    for page in dataset.pages:
        dets = postprocess(list(page.detections), config)
        layout = assembly.assemble_page(page.page_id, page.image_width, page.image_height, dets)
        atomic_write(out_dir / f"{page.page_id}.json", assembly.emit_layout_json(layout))
    return EXIT_OK


def _extract_one_page(image_path: Path, args, config, detector_spec, backends, out_dir: Path):
    with Image.open(image_path) as image:
        page = PageRecord(image_path.stem, image.width, image.height)
        dets = postprocess(load_detections(detector_spec, page, image_path), config)
        layout = assembly.assemble_page(page.page_id, image.width, image.height, dets)
        layout, results = extraction.extract_page(
            layout,
            image,
            backends,
            crop_dir=out_dir / "crops" / page.page_id,
            pad=args.pad,
            jobs=args.backend_jobs,
            base_dir=out_dir,
        )
    atomic_write(out_dir / f"{page.page_id}.json", assembly.emit_layout_json(layout))
    return [r for r in results if r.error is not None]


def cmd_extract(args) -> int:
    config = PostprocessConfig(args.score_threshold, args.nms_iou)
    if args.detector_cmd:
        detector_spec = DetectorSpec(command=tuple(shlex.split(args.detector_cmd)))
    elif args.detections_dir:
        detector_spec = DetectorSpec(detections_dir=Path(args.detections_dir))
    else:
        raise LayoutKitError("provide --detections-dir or --detector-cmd")
    out_dir = Path(args.out)
    images = sorted(
        p for p in Path(args.images_dir).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        raise LayoutKitError(f"no page images found in {args.images_dir}")

    start = time.perf_counter()
    failures = 0
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(
                    _extract_one_page, p, args, config, detector_spec, args.backend, out_dir
                )
                for p in images
            ]
            for future in futures:
                failures += len(future.result())
    else:
        for p in images:
            failures += len(
                _extract_one_page(p, args, config, detector_spec, args.backend, out_dir)
            )
    elapsed = time.perf_counter() - start
    n = len(images)
    print(f"pages processed: {n}  component failures: {failures}")
    print(f"timing: {elapsed / n:.3f} s/page ({n / elapsed:.2f} pages/s)")
    if failures and args.strict:
        return EXIT_ERROR
    return EXIT_OK


def cmd_report(args) -> int:
    obj = json.loads(Path(args.input).read_text(encoding="utf-8"))
    agg = obj["aggregate"]
    table = metrics.render_report_table(
        agg["ap50"], agg["ap50_95"], agg["precision"], agg["recall"]
    )
    if args.out:
        atomic_write(Path(args.out), table)
    else:
        print(table, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="layoutkit",
        description="Document layout detection post-processing, evaluation, and extraction.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def add_parser(name, **kwargs):
        registry[name] = sub.add_parser(name, **kwargs)
        return registry[name]

    def common(p):
        p.add_argument("--config", help="key=value config file; flags override it")

    p = add_parser("convert", help="convert between annotation/detection formats")
    p.add_argument("input", nargs="?", help="input file (label-studio JSON or pages JSONL)")
    p.add_argument("--from", dest="from_format", required=True, choices=["label-studio", "yolo", "jsonl"])
    p.add_argument("--to", dest="to_format", required=True, choices=["jsonl", "yolo"])
    p.add_argument("--labels-dir", help="directory of YOLO .txt files (yolo input)")
    p.add_argument("--image-size", type=_parse_image_size, help="WxH for yolo input")
    p.add_argument("--with-scores", action="store_true", help="records are detections")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_convert)

    p = add_parser("postprocess", help="score filtering + NMS on a pages file")
    p.add_argument("input")
    p.add_argument("--score-threshold", type=float, default=0.25)
    p.add_argument("--nms-iou", type=float, default=0.45)
    p.add_argument("--class-agnostic", action="store_true")
    p.add_argument("--max-detections", type=int, default=300)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_postprocess)

    p = add_parser("evaluate", help="compute the evaluation report")
    p.add_argument("input")
    p.add_argument("--iou", type=float, default=0.5, help="IoU threshold for the operating point")
    p.add_argument("--score-threshold", type=float, default=0.25)
    p.add_argument("--out", required=True, help="report JSON path (.txt table written alongside)")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = add_parser("assemble", help="group + order detections into layout JSON")
    p.add_argument("input")
    p.add_argument("--score-threshold", type=float, default=0.25)
    p.add_argument("--nms-iou", type=float, default=0.45)
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cmd_assemble)

    p = add_parser("extract", help="full pipeline: detect, assemble, extract")
    p.add_argument("--images-dir", required=True)
    p.add_argument("--detections-dir")
    p.add_argument("--detector-cmd")
    p.add_argument(
        "--backend",
        action="append",
        type=_parse_backend,
        default=[],
        metavar="CLASSES=CMD",
        help="e.g. 'title,text,caption=tesseract-wrapper' or 'table=skip'",
    )
    p.add_argument("--score-threshold", type=float, default=0.25)
    p.add_argument("--nms-iou", type=float, default=0.45)
    p.add_argument("--pad", type=float, default=extraction.DEFAULT_CROP_PAD)
    p.add_argument("--jobs", type=int, default=1, help="page-level parallelism")
    p.add_argument("--backend-jobs", type=int, default=4, help="backend calls in flight per page")
    p.add_argument("--strict", action="store_true", help="exit 1 on any component failure")
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = add_parser("report", help="render the plain-text table from a report JSON")
    p.add_argument("input")
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser, registry


def main(argv: list[str] | None = None) -> int:
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if getattr(args, "config", None):
            # Config beats built-in defaults; values changed on the command
            # line (no longer at their default) are left alone.
            sub = subparsers[args.command]
            for dest, value in _load_config_file(args.config).items():
                if hasattr(args, dest) and getattr(args, dest) == sub.get_default(dest):
                    setattr(args, dest, value)
        return args.func(args)
    except NoGroundTruth as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_GROUND_TRUTH
    except (LayoutKitError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())

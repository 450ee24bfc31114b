"""Document layout detection post-processing, evaluation, and extraction.

Submodules are loaded lazily so lightweight entry points (the mock backend
and detector commands) do not pay for numpy/Pillow imports.
"""

from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "model": [
        "CLASS_NAMES",
        "GROUP_CLASSES",
        "Annotation",
        "BBox",
        "ClassLabel",
        "Detection",
        "PageRecord",
        "class_from_id",
        "class_from_name",
    ],
    "geometry": [
        "area",
        "clamp_to_image",
        "from_normalized_center",
        "iou",
        "to_normalized_center",
    ],
    "formats": [
        "Dataset",
        "emit_yolo_labels",
        "parse_label_studio",
        "parse_yolo_labels",
        "read_pages_jsonl",
        "write_pages_jsonl",
    ],
    "postprocess": ["PostprocessConfig", "filter_by_score", "nms", "postprocess"],
    "metrics": [
        "EvalReport",
        "MatchResult",
        "average_precision",
        "evaluate",
        "f1",
        "map_50_95",
        "map_at",
        "match_detections",
        "precision",
        "recall",
    ],
    "assembly": [
        "LayoutComponent",
        "PageLayout",
        "assemble_page",
        "emit_layout_json",
        "group_components",
        "parse_layout_json",
        "reading_order",
    ],
    "extraction": [
        "BackendSpec",
        "ExtractionResult",
        "extract_page",
        "merge_results",
        "route",
        "run_extraction",
    ],
    "detector": ["DetectorSpec", "load_detections"],
}

_NAME_TO_MODULE = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = ["__version__", *_NAME_TO_MODULE]


def __getattr__(name):
    module = _NAME_TO_MODULE.get(name)
    if module is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(import_module(f".{module}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(__all__)

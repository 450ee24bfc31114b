"""Detection sources: sidecar label files or an external detector command."""

from __future__ import annotations

import logging
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .errors import BackendCrash, BackendTimeout
from .formats import parse_yolo_labels
from .model import Detection, PageRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorSpec:
    """Where detections come from: exactly one of the two modes.

    files mode reads `<detections_dir>/<page_id>.txt` in YOLO-with-scores
    format; command mode runs `command <image_path>` and parses the same
    format from stdout.
    """

    detections_dir: Path | None = None
    command: tuple[str, ...] | None = None
    timeout: float = 60.0

    def __post_init__(self):
        if (self.detections_dir is None) == (self.command is None):
            raise ValueError("configure exactly one of detections_dir / command")


def load_detections(
    spec: DetectorSpec, page: PageRecord, image_path: Path | None = None
) -> list[Detection]:
    """Load or produce detections for one page, scaled to page dimensions.

    A missing sidecar in files mode is a legitimate zero-detection outcome
    and only logs a warning.
    """
    if spec.detections_dir is not None:
        sidecar = spec.detections_dir / f"{page.page_id}.txt"
        if not sidecar.exists():
            log.warning("no detections sidecar for page %s; assuming none", page.page_id)
            return []
        text = sidecar.read_text(encoding="utf-8")
    else:
        component = f"detector@{page.page_id}"
        try:
            proc = subprocess.run(
                [*spec.command, str(image_path)],
                capture_output=True,
                timeout=spec.timeout,
            )
        except subprocess.TimeoutExpired:
            raise BackendTimeout(component, spec.timeout) from None
        if proc.returncode != 0:
            raise BackendCrash(component, proc.returncode, proc.stderr.decode(errors="replace"))
        text = proc.stdout.decode("utf-8")
    return parse_yolo_labels(text, page.image_width, page.image_height, with_scores=True)

"""Deterministic mock extraction backend for tests and demos.

Speaks the standard wire protocol: `python -m layoutkit.mock_backend
<png_path> <class_name>`. Text classes get "MOCK:<class>:<x1>,<y1>,<x2>,<y2>"
with the coordinates recovered from the crop filename; the table class gets
a ragged two-row JSON payload so rectangularization is exercised.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path


def payload_for(png_path: str, class_name: str) -> str:
    stem = Path(png_path).stem
    x1, y1, x2, y2 = stem.split("_")[-4:]
    if class_name == "table":
        return json.dumps({"rows": [["MOCK:table", f"{x1},{y1}"], [f"{x2},{y2}"]]})
    return f"MOCK:{class_name}:{x1},{y1},{x2},{y2}"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: mock_backend <png_path> <class_name>", file=sys.stderr)
        return 2
    print(payload_for(argv[0], argv[1]))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Deterministic mock detector for tests and demos.

Speaks the detector command protocol: `python -m layoutkit.mock_detector
<image_path>` prints YOLO-with-scores lines on stdout. The layout emitted
is fixed (title, two text columns, a table-with-caption group), so the
whole pipeline is reproducible bit-for-bit.
"""

from __future__ import annotations

import sys

# class_id cx cy w h score
LINES = (
    "0 0.500000 0.060000 0.840000 0.080000 0.950000",
    "1 0.270000 0.350000 0.420000 0.440000 0.910000",
    "1 0.730000 0.350000 0.420000 0.440000 0.900000",
    "6 0.500000 0.800000 0.760000 0.320000 0.880000",
    "5 0.500000 0.780000 0.700000 0.240000 0.870000",
    "3 0.500000 0.930000 0.600000 0.040000 0.860000",
)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: mock_detector <image_path>", file=sys.stderr)
        return 2
    for line in LINES:
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

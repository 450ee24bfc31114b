import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `oracles`

from layoutkit import Annotation, BBox, ClassLabel, Detection

DATA_DIR = Path(__file__).parent / "data"


def box(x1, y1, x2, y2):
    return BBox(x1, y1, x2, y2)


def det(x1, y1, x2, y2, label=ClassLabel.TEXT, score=0.9):
    return Detection(BBox(x1, y1, x2, y2), label, score)


def ann(x1, y1, x2, y2, label=ClassLabel.TEXT):
    return Annotation(BBox(x1, y1, x2, y2), label)


def random_box(rng: random.Random, w=640, h=640, min_size=1):
    x1 = rng.randint(0, w - min_size)
    y1 = rng.randint(0, h - min_size)
    x2 = rng.randint(x1 + min_size, w)
    y2 = rng.randint(y1 + min_size, h)
    return BBox(x1, y1, x2, y2)


@pytest.fixture
def rng():
    return random.Random(20240817)

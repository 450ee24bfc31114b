import pytest

from conftest import det, random_box
from layoutkit import ClassLabel, Detection, PostprocessConfig, filter_by_score, iou, nms


def random_page(rng, n=20):
    return [
        Detection(
            random_box(rng, 200, 200, min_size=5),
            ClassLabel(rng.randrange(7)),
            round(rng.random(), 3),
        )
        for _ in range(n)
    ]


class TestFilterByScore:
    def test_threshold_keeps_order(self):
        dets = [det(0, 0, 1, 1, score=s) for s in (0.9, 0.2, 0.5)]
        assert [d.score for d in filter_by_score(dets, 0.25)] == [0.9, 0.5]

    def test_zero_threshold_is_identity(self):
        dets = [det(0, 0, 1, 1, score=s) for s in (0.9, 0.2)]
        assert filter_by_score(dets, 0.0) == dets

    def test_boundary_is_inclusive(self):
        dets = [det(0, 0, 1, 1, score=1.0), det(0, 0, 1, 1, score=0.999)]
        assert filter_by_score(dets, 1.0) == [dets[0]]

    def test_monotone_in_threshold(self, rng):
        dets = random_page(rng)
        lengths = [len(filter_by_score(dets, t / 10)) for t in range(11)]
        assert lengths == sorted(lengths, reverse=True)


class TestNms:
    def test_identical_boxes_same_class(self):
        a = det(0, 0, 10, 10, score=0.9)
        b = det(0, 0, 10, 10, score=0.8)
        assert nms([b, a], 0.45) == [a]

    def test_disjoint_boxes_kept(self):
        a, b = det(0, 0, 10, 10, score=0.9), det(20, 20, 30, 30, score=0.8)
        assert nms([a, b], 0.45) == [a, b]

    def test_chain_suppression(self):
        # A overlaps B at iou 0.6; C overlaps neither above threshold.
        a = det(0, 0, 10, 10, score=0.9)
        b = det(0, 0, 10, 16, score=0.8)  # iou(a,b)=100/160=0.625
        c = det(50, 50, 60, 60, score=0.7)
        assert iou(a.bbox, b.bbox) == pytest.approx(0.625)
        assert nms([a, b, c], 0.45) == [a, c]

    def test_different_classes_not_suppressed(self):
        a = det(0, 0, 10, 10, ClassLabel.TABLE, 0.9)
        b = det(0, 0, 10, 10, ClassLabel.TABLE_CAPTION, 0.8)
        assert nms([a, b], 0.45) == [a, b]
        assert nms([a, b], 0.45, class_agnostic=True) == [a]

    def test_iou_threshold_one_keeps_everything(self, rng):
        dets = random_page(rng)
        assert sorted(nms(dets, 1.0), key=id) == sorted(dets, key=id)

    def test_max_detections_cap(self):
        dets = [det(i * 20, 0, i * 20 + 10, 10, score=0.5) for i in range(10)]
        assert len(nms(dets, 0.45, max_detections=3)) == 3

    def test_properties_on_random_pages(self, rng):
        for _ in range(50):
            dets = random_page(rng, rng.randrange(0, 25))
            out = nms(dets, 0.45)
            assert all(d in dets for d in out)
            for i, a in enumerate(out):
                for b in out[i + 1 :]:
                    if a.label == b.label:
                        assert iou(a.bbox, b.bbox) <= 0.45
            assert nms(out, 0.45) == out  # idempotent
            shuffled = dets[:]
            rng.shuffle(shuffled)
            assert nms(shuffled, 0.45) == out  # permutation invariant


class TestConfig:
    def test_defaults(self):
        c = PostprocessConfig()
        assert (c.score_threshold, c.nms_iou_threshold) == (0.25, 0.45)
        assert not c.class_agnostic
        assert c.max_detections_per_page == 300

    @pytest.mark.parametrize("kwargs", [
        {"score_threshold": 1.5},
        {"nms_iou_threshold": -0.1},
        {"max_detections_per_page": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            PostprocessConfig(**kwargs)

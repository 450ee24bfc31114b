import json
import sys
from pathlib import Path

import pytest
from PIL import Image

from conftest import DATA_DIR, ann, det
from layoutkit import ClassLabel, Dataset, PageRecord, read_pages_jsonl, write_pages_jsonl
from layoutkit.cli import main

PY = sys.executable

MOCK_BACKEND = f"{PY} -m layoutkit.mock_backend"
MOCK_DETECTOR = f"{PY} -m layoutkit.mock_detector"


def write_pages(path: Path, pages):
    path.write_text(write_pages_jsonl(Dataset(pages=pages)))


def perfect_pages():
    gts = (ann(0, 0, 50, 50, ClassLabel.TITLE), ann(0, 100, 200, 200, ClassLabel.TEXT))
    dets = tuple(det(*g.bbox.as_tuple(), g.label, 1.0) for g in gts)
    return [PageRecord("p1", 640, 640, gts, dets)]


def make_images(directory: Path, n: int):
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        Image.new("RGB", (800, 1000), "white").save(directory / f"page{i}.png")


class TestConvert:
    def test_label_studio_to_jsonl(self, tmp_path, capsys):
        out = tmp_path / "pages.jsonl"
        code = main([
            "convert", str(DATA_DIR / "label_studio_export.json"),
            "--from", "label-studio", "--to", "jsonl", "--out", str(out),
        ])
        assert code == 0
        dataset = read_pages_jsonl(out.read_text())
        assert dataset.page_ids() == ["page_a", "page_b", "page_c"]

    def test_malformed_input_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main([
            "convert", str(bad), "--from", "label-studio", "--to", "jsonl",
            "--out", str(tmp_path / "o.jsonl"),
        ])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_yolo_round_trip(self, tmp_path):
        labels = tmp_path / "labels"
        labels.mkdir()
        (labels / "pg1.txt").write_text("5 0.5 0.5 0.25 0.25 0.9\n1 0.2 0.2 0.1 0.1 0.8\n")
        jsonl = tmp_path / "pages.jsonl"
        assert main([
            "convert", "--from", "yolo", "--to", "jsonl", "--labels-dir", str(labels),
            "--image-size", "640x480", "--with-scores", "--out", str(jsonl),
        ]) == 0
        back = tmp_path / "back"
        assert main([
            "convert", str(jsonl), "--from", "jsonl", "--to", "yolo",
            "--with-scores", "--out", str(back),
        ]) == 0
        orig = (labels / "pg1.txt").read_text().split()
        rt = (back / "pg1.txt").read_text().split()
        assert [v[:1] for v in orig[::6]] == [v[:1] for v in rt[::6]]
        for a, b in zip(map(float, orig), map(float, rt)):
            assert abs(a - b) < 1e-5


class TestPostprocessCmd:
    def test_filters_and_suppresses(self, tmp_path):
        pages = [
            PageRecord(
                "p1", 640, 640,
                detections=(
                    det(0, 0, 10, 10, score=0.9),
                    det(0, 0, 10, 10, score=0.8),  # duplicate, suppressed
                    det(50, 50, 60, 60, score=0.1),  # below threshold
                ),
            )
        ]
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        write_pages(src, pages)
        assert main(["postprocess", str(src), "--out", str(dst)]) == 0
        [page] = read_pages_jsonl(dst.read_text()).pages
        assert len(page.detections) == 1
        assert page.detections[0].score == 0.9


class TestEvaluateCmd:
    def test_perfect_dataset(self, tmp_path, capsys):
        src = tmp_path / "pages.jsonl"
        write_pages(src, perfect_pages())
        out = tmp_path / "report.json"
        assert main(["evaluate", str(src), "--out", str(out)]) == 0
        line = capsys.readouterr().out.strip()
        assert line == "mAP50 1.00 mAP50-95 1.00 P 1.00 R 1.00 F1 1.00"
        obj = json.loads(out.read_text())
        assert obj["aggregate"]["ap50"] == 1.0
        assert out.with_suffix(".txt").exists()

    def test_no_ground_truth_exit_2(self, tmp_path, capsys):
        src = tmp_path / "pages.jsonl"
        write_pages(src, [PageRecord("p1", 640, 640, detections=(det(0, 0, 10, 10),))])
        assert main(["evaluate", str(src), "--out", str(tmp_path / "r.json")]) == 2


class TestAssembleCmd:
    def test_writes_layout_per_page(self, tmp_path):
        src = tmp_path / "pages.jsonl"
        write_pages(src, perfect_pages())
        out = tmp_path / "layouts"
        assert main(["assemble", str(src), "--out", str(out)]) == 0
        obj = json.loads((out / "p1.json").read_text())
        assert [c["class"] for c in obj["components"]] == ["title", "text"]
        assert all(c["data"] is None for c in obj["components"])


class TestExtractCmd:
    def _run(self, tmp_path, name, extra=()):
        images = tmp_path / "images"
        make_images(images, 2)
        out = tmp_path / name
        code = main([
            "extract", "--images-dir", str(images),
            "--detector-cmd", MOCK_DETECTOR,
            "--backend", f"title,text,caption={MOCK_BACKEND}",
            "--backend", f"table={MOCK_BACKEND}",
            "--out", str(out), *extra,
        ])
        return code, out

    def test_end_to_end_with_mocks(self, tmp_path, capsys):
        code, out = self._run(tmp_path, "out")
        assert code == 0
        captured = capsys.readouterr().out
        assert "pages processed: 2" in captured
        assert "s/page" in captured and "pages/s" in captured
        obj = json.loads((out / "page0.json").read_text())
        classes = [c["class"] for c in obj["components"]]
        assert "table_caption" in classes
        [group] = [c for c in obj["components"] if c["class"] == "table_caption"]
        assert [c["class"] for c in group["children"]] == ["table", "caption"]
        assert group["children"][0]["data"][1] == ["680,900", ""]

    def test_crashing_backend_not_strict(self, tmp_path, capsys):
        crash = f"{PY} -c 'import sys; sys.exit(4)'"
        images = tmp_path / "images"
        make_images(images, 1)
        out = tmp_path / "out"
        args = [
            "extract", "--images-dir", str(images),
            "--detector-cmd", MOCK_DETECTOR,
            "--backend", f"title={crash}",
            "--backend", f"text,caption={MOCK_BACKEND}",
            "--backend", f"table={MOCK_BACKEND}",
            "--out", str(out),
        ]
        assert main(args) == 0
        obj = json.loads((out / "page0.json").read_text())
        [title] = [c for c in obj["components"] if c["class"] == "title"]
        assert title["data"] is None and "error" in title
        assert main(args + ["--strict"]) == 1

    def test_jobs_parallelism(self, tmp_path, capsys):
        code, out = self._run(tmp_path, "out4", ["--jobs", "4"])
        assert code == 0
        assert (out / "page1.json").exists()


class TestReportCmd:
    def test_renders_golden_table(self, tmp_path, capsys):
        report = {
            "config": {},
            "classes": [],
            "aggregate": {
                "ap50": 0.97, "ap50_95": 0.801, "precision": 0.911, "recall": 0.971,
                "f1": 0.94, "tp": 0, "fp": 0, "fn": 0,
            },
        }
        src = tmp_path / "report.json"
        src.write_text(json.dumps(report))
        assert main(["report", str(src)]) == 0
        assert capsys.readouterr().out == (DATA_DIR / "report_table_golden.txt").read_text()


class TestCliSurface:
    @pytest.mark.parametrize(
        "cmd", ["convert", "postprocess", "evaluate", "assemble", "extract", "report"]
    )
    def test_help(self, cmd, capsys):
        with pytest.raises(SystemExit) as e:
            main([cmd, "--help"])
        assert e.value.code == 0
        assert "usage" in capsys.readouterr().out

    def test_unknown_flag_rejected(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["evaluate", "x.jsonl", "--out", "r.json", "--bogus"])
        assert e.value.code == 2

    def test_no_stray_temp_files(self, tmp_path):
        src = tmp_path / "pages.jsonl"
        write_pages(src, perfect_pages())
        out = tmp_path / "report.json"
        main(["evaluate", str(src), "--out", str(out)])
        stray = [p for p in tmp_path.iterdir() if p.name.startswith(".")]
        assert stray == []

    def test_config_file_defaults_and_flag_precedence(self, tmp_path):
        pages = [
            PageRecord(
                "p1", 640, 640,
                detections=(det(0, 0, 10, 10, score=0.6), det(50, 50, 60, 60, score=0.3)),
            )
        ]
        src, dst = tmp_path / "in.jsonl", tmp_path / "out.jsonl"
        write_pages(src, pages)
        config = tmp_path / "cfg"
        config.write_text("score-threshold = 0.5\n")
        assert main(["postprocess", str(src), "--out", str(dst), "--config", str(config)]) == 0
        [page] = read_pages_jsonl(dst.read_text()).pages
        assert len(page.detections) == 1  # config raised the threshold
        assert main([
            "postprocess", str(src), "--out", str(dst),
            "--config", str(config), "--score-threshold", "0.1",
        ]) == 0
        [page] = read_pages_jsonl(dst.read_text()).pages
        assert len(page.detections) == 2  # explicit flag wins

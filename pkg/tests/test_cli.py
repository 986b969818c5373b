import json

import numpy as np
import pytest

from secam.cli import main
from secam.imaging import save_png
from secam.metrics import GroundTruth, save_ground_truth
from secam.imaging import BBox
from secam.tensor_io import read_tensor

from conftest import smooth_image, write_bundle


@pytest.fixture
def image_png(tmp_path):
    path = tmp_path / "scene.png"
    save_png(smooth_image(64, 64, seed=11), path)
    return path


@pytest.fixture
def bundle(tmp_path, rng):
    features = rng.standard_normal((8, 8, 8)).astype(np.float32)
    weights = rng.standard_normal(8).astype(np.float32)
    return write_bundle(
        tmp_path / "bundle",
        features,
        weights,
        "channel",
        class_id=3,
        image=smooth_image(64, 64, seed=11),
        logits=rng.standard_normal(10).astype(np.float32),
        class_name="widget",
    )


class TestSegmentCommand:
    def test_writes_three_files(self, tmp_path, image_png):
        out = tmp_path / "out"
        code = main(["segment", "--image", str(image_png), "--k", "9", "--out-dir", str(out)])
        assert code == 0
        assert (out / "scene_labels.png").exists()
        assert (out / "scene_labels.npy").exists()
        assert (out / "scene_boundaries.png").exists()
        labels = np.load(out / "scene_labels.npy")
        assert labels.dtype == np.int32
        assert labels.shape == (64, 64)

    def test_k_zero_usage_error(self, tmp_path, image_png):
        code = main(["segment", "--image", str(image_png), "--k", "0", "--out-dir", str(tmp_path)])
        assert code == 2

    def test_m_out_of_range(self, tmp_path, image_png):
        code = main(
            ["segment", "--image", str(image_png), "--k", "4", "--m", "25", "--out-dir", str(tmp_path)]
        )
        assert code == 2

    def test_missing_image(self, tmp_path):
        code = main(["segment", "--image", str(tmp_path / "nope.png"), "--out-dir", str(tmp_path)])
        assert code == 2


class TestCamCommand:
    def test_writes_float32_npy(self, tmp_path, bundle):
        out = tmp_path / "out"
        assert main(["cam", "--bundle", str(bundle), "--out-dir", str(out)]) == 0
        cam = read_tensor(out / "bundle_cam.npy")
        assert cam.dtype == np.float32
        assert cam.shape == (8, 8)

    def test_overlay_with_image(self, tmp_path, bundle, image_png):
        out = tmp_path / "out"
        code = main(
            ["cam", "--bundle", str(bundle), "--image", str(image_png),
             "--alpha", "0.4", "--out-dir", str(out)]
        )
        assert code == 0
        assert (out / "bundle_heatmap_a40.png").exists()

    def test_bad_bundle_exit_2(self, tmp_path):
        bad = tmp_path / "manifest.json"
        bad.write_text("{}")
        assert main(["cam", "--bundle", str(bad), "--out-dir", str(tmp_path)]) == 2


class TestExplainCommand:
    def run(self, bundle, out, *extra):
        return main(["explain", "--bundle", str(bundle), "--k", "9", "--out-dir", str(out), *extra])

    def test_outputs_and_selected_count(self, tmp_path, bundle):
        out = tmp_path / "out"
        assert self.run(bundle, out, "--n", "3") == 0
        data = json.loads((out / "input_explanation.json").read_text())
        assert len(data["selected"]) == 3
        assert data["class_id"] == 3
        assert data["class_name"] == "widget"
        assert (out / "input_mask.png").exists()
        assert (out / "input_masked.png").exists()
        timing = json.loads((out / "input_timing.json").read_text())
        assert set(timing) == {"segment_ms", "cam_ms", "average_select_ms", "total_ms"}

    def test_threshold_rule(self, tmp_path, bundle):
        out = tmp_path / "out"
        assert self.run(bundle, out, "--rule", "threshold", "--t", "0.5") == 0
        data = json.loads((out / "input_explanation.json").read_text())
        values = dict()
        for i, v in data["region_values"]:
            values[i] = v
        cutoff = 0.5 * max(values.values())
        expected = sorted(i for i, v in values.items() if v >= cutoff)
        assert data["selected"] == expected

    def test_threshold_requires_t(self, tmp_path, bundle):
        assert self.run(bundle, tmp_path, "--rule", "threshold") == 2

    def test_deterministic_json(self, tmp_path, bundle):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert self.run(bundle, out1) == 0
        assert self.run(bundle, out2) == 0
        first = (out1 / "input_explanation.json").read_bytes()
        second = (out2 / "input_explanation.json").read_bytes()
        assert first == second


class TestEvalCommand:
    def make_explanations(self, tmp_path, bundle):
        out = tmp_path / "exps"
        assert main(["explain", "--bundle", str(bundle), "--k", "9", "--out-dir", str(out)]) == 0
        return out

    def test_single_row_report(self, tmp_path, bundle):
        exps = self.make_explanations(tmp_path, bundle)
        truth_dir = tmp_path / "truth"
        truth_dir.mkdir()
        save_ground_truth(
            GroundTruth(image_id="input", class_id=3, boxes=[BBox(0, 0, 40, 40)]),
            truth_dir / "input_truth.json",
        )
        out = tmp_path / "report"
        assert main(["eval", "--explanations", str(exps), "--truth", str(truth_dir),
                     "--out-dir", str(out)]) == 0
        lines = (out / "report.csv").read_text().strip().splitlines()
        assert lines[0] == "image_id,method,iou,ebpg,runtime_ms"
        assert len(lines) == 2
        assert lines[1].startswith("input,secam,")
        report = json.loads((out / "report.json").read_text())
        assert 0.0 <= report[0]["iou"] <= 1.0
        assert 0.0 <= report[0]["ebpg"] <= 1.0
        assert report[0]["runtime_ms"] is not None

    def test_no_match_exit_3(self, tmp_path, bundle, capsys):
        exps = self.make_explanations(tmp_path, bundle)
        truth_dir = tmp_path / "truth"
        truth_dir.mkdir()
        save_ground_truth(
            GroundTruth(image_id="other", class_id=0, boxes=[BBox(0, 0, 5, 5)]),
            truth_dir / "other_truth.json",
        )
        assert main(["eval", "--explanations", str(exps), "--truth", str(truth_dir),
                     "--out-dir", str(tmp_path)]) == 3
        assert "input" in capsys.readouterr().err

    def test_empty_dir_exit_3(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert main(["eval", "--explanations", str(empty), "--truth", str(tmp_path),
                     "--out-dir", str(tmp_path)]) == 3


class TestRenderCommand:
    def test_masked_style(self, tmp_path, bundle, image_png):
        exps = tmp_path / "exps"
        assert main(["explain", "--bundle", str(bundle), "--k", "9", "--out-dir", str(exps)]) == 0
        out = tmp_path / "out"
        code = main(["render", "--style", "masked", "--image", str(image_png),
                     "--mask", str(exps / "input_mask.png"), "--dim", "0.25",
                     "--out-dir", str(out)])
        assert code == 0
        assert (out / "scene_masked_d25.png").exists()

    def test_boundaries_style(self, tmp_path, image_png):
        seg_out = tmp_path / "seg"
        assert main(["segment", "--image", str(image_png), "--k", "9",
                     "--out-dir", str(seg_out)]) == 0
        out = tmp_path / "out"
        code = main(["render", "--style", "boundaries", "--image", str(image_png),
                     "--labels", str(seg_out / "scene_labels.npy"), "--out-dir", str(out)])
        assert code == 0
        assert (out / "scene_boundaries.png").exists()

    def test_heatmap_style(self, tmp_path, bundle, image_png):
        cam_out = tmp_path / "cam"
        assert main(["cam", "--bundle", str(bundle), "--out-dir", str(cam_out)]) == 0
        out = tmp_path / "out"
        code = main(["render", "--style", "heatmap", "--image", str(image_png),
                     "--cam", str(cam_out / "bundle_cam.npy"), "--alpha", "0.7",
                     "--out-dir", str(out)])
        assert code == 0
        assert (out / "scene_heatmap_a70.png").exists()

    def test_missing_required_artifact_exit_2(self, tmp_path, image_png):
        code = main(["render", "--style", "masked", "--image", str(image_png),
                     "--out-dir", str(tmp_path)])
        assert code == 2


class TestConvertTruth:
    VOC = """<annotation>
  <filename>bird_01.png</filename>
  <object><name>n01833805</name>
    <bndbox><xmin>10</xmin><ymin>20</ymin><xmax>60</xmax><ymax>80</ymax></bndbox>
  </object>
</annotation>"""

    def test_voc_to_json(self, tmp_path):
        xml = tmp_path / "bird_01.xml"
        xml.write_text(self.VOC)
        out = tmp_path / "out"
        assert main(["convert-truth", "--xml", str(xml), "--class-id", "94",
                     "--out-dir", str(out)]) == 0
        data = json.loads((out / "bird_01_truth.json").read_text())
        assert data["image_id"] == "bird_01"
        assert data["class_id"] == 94
        # VOC is 1-based inclusive, ours is 0-based half-open
        assert data["boxes"] == [[9, 19, 60, 80]]

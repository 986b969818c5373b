"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers. Run with `pytest -s
tests/test_acceptance.py` to see the lines as they go by.
"""

import json
import time

import numpy as np
from scipy import ndimage

from secam.cam import class_score, compute_cam, upsample_to_image
from secam.cli import main
from secam.imaging import BBox, save_png, srgb_to_lab
from secam.metrics import ebpg, iou
from secam.secam import SelectionRule, explain, region_average, select_regions
from secam.slic import FULL, SegmentLabels, SlicParams, cluster, init_centers, segment
from secam.tensor_io import ExplanationInputs, WeightSpec
from secam.cam import CamMap

from conftest import five_d_kmeans_oracle, smooth_image, write_bundle


def report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_score_sum_identity_suite():
    """class_score over the map equals the pooled-head forward pass
    (mean-pool x h*w x weights, no bias) within 1e-5 relative, on 100
    seeded bundles with K in {1, 4, 64}, in under 5 seconds."""
    start = time.perf_counter()
    ks = (1, 4, 64)
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        k = ks[seed % 3]
        features = rng.standard_normal((k, 7, 7)).astype(np.float32)
        weights = rng.standard_normal(k).astype(np.float32)
        inputs = ExplanationInputs(
            features=features,
            weight_spec=WeightSpec(mode="channel", values=weights),
            class_id=0,
        )
        score = class_score(compute_cam(inputs))
        pooled = features.astype(np.float64).mean(axis=(1, 2))
        oracle = float(pooled @ weights.astype(np.float64)) * 7 * 7
        rel = abs(score - oracle) / max(abs(oracle), 1e-30)
        worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    report(
        "score-sum identity (100 bundles)",
        worst <= 1e-5 and elapsed < 5.0,
        f"worst rel err {worst:.2e}, {elapsed:.2f}s",
    )


def test_region_weighted_mean_identity():
    """Sum over regions of |s| * region mean equals the map total within
    1e-6 relative, for 100 random map/partition pairs."""
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        h, w = int(rng.integers(8, 40)), int(rng.integers(8, 40))
        raw = rng.integers(0, int(rng.integers(2, 12)), size=(h, w))
        _, compact = np.unique(raw, return_inverse=True)
        labels = compact.reshape(h, w).astype(np.int32)
        seg = SegmentLabels(labels=labels, region_count=int(labels.max()) + 1)
        cam = CamMap(values=rng.standard_normal((h, w)), class_id=0, resolution="image")
        values = region_average(cam, seg)
        weighted = float((values * seg.sizes()).sum())
        total = float(cam.values.sum())
        rel = abs(weighted - total) / max(abs(total), 1e-30)
        worst = max(worst, rel)
    report("region weighted-mean identity (100 pairs)", worst <= 1e-6, f"worst rel err {worst:.2e}")


def test_slic_partition_suite():
    """On 20 random 64x64 images: labels form a total partition, every
    region is 4-connected, and the full-search assignment cost never
    increases by more than 1e-6 between iterations."""
    for seed in range(20):
        rng = np.random.default_rng(seed)
        img = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
        params = SlicParams(k=16, search_mode=FULL)
        labels, _, costs = cluster(srgb_to_lab(img), params)
        for earlier, later in zip(costs, costs[1:]):
            assert later <= earlier + 1e-6, f"seed {seed}: cost rose {earlier} -> {later}"
        seg = segment(img, params)
        assert seg.sizes().sum() == 64 * 64, f"seed {seed}: not a partition"
        for region in range(seg.region_count):
            _, pieces = ndimage.label(seg.labels == region)
            assert pieces == 1, f"seed {seed}: region {region} in {pieces} pieces"

    # uniform image, k=4: final labeling must match plain 5-D k-means exactly
    img = np.full((64, 64, 3), 128, dtype=np.uint8)
    params = SlicParams(k=4, search_mode=FULL)
    seg = segment(img, params)
    lab = srgb_to_lab(img)
    oracle = five_d_kmeans_oracle(lab, init_centers(lab, params), params.max_iters, params.eps)
    uniq, first = np.unique(oracle.ravel(), return_index=True)
    remap = np.empty(int(oracle.max()) + 1, dtype=np.int64)
    remap[uniq[np.argsort(first)]] = np.arange(len(uniq))
    exact = bool((seg.labels == remap[oracle]).all())
    report("slic partition suite (20 images + uniform oracle)", exact, "oracle labeling matched")


def test_metric_exactness():
    """Analytic box/mask cases are exact, and EBPG census matches a naive
    per-pixel loop bit-for-bit on 1000 random pairs."""
    assert iou(BBox(1, 1, 9, 9), BBox(1, 1, 9, 9)) == 1.0
    assert iou(BBox(0, 0, 2, 2), BBox(6, 6, 9, 9)) == 0.0
    assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == 50 / 150
    mask75 = np.zeros((10, 30), dtype=bool)
    mask75[0:4, 0:25] = True
    assert ebpg(mask75, BBox(0, 0, 25, 3)) == 0.75

    rng = np.random.default_rng(7)
    for trial in range(1000):
        mask = rng.random((12, 12)) < 0.3
        if not mask.any():
            mask[int(rng.integers(12)), int(rng.integers(12))] = True
        x0, y0 = (int(v) for v in rng.integers(0, 9, 2))
        box = BBox(x0, y0, x0 + int(rng.integers(1, 4)), y0 + int(rng.integers(1, 4)))
        inside = total = 0
        for y in range(12):
            for x in range(12):
                if mask[y, x]:
                    total += 1
                    if box.x_min <= x < box.x_max and box.y_min <= y < box.y_max:
                        inside += 1
        got = ebpg(mask, box)
        assert got == inside / total, f"trial {trial}: {got} != {inside}/{total}"
    report("metric exactness (analytic + 1000-pair census)", True)


def test_explain_pipeline_performance():
    """Segmentation at k=49 on 224x224 plus a 2048x7x7 map, averaging and
    selection, inside 2000 ms wall-clock (soft target 500 ms)."""
    image = smooth_image(224, 224, seed=42)
    rng = np.random.default_rng(42)
    features = rng.standard_normal((2048, 7, 7)).astype(np.float32)
    weights = rng.standard_normal(2048).astype(np.float32)
    inputs = ExplanationInputs(
        features=features,
        weight_spec=WeightSpec(mode="channel", values=weights),
        class_id=0,
    )
    rule = SelectionRule(kind="top_n", n=3)

    t0 = time.perf_counter()
    seg = segment(image, SlicParams(k=49))
    t1 = time.perf_counter()
    cam = upsample_to_image(compute_cam(inputs), 224, 224)
    t2 = time.perf_counter()
    values = region_average(cam, seg)
    selected = select_regions(values, rule)
    mask = np.isin(seg.labels, sorted(selected))
    t3 = time.perf_counter()

    segment_ms = (t1 - t0) * 1000
    cam_ms = (t2 - t1) * 1000
    select_ms = (t3 - t2) * 1000
    total_ms = (t3 - t0) * 1000
    assert mask.any()
    report(
        "explain pipeline under 2000 ms",
        total_ms <= 2000.0,
        f"total {total_ms:.0f} ms (segment {segment_ms:.0f} + cam {cam_ms:.0f} "
        f"+ average/select {select_ms:.0f}; soft target 500)",
    )


def test_colorimetry():
    """Grays stay neutral (|a|, |b| <= 0.05 for all 256 levels) and the
    primaries match independently derived values within 0.01 per channel."""
    grays = np.arange(256, dtype=np.uint8)
    lab = srgb_to_lab(np.stack([grays, grays, grays], axis=-1)[None])
    neutral = float(np.abs(lab[..., 1:]).max())

    pinned = {
        (255, 0, 0): (53.2408, 80.0925, 67.2032),
        (0, 255, 0): (87.7347, -86.1827, 83.1793),
        (0, 0, 255): (32.2970, 79.1875, -107.8602),
    }
    worst = 0.0
    for rgb, expected in pinned.items():
        got = srgb_to_lab(np.array([[rgb]], dtype=np.uint8))[0, 0]
        worst = max(worst, float(np.abs(got - np.array(expected)).max()))
    report(
        "colorimetry (gray axis + primaries)",
        neutral <= 0.05 and worst <= 0.01,
        f"gray |a|,|b| max {neutral:.4f}, primary max err {worst:.4f}",
    )


def test_explain_cli_determinism(tmp_path):
    """Two runs of the explain command produce byte-identical explanation
    JSON (timing lives in its own file)."""
    rng = np.random.default_rng(3)
    bundle = write_bundle(
        tmp_path / "bundle",
        rng.standard_normal((16, 7, 7)).astype(np.float32),
        rng.standard_normal(16).astype(np.float32),
        "channel",
        class_id=1,
        image=smooth_image(96, 96, seed=8),
    )
    outputs = []
    for run in ("first", "second"):
        out = tmp_path / run
        code = main(["explain", "--bundle", str(bundle), "--k", "16", "--out-dir", str(out)])
        assert code == 0
        outputs.append((out / "input_explanation.json").read_bytes())
    identical = outputs[0] == outputs[1]
    report("explain determinism (byte-identical JSON)", identical)

"""SLIC superpixels: k-means-style clustering in (L, a, b, x, y) space.

Centers are stored as an (n, 5) float64 array with columns [l, a, b, x, y].
The pipeline is: grid-sample centers at interval S = sqrt(N/k), nudge each
center to the lowest-gradient spot in its 3x3 neighborhood, iterate
assignment and mean updates until center movement falls below eps, then
enforce 4-connectivity by absorbing stray fragments.

All tie-breaks go to the lowest center or component index, so identical
inputs always produce identical labels.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .imaging import srgb_to_lab

WINDOWED = "windowed"
FULL = "full"


@dataclass(frozen=True)
class SlicParams:
    """k: requested superpixel count. m: compactness in [1, 20], trading
    color fidelity against spatial regularity. eps: stop once the summed
    L2 movement of centers in labxy space drops below it."""

    k: int
    m: float = 10.0
    max_iters: int = 10
    eps: float = 1.0
    search_mode: str = WINDOWED

    def __post_init__(self):
        if self.k < 1:
            raise ArgumentError(f"k must be >= 1, got {self.k}")
        if not 1.0 <= self.m <= 20.0:
            raise ArgumentError(f"m must be in [1, 20], got {self.m}")
        if self.max_iters < 1:
            raise ArgumentError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.eps < 0:
            raise ArgumentError(f"eps must be >= 0, got {self.eps}")
        if self.search_mode not in (WINDOWED, FULL):
            raise ArgumentError(f"search_mode must be '{WINDOWED}' or '{FULL}'")


@dataclass(frozen=True)
class SegmentLabels:
    """Final superpixel partition: compact ids 0..region_count-1, one per pixel."""

    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ArgumentError(f"labels must be H x W, got shape {self.labels.shape}")
        counts = np.bincount(self.labels.ravel(), minlength=self.region_count)
        if self.labels.min() < 0 or len(counts) != self.region_count or not counts.all():
            raise ArgumentError("labels must use every id in 0..region_count-1")

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.region_count)


def image_gradient(lab: np.ndarray, x: int, y: int) -> float:
    """Squared-L2 color gradient at an interior pixel:
    G = ||I(x+1,y) - I(x-1,y)||^2 + ||I(x,y+1) - I(x,y-1)||^2."""
    h, w = lab.shape[:2]
    if not (1 <= x <= w - 2 and 1 <= y <= h - 2):
        raise ArgumentError(f"gradient needs interior coordinates, got ({x}, {y}) in {w}x{h}")
    gx = float(((lab[y, x + 1] - lab[y, x - 1]) ** 2).sum())
    gy = float(((lab[y + 1, x] - lab[y - 1, x]) ** 2).sum())
    return gx + gy


def _gradient_map(lab: np.ndarray) -> np.ndarray:
    """image_gradient evaluated everywhere; border pixels get +inf so the
    perturbation search never selects them."""
    h, w = lab.shape[:2]
    g = np.full((h, w), np.inf)
    if h >= 3 and w >= 3:
        gx = ((lab[1:-1, 2:] - lab[1:-1, :-2]) ** 2).sum(axis=-1)
        gy = ((lab[2:, 1:-1] - lab[:-2, 1:-1]) ** 2).sum(axis=-1)
        g[1:-1, 1:-1] = gx + gy
    return g


def _grid_interval(n_pixels: int, k: int) -> float:
    return math.sqrt(n_pixels / k)


def init_centers(lab: np.ndarray, params: SlicParams) -> np.ndarray:
    """Seed centers on a grid of interval S = sqrt(N/k), then move each to
    the lowest-gradient position of its 3x3 neighborhood (ties keep the
    original spot, then the first candidate in row-major order)."""
    h, w = lab.shape[:2]
    n = h * w
    if params.k > n:
        raise ArgumentError(f"k={params.k} exceeds pixel count {n}")
    step = max(1, round(_grid_interval(n, params.k)))

    grad = _gradient_map(lab)
    centers = []
    for cy in range(step // 2, h, step):
        for cx in range(step // 2, w, step):
            best_x, best_y = cx, cy
            best_g = grad[cy, cx]
            if np.isfinite(best_g):  # border seeds stay put
                for ny in range(cy - 1, cy + 2):
                    for nx in range(cx - 1, cx + 2):
                        if 0 <= ny < h and 0 <= nx < w and grad[ny, nx] < best_g:
                            best_g = grad[ny, nx]
                            best_x, best_y = nx, ny
            l, a, b = lab[best_y, best_x]
            centers.append([l, a, b, float(best_x), float(best_y)])
    return np.array(centers, dtype=np.float64)


def _assign(lab, centers, params, s_real, window):
    """One assignment sweep. Returns (labels, per-pixel D_s of the chosen
    center). window is the half-width of the search region in pixels, or
    None to consider every center for every pixel."""
    h, w = lab.shape[:2]
    ratio = params.m / s_real
    best = np.full((h, w), np.inf)
    labels = np.full((h, w), -1, dtype=np.int32)

    for i, (cl, ca, cb, cx, cy) in enumerate(centers):
        if window is None:
            y0, y1, x0, x1 = 0, h, 0, w
        else:
            y0 = max(0, int(round(cy)) - window)
            y1 = min(h, int(round(cy)) + window + 1)
            x0 = max(0, int(round(cx)) - window)
            x1 = min(w, int(round(cx)) + window + 1)
        patch = lab[y0:y1, x0:x1]
        d_lab = np.sqrt(
            (patch[..., 0] - cl) ** 2 + (patch[..., 1] - ca) ** 2 + (patch[..., 2] - cb) ** 2
        )
        yy = np.arange(y0, y1, dtype=np.float64)[:, None]
        xx = np.arange(x0, x1, dtype=np.float64)[None, :]
        d_xy = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        d = d_lab + ratio * d_xy
        region = best[y0:y1, x0:x1]
        better = d < region
        region[better] = d[better]
        labels[y0:y1, x0:x1][better] = i

    missed = labels < 0
    if missed.any():
        # centers drifted away from some pixels; fall back to nearest by d_xy
        ys, xs = np.nonzero(missed)
        dx = xs[:, None] - centers[None, :, 3]
        dy = ys[:, None] - centers[None, :, 4]
        nearest = np.argmin(dx**2 + dy**2, axis=1)
        labels[ys, xs] = nearest
        chosen = centers[nearest]
        d_lab = np.sqrt(((lab[ys, xs] - chosen[:, :3]) ** 2).sum(axis=1))
        d_xy = np.sqrt((xs - chosen[:, 3]) ** 2 + (ys - chosen[:, 4]) ** 2)
        best[ys, xs] = d_lab + ratio * d_xy
    return labels, best


def assign_labels(lab: np.ndarray, centers: np.ndarray, params: SlicParams) -> np.ndarray:
    """Provisional per-pixel labels: each pixel takes the center minimizing
    D_s = d_lab + (m/S) * d_xy, lowest center index on ties. Windowed mode
    only considers centers within a 2S x 2S window of the pixel."""
    if len(centers) == 0:
        raise ArgumentError("need at least one center")
    h, w = lab.shape[:2]
    s_real = _grid_interval(h * w, params.k)
    window = None if params.search_mode == FULL else max(1, round(s_real))
    labels, _ = _assign(lab, centers, params, s_real, window)
    return labels


def update_centers(
    lab: np.ndarray, labels: np.ndarray, centers: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Move each center to the mean labxy vector of its member pixels.
    Empty clusters keep their previous center; the second return value
    flags them."""
    h, w = lab.shape[:2]
    n = len(centers)
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n).astype(np.float64)

    new = np.empty_like(centers)
    for c in range(3):
        new[:, c] = np.bincount(flat, weights=lab[..., c].ravel(), minlength=n)
    xx, yy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    new[:, 3] = np.bincount(flat, weights=xx.ravel(), minlength=n)
    new[:, 4] = np.bincount(flat, weights=yy.ravel(), minlength=n)

    empty = counts == 0
    nz = ~empty
    new[nz] /= counts[nz, None]
    new[empty] = centers[empty]
    return new, empty


def cluster(lab: np.ndarray, params: SlicParams) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Run init plus the assign/update loop on a Lab image.

    Returns provisional labels, final centers, and the total assignment
    cost (sum of chosen D_s over pixels) recorded at every iteration.
    """
    h, w = lab.shape[:2]
    s_real = _grid_interval(h * w, params.k)
    window = None if params.search_mode == FULL else max(1, round(s_real))
    centers = init_centers(lab, params)

    labels = None
    costs: list[float] = []
    for _ in range(params.max_iters):
        labels, best = _assign(lab, centers, params, s_real, window)
        costs.append(float(best.sum()))
        new_centers, _ = update_centers(lab, labels, centers)
        movement = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).sum())
        centers = new_centers
        if movement < params.eps:
            break
    return labels, centers, costs


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:  # path compression
            p[a], a = root, p[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:  # lowest root id wins, keeps relabeling deterministic
                ra, rb = rb, ra
            self.parent[rb] = ra
        return ra


def _row_runs(labels: np.ndarray):
    """Run-length encode the label map in scan order. Returns flat start
    offsets, lengths, run labels, and the index of each row's first run."""
    h, w = labels.shape
    flat = labels.ravel()
    n = flat.size
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    row_starts = np.arange(1, h) * w
    starts = np.unique(np.concatenate(([0], change, row_starts)))
    ends = np.append(starts[1:], n)
    run_of_row = np.searchsorted(starts, np.arange(h) * w)
    return starts, ends - starts, flat[starts], run_of_row


def enforce_connectivity(labels: np.ndarray, min_size: int | None = None) -> SegmentLabels:
    """Split each provisional label into its 4-connected components, absorb
    components smaller than min_size into their largest 4-adjacent neighbor,
    and re-compact ids in scan order.

    min_size defaults to S^2/4 with S derived from the number of distinct
    provisional labels, i.e. N / (4 * k).
    """
    labels = np.asarray(labels)
    h, w = labels.shape
    n = h * w
    if min_size is None:
        k = len(np.unique(labels))
        min_size = int(n / (4 * k))

    starts, lengths, run_labels, run_of_row = _row_runs(labels)
    r = len(starts)
    col_start = starts % w
    col_end = col_start + lengths

    uf = _UnionFind(r)
    edges = []  # adjacency between runs of different labels
    for row in range(h):
        lo = run_of_row[row]
        hi = run_of_row[row + 1] if row + 1 < h else r
        for i in range(lo + 1, hi):
            edges.append((i - 1, i))
        if row + 1 >= h:
            continue
        # sweep overlapping (run, run-below) pairs with two pointers
        lo2 = run_of_row[row + 1]
        hi2 = run_of_row[row + 2] if row + 2 < h else r
        i, j = lo, lo2
        while i < hi and j < hi2:
            if col_start[i] < col_end[j] and col_start[j] < col_end[i]:
                if run_labels[i] == run_labels[j]:
                    uf.union(i, j)
                else:
                    edges.append((i, j))
            if col_end[i] <= col_end[j]:
                i += 1
            else:
                j += 1

    comp_of_run = np.fromiter((uf.find(i) for i in range(r)), dtype=np.int64, count=r)
    roots, comp_of_run = np.unique(comp_of_run, return_inverse=True)
    n_comp = len(roots)
    sizes = np.bincount(comp_of_run, weights=lengths, minlength=n_comp).astype(np.int64)

    adjacency: list[set] = [set() for _ in range(n_comp)]
    for a, b in edges:
        ca, cb = comp_of_run[a], comp_of_run[b]
        if ca != cb:
            adjacency[ca].add(cb)
            adjacency[cb].add(ca)

    merge = _UnionFind(n_comp)
    live_size = sizes.copy()
    heap = [(int(sizes[c]), c) for c in range(n_comp)]
    heapq.heapify(heap)
    while heap:
        size, c = heapq.heappop(heap)
        if merge.find(c) != c or size != live_size[c]:
            continue  # stale entry
        if size >= min_size:
            break
        neighbors = {merge.find(x) for x in adjacency[c]}
        neighbors.discard(c)
        if not neighbors:
            continue  # nothing adjacent to absorb into
        target = max(neighbors, key=lambda x: (live_size[x], -x))
        root = merge.union(c, target)
        other = target if root == c else c
        live_size[root] += live_size[other]
        if len(adjacency[other]) > len(adjacency[root]):
            adjacency[root], adjacency[other] = adjacency[other], adjacency[root]
        adjacency[root] |= adjacency[other]
        adjacency[other] = set()
        heapq.heappush(heap, (int(live_size[root]), root))

    final_comp = np.fromiter((merge.find(int(c)) for c in comp_of_run), dtype=np.int64, count=r)
    ordered, run_final = np.unique(final_comp, return_inverse=True)
    # np.unique sorts by root id; remap to first-appearance order over runs
    first_seen = np.full(len(ordered), r, dtype=np.int64)
    np.minimum.at(first_seen, run_final, np.arange(r))
    rank = np.empty(len(ordered), dtype=np.int64)
    rank[np.argsort(first_seen, kind="stable")] = np.arange(len(ordered))
    run_final = rank[run_final]

    out = np.repeat(run_final.astype(np.int32), lengths).reshape(h, w)
    return SegmentLabels(labels=out, region_count=len(ordered))


def segment(image: np.ndarray, params: SlicParams) -> SegmentLabels:
    """Full pipeline on an (H, W, 3) uint8 sRGB image: Lab conversion,
    clustering, connectivity enforcement."""
    h, w = image.shape[:2]
    if params.k > h * w:
        raise ArgumentError(f"k={params.k} exceeds pixel count {h * w}")
    lab = srgb_to_lab(image)
    labels, _, _ = cluster(lab, params)
    s_real = _grid_interval(h * w, params.k)
    return enforce_connectivity(labels, min_size=int(s_real * s_real / 4))

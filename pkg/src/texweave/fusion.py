"""Fusing per-crop defect labels into a mask, its edges and a report.

Pipeline for one image: Gabor space -> four corner crops -> block
energies -> Ward two-way split per crop -> union of defective block
perimeters -> hole filling -> Canny edges -> overlay.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import ndimage as ndi

from .blocks import BlockGrid, Periodicity, block_energies, four_corner_crops
from .clustering import ClusterAssignment, Dendrogram, cluster_blocks
from .evaluation import ConfusionCounts, Metrics, confusion, ground_truth_labels, metrics
from .filtering import gabor_space
from .gabor import GaborBankConfig
from .imaging import PaddingMode, as_raster

log = logging.getLogger(__name__)

_FOUR = ndi.generate_binary_structure(2, 1)
_EIGHT = ndi.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class InspectOptions:
    padding: PaddingMode = "reflect"
    method: str = "fft"
    jobs: int = 1
    min_separation: float | None = None
    min_overlap: float = 0.0
    canny_sigma: float = 1.0
    canny_high: float = 0.2
    canny_low: float = 0.4

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CropResult:
    grid: BlockGrid
    tree: Dendrogram
    assignment: ClusterAssignment
    truth: np.ndarray | None = None


@dataclass
class InspectionReport:
    image: np.ndarray
    period: Periodicity
    config: GaborBankConfig
    options: InspectOptions
    gabor: np.ndarray
    crops: list[CropResult]
    boundaries: np.ndarray
    mask: np.ndarray
    edges: np.ndarray
    counts: ConfusionCounts | None = None
    metrics: Metrics | None = field(default=None)

    @property
    def grids(self) -> list[BlockGrid]:
        return [c.grid for c in self.crops]

    def to_json(self) -> dict:
        crops = []
        for c in self.crops:
            g = c.grid
            entry = {
                "corner": g.crop.corner,
                "row_offset": g.crop.row_offset,
                "col_offset": g.crop.col_offset,
                "height": g.crop.height,
                "width": g.crop.width,
                "block_rows": g.rows,
                "block_cols": g.cols,
                "energies": g.energies.tolist(),
                "defective": g.defective.astype(int).tolist(),
                "cluster_sizes": list(c.assignment.sizes),
                "defective_cluster": c.assignment.defective_cluster,
                "final_merge_cost": c.tree.merges[-1].cost,
            }
            if c.truth is not None:
                entry["truth"] = c.truth.astype(int).tolist()
            crops.append(entry)
        m, n = self.image.shape
        out = {
            "image": {"height": m, "width": n},
            "periodicity": {"rows": self.period.rows, "cols": self.period.cols},
            "gabor": {**asdict(self.config), "kernel_height": self.config.kernel_shape[0],
                      "kernel_width": self.config.kernel_shape[1]},
            "options": self.options.as_dict(),
            "crops": crops,
            "defective_blocks": int(sum(int(c.grid.defective.sum()) for c in self.crops)),
            "mask_pixels": int(self.mask.sum()),
            "edge_pixels": int(self.edges.sum()),
            "evaluation": None,
        }
        if self.counts is not None:
            out["evaluation"] = {
                "unit": "per-crop block",
                "min_overlap": self.options.min_overlap,
                "counts": self.counts.as_dict(),
                "metrics": self.metrics.as_dict(),
            }
        return out


def block_boundaries(grids: list[BlockGrid], shape: tuple[int, int]) -> np.ndarray:
    """One-pixel perimeters of every defective block, OR-ed over crops."""
    out = np.zeros(shape, dtype=bool)
    for g in grids:
        for i, j in zip(*np.nonzero(g.defective)):
            top, left, bottom, right = g.block_bounds(int(i), int(j))
            out[top, left:right] = True
            out[bottom - 1, left:right] = True
            out[top:bottom, left] = True
            out[top:bottom, right - 1] = True
    return out


def fill_holes(boundaries) -> np.ndarray:
    """Fill every background region not 4-connected to the image border."""
    fg = np.asarray(boundaries).astype(bool)
    labels, _ = ndi.label(~fg, structure=_FOUR)
    edge_labels = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    outside = np.isin(labels, edge_labels[edge_labels > 0])
    return ~outside


def _gaussian_kernel(sigma: float, size: int = 5) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2
    g = np.exp(-(r * r) / (2 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def canny_edges(mask, sigma: float = 1.0, high: float = 0.2, low: float = 0.4) -> np.ndarray:
    """Canny edges of a binary mask.

    5x5 Gaussian smoothing, Sobel gradients, non-maximum suppression along
    the quantized gradient direction and hysteresis with thresholds
    ``high * max|grad|`` and ``low * high * max|grad|``.
    """
    img = np.asarray(mask, dtype=np.float64)
    smooth = ndi.convolve(img, _gaussian_kernel(sigma), mode="nearest")
    gy = ndi.sobel(smooth, axis=0, mode="nearest")
    gx = ndi.sobel(smooth, axis=1, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = float(mag.max())
    if peak <= 0.0:
        return np.zeros(img.shape, dtype=bool)

    # 0: horizontal gradient, 1: 45 deg, 2: vertical, 3: 135 deg
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    sector = np.round(angle / (np.pi / 4)).astype(int) % 4
    padded = np.pad(mag, 1)
    m, n = mag.shape

    def shifted(dr, dc):
        return padded[1 + dr:1 + dr + m, 1 + dc:1 + dc + n]

    steps = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros(mag.shape, dtype=bool)
    for s, (dr, dc) in steps.items():
        local = (mag >= shifted(dr, dc)) & (mag >= shifted(-dr, -dc))
        keep |= (sector == s) & local
    thin = keep & (mag > 0)

    hi = high * peak
    lo = low * hi
    weak = thin & (mag >= lo)
    strong = thin & (mag >= hi)
    labels, count = ndi.label(weak, structure=_EIGHT)
    if count == 0:
        return np.zeros(img.shape, dtype=bool)
    seeded = np.zeros(count + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return seeded[labels]


def _crop_result(fused, crop, period, opts, gt) -> CropResult:
    grid = block_energies(fused, crop, period)
    tree, assignment = cluster_blocks(grid.energies, opts.min_separation)
    grid.defective = assignment.defective.reshape(grid.energies.shape)
    truth = None
    if gt is not None:
        truth = ground_truth_labels(gt, crop, period, opts.min_overlap, fused.shape)
    return CropResult(grid, tree, assignment, truth)


def inspect(img, period: Periodicity, cfg: GaborBankConfig | None = None,
            opts: InspectOptions | None = None, gt=None) -> InspectionReport:
    """Run the full detection pipeline on one grayscale raster.

    The kernel window defaults to half the periodic unit. Supplying a
    ground-truth mask adds block-level confusion counts and metrics.
    """
    img = as_raster(img)
    cfg = cfg or GaborBankConfig()
    opts = opts or InspectOptions()
    if cfg.kernel_height is None or cfg.kernel_width is None:
        cfg = cfg.with_periodicity(period)
    if gt is not None:
        gt = np.asarray(gt).astype(bool)
        if gt.shape != img.shape:
            raise ValueError(f"ground-truth shape {gt.shape} does not match image {img.shape}")
    crops = four_corner_crops(*img.shape, period)

    fused = gabor_space(img, cfg, opts.padding, opts.method, opts.jobs)
    if opts.jobs > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(lambda c: _crop_result(fused, c, period, opts, gt), crops))
    else:
        results = [_crop_result(fused, c, period, opts, gt) for c in crops]
    for r in results:
        log.debug("%s: %d/%d blocks defective", r.grid.crop.corner,
                  int(r.grid.defective.sum()), r.grid.energies.size)

    boundaries = block_boundaries([r.grid for r in results], img.shape)
    mask = fill_holes(boundaries)
    edges = canny_edges(mask, opts.canny_sigma, opts.canny_high, opts.canny_low)
    report = InspectionReport(img, period, cfg, opts, fused, results, boundaries, mask, edges)
    if gt is not None:
        counts = ConfusionCounts()
        for r in results:
            counts = counts + confusion(r.grid.defective, r.truth)
        report.counts = counts
        report.metrics = metrics(counts)
    return report

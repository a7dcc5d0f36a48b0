"""Block-level confusion counts and precision / recall / accuracy."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .blocks import CropSpec, Periodicity


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    accuracy: float

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(num: int, den: int, vacuous: bool) -> float:
    # 0/0: 1.0 when there was nothing to find, else 0.0
    if den == 0:
        return 1.0 if vacuous else 0.0
    return num / den


def metrics(c: ConfusionCounts) -> Metrics:
    """Precision TP/(TP+FP), recall TP/(TP+FN), accuracy (TP+TN)/total.

    When a denominator is zero the ratio is 1.0 if the image held no
    defective blocks (TP+FN == 0) and 0.0 otherwise.
    """
    nothing_to_find = c.tp + c.fn == 0
    return Metrics(
        precision=_ratio(c.tp, c.tp + c.fp, nothing_to_find),
        recall=_ratio(c.tp, c.tp + c.fn, nothing_to_find),
        accuracy=_ratio(c.tp + c.tn, c.total, True),
    )


def confusion(predicted, truth) -> ConfusionCounts:
    p = np.asarray(predicted, dtype=bool).ravel()
    t = np.asarray(truth, dtype=bool).ravel()
    if p.shape != t.shape:
        raise ValueError(f"label lengths differ: {p.size} predicted vs {t.size} truth")
    return ConfusionCounts(
        tp=int(np.sum(p & t)), tn=int(np.sum(~p & ~t)),
        fp=int(np.sum(p & ~t)), fn=int(np.sum(~p & t)),
    )


def score(predicted, truth) -> tuple[ConfusionCounts, Metrics]:
    counts = confusion(predicted, truth)
    return counts, metrics(counts)


def ground_truth_labels(gt_mask, crop: CropSpec, period: Periodicity, min_overlap: float = 0.0,
                        image_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Per-block truth for one crop.

    A block is truly defective when the fraction of ground-truth pixels in
    it is strictly greater than ``min_overlap``.
    """
    gt = np.asarray(gt_mask)
    if gt.ndim != 2:
        raise ValueError("ground-truth mask must be 2-D")
    if image_shape is not None and gt.shape != tuple(image_shape):
        raise ValueError(f"ground-truth shape {gt.shape} does not match image {tuple(image_shape)}")
    if not 0.0 <= min_overlap <= 1.0:
        raise ValueError("min_overlap must lie in [0, 1]")
    rows, cols = crop.height // period.rows, crop.width // period.cols
    region = gt[crop.window()].astype(bool)
    if region.shape != (crop.height, crop.width):
        raise ValueError(f"crop {crop} does not fit a mask of shape {gt.shape}")
    counts = region.reshape(rows, period.rows, cols, period.cols).sum(axis=(1, 3))
    return counts / (period.rows * period.cols) > min_overlap

"""Batch inspection over a CSV manifest with per-group pooled metrics."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .blocks import Periodicity
from .evaluation import ConfusionCounts, metrics
from .fusion import InspectOptions, inspect
from .gabor import GaborBankConfig
from .imaging import load_grayscale

log = logging.getLogger(__name__)

MANIFEST_FIELDS = ("image", "period_rows", "period_cols", "gt", "group")


@dataclass(frozen=True)
class ManifestRow:
    image: Path
    period: Periodicity
    gt: Path | None = None
    group: str = ""


@dataclass
class RowResult:
    row: ManifestRow
    ok: bool
    error: str | None = None
    counts: ConfusionCounts | None = None
    defective_blocks: int = 0

    def to_json(self) -> dict:
        out = {
            "image": str(self.row.image),
            "group": self.row.group,
            "period_rows": self.row.period.rows,
            "period_cols": self.row.period.cols,
            "gt": str(self.row.gt) if self.row.gt else None,
            "status": "ok" if self.ok else "failed",
        }
        if not self.ok:
            out["error"] = self.error
            return out
        out["defective_blocks"] = self.defective_blocks
        if self.counts is not None:
            out["counts"] = self.counts.as_dict()
            out["metrics"] = metrics(self.counts).as_dict()
        return out


def read_manifest(path) -> list[ManifestRow]:
    """Parse a manifest CSV; relative paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"image", "period_rows", "period_cols"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: manifest lacks columns {sorted(missing)}")
        for rec in reader:
            gt = (rec.get("gt") or "").strip()
            rows.append(ManifestRow(
                image=base / rec["image"].strip(),
                period=Periodicity(int(rec["period_rows"]), int(rec["period_cols"])),
                gt=base / gt if gt else None,
                group=(rec.get("group") or "").strip(),
            ))
    return rows


def write_manifest(rows: list[ManifestRow], path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MANIFEST_FIELDS)
        for r in rows:
            w.writerow([r.image, r.period.rows, r.period.cols, r.gt or "", r.group])


def _run_row(row: ManifestRow, cfg: GaborBankConfig, opts: InspectOptions) -> RowResult:
    try:
        img = load_grayscale(row.image)
        gt = load_grayscale(row.gt) > 0.5 if row.gt else None
        report = inspect(img, row.period, cfg, opts, gt)
    except Exception as exc:  # a bad row must not sink the whole corpus
        log.warning("row %s failed: %s", row.image, exc)
        return RowResult(row, False, error=f"{type(exc).__name__}: {exc}")
    return RowResult(row, True, counts=report.counts,
                     defective_blocks=int(sum(int(g.defective.sum()) for g in report.grids)))


def _summary(counts: ConfusionCounts, images: int) -> dict:
    return {"images": images, "counts": counts.as_dict(), "metrics": metrics(counts).as_dict()}


def aggregate(results: list[RowResult]) -> dict:
    """Micro-averaged metrics per group and overall, over rows with truth."""
    groups: dict[str, tuple[ConfusionCounts, int]] = {}
    overall, n_overall = ConfusionCounts(), 0
    for r in results:
        if not r.ok or r.counts is None:
            continue
        c, n = groups.get(r.row.group, (ConfusionCounts(), 0))
        groups[r.row.group] = (c + r.counts, n + 1)
        overall, n_overall = overall + r.counts, n_overall + 1
    return {
        "groups": {g: _summary(c, n) for g, (c, n) in sorted(groups.items())},
        "overall": _summary(overall, n_overall) if n_overall else None,
    }


def corpus_run(rows: list[ManifestRow], cfg: GaborBankConfig | None = None,
               opts: InspectOptions | None = None, jobs: int = 1,
               group: str | None = None) -> tuple[dict, bool]:
    """Inspect every row and pool confusion counts.

    Returns the report and whether every selected row succeeded; an empty
    selection counts as failure.
    """
    cfg = cfg or GaborBankConfig()
    opts = opts or InspectOptions()
    if group is not None:
        rows = [r for r in rows if r.group == group]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda r: _run_row(r, cfg, opts), rows))
    else:
        results = [_run_row(r, cfg, opts) for r in rows]
    report = {
        "unit": "per-crop block",
        "averaging": "micro (counts pooled before division)",
        "images": [r.to_json() for r in results],
        "failed": sum(not r.ok for r in results),
        **aggregate(results),
    }
    ok = bool(results) and all(r.ok for r in results)
    return report, ok

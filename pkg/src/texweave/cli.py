"""Command line: ``texweave inspect | corpus | synth``.

Exit status is 0 on success, 1 when the pipeline fails (or any corpus
row fails) and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .blocks import Periodicity
from .corpus import corpus_run, read_manifest
from .fusion import InspectOptions, InspectionReport, inspect
from .gabor import GaborBankConfig
from .imaging import PADDING_MODES, load_grayscale, minmax_normalize, save_grayscale, save_overlay
from .synth import DEFECTS, KINDS, synthesize

log = logging.getLogger("texweave")


class _UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on; round-trips through JSON."""

    input: list[str] | None = None
    manifest: str | None = None
    period_rows: int | None = None
    period_cols: int | None = None
    scales: int = 5
    orientations: int = 8
    sigma: float = 2 * math.pi
    kmax: float = math.pi / 2
    spacing: float = math.sqrt(2)
    padding: str = "reflect"
    out: str = "."
    gt: str | None = None
    min_overlap: float = 0.0
    min_separation: float | None = None
    jobs: int = 1
    canny_sigma: float = 1.0
    canny_high: float = 0.2
    canny_low: float = 0.4
    group: str | None = None
    dump_gabor_space: bool = False
    dump_features: bool = False
    dump_dendrogram: bool = False

    def bank(self) -> GaborBankConfig:
        return GaborBankConfig(self.scales, self.orientations, self.sigma, self.kmax, self.spacing)

    def options(self) -> InspectOptions:
        return InspectOptions(padding=self.padding, jobs=self.jobs, min_separation=self.min_separation,
                              min_overlap=self.min_overlap, canny_sigma=self.canny_sigma,
                              canny_high=self.canny_high, canny_low=self.canny_low)

    def period(self) -> Periodicity:
        return Periodicity(self.period_rows, self.period_cols)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("Gabor bank")
    g.add_argument("--scales", type=int, help="number of scales (default 5)")
    g.add_argument("--orientations", type=int, help="number of orientations (default 8)")
    g.add_argument("--sigma", type=float, help="envelope width (default 2*pi)")
    g.add_argument("--kmax", type=float, help="largest wavenumber (default pi/2)")
    g.add_argument("--spacing", type=float, help="scale spacing factor f (default sqrt(2))")
    p.add_argument("--padding", choices=PADDING_MODES, help="border handling (default reflect)")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--min-overlap", type=float, help="truth fraction a block needs to count as defective")
    p.add_argument("--min-separation", type=float,
                   help="declare no defect unless final merge cost > TAU x median merge cost (off by default)")
    p.add_argument("--jobs", type=int, help="worker threads (results do not depend on it)")
    c = p.add_argument_group("edge tracing")
    c.add_argument("--canny-sigma", type=float, help="Gaussian smoothing width (default 1.0)")
    c.add_argument("--canny-high", type=float, help="high threshold as a fraction of the peak gradient (default 0.2)")
    c.add_argument("--canny-low", type=float, help="low threshold as a fraction of the high one (default 0.4)")
    p.add_argument("--config", help="JSON RunConfig; its values override flags")
    p.add_argument("--save-config", help="write the effective RunConfig as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="texweave", description="Periodic texture defect detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="inspect one or more images")
    p.add_argument("--input", nargs="+", help="PNG or PGM image(s)")
    p.add_argument("--period-rows", type=int, help="rows per periodic unit")
    p.add_argument("--period-cols", type=int, help="columns per periodic unit")
    p.add_argument("--gt", help="ground-truth mask (single input only)")
    p.add_argument("--dump-gabor-space", action="store_true", default=None)
    p.add_argument("--dump-features", action="store_true", default=None)
    p.add_argument("--dump-dendrogram", action="store_true", default=None)
    _common(p)

    p = sub.add_parser("corpus", help="inspect every row of a manifest and pool metrics")
    p.add_argument("--manifest", help="CSV with columns image,period_rows,period_cols,gt,group")
    p.add_argument("--group", help="only rows with this group tag")
    _common(p)

    p = sub.add_parser("synth", help="generate a periodic texture with an optional defect")
    p.add_argument("--kind", choices=KINDS, default="checker")
    p.add_argument("--periods", type=int, nargs=2, default=(8, 8), metavar=("ROWS", "COLS"))
    p.add_argument("--unit", type=int, nargs=2, default=(25, 25), metavar=("ROWS", "COLS"))
    p.add_argument("--defect", choices=DEFECTS, default="none")
    p.add_argument("--straddle", action="store_true", help="centre the defect on a block corner")
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="synth", help="output file stem")
    p.add_argument("--out", default=".")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    if getattr(args, "config", None):
        override = RunConfig.from_json(Path(args.config).read_text())
        for f in fields(RunConfig):
            setattr(cfg, f.name, getattr(override, f.name))
    return cfg


def _write_report(report: InspectionReport, stem: Path, img, cfg: RunConfig) -> None:
    save_overlay(img, report.edges, stem.with_name(stem.name + ".overlay.png"))
    save_grayscale(report.mask.astype(float), stem.with_name(stem.name + ".mask.png"))
    stem.with_name(stem.name + ".report.json").write_text(json.dumps(report.to_json(), indent=2))
    if cfg.dump_gabor_space:
        save_grayscale(minmax_normalize(report.gabor), stem.with_name(stem.name + ".gabor.png"))
    if cfg.dump_features:
        with open(stem.with_name(stem.name + ".features.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["crop", "block_row", "block_col", "energy"])
            for g in report.grids:
                for (i, j), e in np.ndenumerate(g.energies):
                    w.writerow([g.crop.corner, i, j, repr(float(e))])
    if cfg.dump_dendrogram:
        with open(stem.with_name(stem.name + ".dendrogram.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["crop", "step", "cluster_a", "cluster_b", "merge_cost", "new_size"])
            for c in report.crops:
                for step, m in enumerate(c.tree.merges):
                    w.writerow([c.grid.crop.corner, step, m.a, m.b, repr(m.cost), m.size])


def cmd_inspect(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.gt and len(cfg.input) != 1:
        raise _UsageError("--gt needs exactly one --input")
    status = 0
    for path in cfg.input:
        try:
            img = load_grayscale(path)
            gt = load_grayscale(cfg.gt) > 0.5 if cfg.gt else None
            report = inspect(img, cfg.period(), cfg.bank(), cfg.options(), gt)
            _write_report(report, out / Path(path).stem, img, cfg)
        except (OSError, ValueError) as exc:
            log.error("%s: %s", path, exc)
            status = 1
            continue
        summary = f"{path}: {report.to_json()['defective_blocks']} defective blocks"
        if report.metrics is not None:
            m = report.metrics
            summary += f", precision {m.precision:.3f} recall {m.recall:.3f} accuracy {m.accuracy:.3f}"
        print(summary)
    return status


def cmd_corpus(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        rows = read_manifest(cfg.manifest)
    except (OSError, ValueError) as exc:
        log.error("manifest %s: %s", cfg.manifest, exc)
        return 1
    report, ok = corpus_run(rows, cfg.bank(), cfg.options(), jobs=cfg.jobs, group=cfg.group)
    (out / "corpus.report.json").write_text(json.dumps(report, indent=2))
    overall = report["overall"]
    if overall:
        m = overall["metrics"]
        print(f"{overall['images']} images: precision {m['precision']:.3f} "
              f"recall {m['recall']:.3f} accuracy {m['accuracy']:.3f}")
    if not report["images"]:
        log.error("manifest selection is empty")
    return 0 if ok else 1


def cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    img, gt = synthesize(args.kind, tuple(args.periods), Periodicity(*args.unit), args.defect,
                         args.seed, aligned=not args.straddle, noise=args.noise)
    save_grayscale(img, out / f"{args.name}.png")
    save_grayscale(gt.astype(float), out / f"{args.name}.gt.png")
    print(out / f"{args.name}.png")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("TEXWEAVE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth":
        if args.periods[0] < 2 or args.periods[1] < 2:
            parser.error("--periods needs at least 2 in each axis")
        if min(args.unit) < 2:
            parser.error("--unit needs at least 2 pixels per axis")
        return cmd_synth(args)
    try:
        cfg = resolve_config(args)
    except (OSError, ValueError, TypeError) as exc:
        parser.error(f"bad --config: {exc}")
    if cfg.padding not in PADDING_MODES:
        parser.error(f"--padding must be one of {PADDING_MODES}")
    if cfg.jobs < 1:
        parser.error("--jobs must be >= 1")
    if not 0.0 <= cfg.min_overlap <= 1.0:
        parser.error("--min-overlap must lie in [0, 1]")
    if not (cfg.canny_sigma > 0 and 0 < cfg.canny_high <= 1 and 0 < cfg.canny_low <= 1):
        parser.error("--canny-sigma must be positive and --canny-high/--canny-low lie in (0, 1]")
    try:
        cfg.bank()
    except ValueError as exc:
        parser.error(str(exc))
    if getattr(args, "save_config", None):
        Path(args.save_config).write_text(cfg.to_json())
    if args.command == "inspect":
        if not cfg.input:
            parser.error("inspect needs --input")
        if cfg.period_rows is None or cfg.period_cols is None:
            parser.error("inspect needs --period-rows and --period-cols")
        try:
            cfg.period()
        except ValueError as exc:
            parser.error(str(exc))
        try:
            return cmd_inspect(cfg)
        except _UsageError as exc:
            parser.error(str(exc))
    if not cfg.manifest:
        parser.error("corpus needs --manifest")
    return cmd_corpus(cfg)


if __name__ == "__main__":
    sys.exit(main())

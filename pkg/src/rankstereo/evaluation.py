"""Error matching ratio against ground truth and benchmark tables."""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass

import numpy as np

from .config import SgmConfig, parse_config_text
from .cost import ALL_KINDS, CostKind
from .imagery import GroundTruthMap, load_gray, load_ground_truth
from .pipeline import match
from .refine import DisparityMap

log = logging.getLogger(__name__)

CSV_HEADER = ["dataset", "cost_kind", "error_ratio", "pixels", "delta", "border_margin", "runtime_ms"]

# Middlebury encodings: quarter-size 2003 sets store 4*d, the 2001 sets 8*d
DEFAULT_DIVISORS = {"cones": 4.0, "teddy": 4.0, "sawtooth": 8.0, "venus": 8.0}


class EmptyEvaluationSet(ValueError):
    pass


@dataclass
class EvalReport:
    dataset: str
    cost_kind: str
    error_ratio: float = float("nan")
    evaluated_pixels: int = 0
    delta: float = 1.0
    border_margin: tuple = (0, 0, 0, 0)
    runtime_ms: float = 0.0
    coverage: float = float("nan")
    subpixel_mode: bool = True
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def row(self):
        margin = "/".join(str(m) for m in self.border_margin)
        if not self.ok:
            return [self.dataset, self.cost_kind, "", "", f"{self.delta:g}", margin, ""]
        return [self.dataset, self.cost_kind, f"{self.error_ratio:.6f}", str(self.evaluated_pixels),
                f"{self.delta:g}", margin, f"{self.runtime_ms:.1f}"]


def _margins(border_margin):
    if np.ndim(border_margin) == 0:
        m = int(border_margin)
        return (m, m, 0, 0)
    if len(border_margin) != 4:
        raise ValueError("border_margin must be an int or (left, right, top, bottom)")
    return tuple(int(m) for m in border_margin)


def evaluation_mask(calc: DisparityMap, truth: GroundTruthMap, border_margin=0) -> np.ndarray:
    if calc.shape != truth.shape:
        raise ValueError(f"dimension mismatch: {calc.shape} vs {truth.shape}")
    left, right, top, bottom = _margins(border_margin)
    h, w = calc.shape
    region = np.zeros((h, w), dtype=bool)
    region[top : h - bottom if bottom else h, left : w - right if right else w] = True
    return region & truth.known & calc.valid


def error_ratio(calc: DisparityMap, truth: GroundTruthMap, delta: float = 1.0, border_margin=0):
    """Fraction of evaluated pixels with |D_calc - D_truth| > delta.

    ``border_margin`` is either one int applied to the left and right edges or
    a (left, right, top, bottom) tuple. Returns ``(ratio, pixel_count)``.
    """
    mask = evaluation_mask(calc, truth, border_margin)
    n = int(mask.sum())
    if n == 0:
        raise EmptyEvaluationSet("no pixel survives the evaluation mask")
    err = np.abs(calc.disp.astype(np.float64) - truth.disparity) > delta
    return float(err[mask].sum()) / n, n


@dataclass
class Dataset:
    name: str
    left: str
    right: str
    truth: str
    scale_divisor: float
    dmax: int | None = None


def read_meta(path) -> dict:
    with open(path) as fh:
        return parse_config_text(fh.read())


def discover(root) -> list:
    """Datasets under ``root``: ``<name>/{left.pgm,right.pgm,truth.pgm,meta}``."""
    out = []
    if not os.path.isdir(root):
        return out
    for name in sorted(os.listdir(root)):
        d = os.path.join(root, name)
        if not os.path.isdir(d):
            continue
        meta_path = os.path.join(d, "meta")
        meta = read_meta(meta_path) if os.path.exists(meta_path) else {}
        divisor = float(meta.get("scale_divisor", DEFAULT_DIVISORS.get(name.lower(), 1.0)))
        dmax = int(meta["dmax"]) if "dmax" in meta else None
        out.append(Dataset(name, os.path.join(d, "left.pgm"), os.path.join(d, "right.pgm"),
                           os.path.join(d, "truth.pgm"), divisor, dmax))
    return out


def evaluate_pair(name, left, right, truth: GroundTruthMap, kind: CostKind, cfg: SgmConfig) -> EvalReport:
    cfg = cfg.replace(cost_kind=kind)
    res = match(left, right, cfg)
    # integer ground truth is scored on integer disparities
    sub = cfg.subpixel and not truth.is_integer_valued()
    calc = res.refined if sub else res.integer
    margins = cfg.margins()
    ratio, n = error_ratio(calc, truth, cfg.delta, margins)
    return EvalReport(name, kind.name, ratio, n, cfg.delta, margins, res.runtime_ms,
                      res.coverage, sub)


def run_benchmark(datasets, kinds=ALL_KINDS, cfg: SgmConfig = SgmConfig()) -> list:
    """Full pipeline for every (dataset, kind); failures become error rows."""
    reports = []
    for ds in datasets:
        try:
            left, right = load_gray(ds.left), load_gray(ds.right)
            truth = load_ground_truth(ds.truth, ds.scale_divisor)
        except Exception as exc:  # noqa: BLE001 - reported per row
            log.error("%s: %s", ds.name, exc)
            for k in kinds:
                reports.append(EvalReport(ds.name, k.name, delta=cfg.delta,
                                          border_margin=cfg.margins(), error=str(exc)))
            continue
        run_cfg = cfg.replace(dmax=ds.dmax) if ds.dmax else cfg
        for k in kinds:
            try:
                reports.append(evaluate_pair(ds.name, left, right, truth, k, run_cfg))
            except Exception as exc:  # noqa: BLE001
                log.error("%s/%s: %s", ds.name, k.name, exc)
                reports.append(EvalReport(ds.name, k.name, delta=cfg.delta,
                                          border_margin=run_cfg.margins(), error=str(exc)))
    order = {k.name: i for i, k in enumerate(ALL_KINDS)}
    reports.sort(key=lambda r: (r.dataset, order.get(r.cost_kind, len(order))))
    return reports


def to_csv(reports, fh=None) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue() if fh is None else ""


def table(reports) -> str:
    """Methods as rows, datasets as columns, percentages."""
    names = sorted({r.dataset for r in reports})
    kinds = [k.name for k in ALL_KINDS if any(r.cost_kind == k.name for r in reports)]
    cell = {(r.dataset, r.cost_kind): r for r in reports}
    lines = ["method".ljust(10) + "".join(n.rjust(10) for n in names)]
    for k in kinds:
        vals = []
        for n in names:
            r = cell.get((n, k))
            vals.append("-".rjust(10) if r is None or not r.ok else f"{100 * r.error_ratio:9.1f}%")
        lines.append(k.ljust(10) + "".join(vals))
    return "\n".join(lines)

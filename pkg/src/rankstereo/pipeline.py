"""End-to-end matcher: costs, aggregation, WTA, then the refinement chain."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import refine
from .config import SgmConfig
from .cost import CostVolume, build_cost_volume
from .imagery import GrayImage, check_pair
from .refine import DisparityMap
from .sgm import AggregatedVolume, aggregate, winner_take_all


@dataclass
class MatchResult:
    volume: CostVolume
    agg: AggregatedVolume
    raw: DisparityMap          # winner-take-all, all valid
    checked: DisparityMap      # after the left-right check
    refined: DisparityMap      # sub-pixel (if enabled), holes filled, median
    integer: DisparityMap      # same chain without the sub-pixel step
    rendered: np.ndarray       # uint8, what gets written to disk
    runtime_ms: float

    @property
    def coverage(self) -> float:
        return self.checked.coverage


def _fill(d: DisparityMap, cfg: SgmConfig) -> DisparityMap:
    return refine.fill_holes(d) if cfg.fill_holes else d


def _median(d: DisparityMap, cfg: SgmConfig) -> DisparityMap:
    return DisparityMap(refine.median_5x5(d.disp), d.valid) if cfg.median else d


def match(left: GrayImage, right: GrayImage, cfg: SgmConfig = SgmConfig()) -> MatchResult:
    check_pair(left, right)
    t0 = time.perf_counter()
    vol = build_cost_volume(left, right, cfg.cost_kind, cfg.kernel, cfg.dmax, workers=cfg.workers)
    agg = aggregate(vol, left, cfg.penalties)
    raw = DisparityMap(winner_take_all(agg))
    checked = refine.left_right_check(agg, raw) if cfg.lr_check else raw.copy()

    integer = _median(_fill(checked, cfg), cfg)
    filled = _fill(refine.subpixel(agg, checked), cfg) if cfg.subpixel else _fill(checked, cfg)
    refined = _median(filled, cfg)
    # the median commutes with the monotone rendering map, so filter after scaling
    rendered = refine.render(filled, max(cfg.dmax, 2))
    if cfg.median:
        rendered = refine.median_5x5(rendered)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return MatchResult(vol, agg, raw, checked, refined, integer, rendered, runtime_ms)

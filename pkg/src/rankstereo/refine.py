"""Validation check, sub-pixel refinement, rendering, hole filling, median."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .sgm import AggregatedVolume


@dataclass(eq=False)
class DisparityMap:
    """Per-pixel disparity with a validity mask.

    ``disp`` is int32 for winner-take-all output and float64 once sub-pixel
    offsets have been applied.
    """

    disp: np.ndarray
    valid: np.ndarray = field(default=None)

    def __post_init__(self):
        self.disp = np.asarray(self.disp)
        if self.valid is None:
            self.valid = np.ones(self.disp.shape, dtype=bool)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.disp.shape:
            raise ValueError("valid mask and disparity differ in shape")

    @property
    def width(self) -> int:
        return self.disp.shape[1]

    @property
    def height(self) -> int:
        return self.disp.shape[0]

    @property
    def shape(self):
        return self.disp.shape

    @property
    def coverage(self) -> float:
        return float(self.valid.mean())

    def copy(self) -> "DisparityMap":
        return DisparityMap(self.disp.copy(), self.valid.copy())


def _agg(a):
    return a.agg if isinstance(a, AggregatedVolume) else np.asarray(a)


def right_disparity(agg) -> np.ndarray:
    """D_R(x, y) = argmin_d S(x + d, y, d), skipping x + d >= W; ties to small d."""
    s = _agg(agg)
    h, w, dmax = s.shape
    best = np.full((h, w), np.iinfo(np.int64).max, dtype=np.int64)
    arg = np.zeros((h, w), dtype=np.int32)
    for d in range(dmax):
        if d >= w:
            break
        cand = s[:, d:, d]
        better = cand < best[:, : w - d]
        best[:, : w - d][better] = cand[better]
        arg[:, : w - d][better] = d
    return arg


def left_right_check(agg, left_disp: DisparityMap, tolerance: int = 1) -> DisparityMap:
    """Invalidate pixels whose left and right disparities disagree by > tolerance."""
    dl = left_disp.disp.astype(np.int64)
    h, w = dl.shape
    dr = right_disparity(agg)
    xr = np.arange(w)[None, :] - dl
    inside = xr >= 0
    matched = np.take_along_axis(dr, np.clip(xr, 0, w - 1), axis=1)
    ok = inside & (np.abs(dl - matched) <= tolerance)
    return DisparityMap(left_disp.disp.copy(), left_disp.valid & ok)


def subpixel_offset(a, b, c):
    """Parabola vertex offset from three samples, clamped to [-0.5, 0.5]."""
    a, b, c = (np.asarray(v, dtype=np.float64) for v in (a, b, c))
    den = a - 2.0 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(den != 0, (a - c) / (2.0 * den), 0.0)
    off = np.clip(off, -0.5, 0.5)
    return float(off) if off.ndim == 0 else off


def subpixel(agg, disp: DisparityMap) -> DisparityMap:
    s = _agg(agg).astype(np.float64)
    dmax = s.shape[2]
    d = disp.disp.astype(np.int64)
    out = d.astype(np.float64)
    interior = (d > 0) & (d < dmax - 1) & disp.valid
    if dmax >= 3 and interior.any():
        di = np.clip(d, 1, max(dmax - 2, 1))[..., None]
        a = np.take_along_axis(s, di - 1, axis=2)[..., 0]
        b = np.take_along_axis(s, di, axis=2)[..., 0]
        c = np.take_along_axis(s, di + 1, axis=2)[..., 0]
        off = subpixel_offset(a, b, c)
        out = np.where(interior, out + off, out)
    return DisparityMap(out, disp.valid.copy())


def render(disp: DisparityMap, dmax: int) -> np.ndarray:
    """Scale [0, D-1] to [0, 255], round half up; invalid pixels become 0."""
    if dmax < 2:
        raise ValueError(f"render needs dmax >= 2, got {dmax}")
    v = np.floor(disp.disp.astype(np.float64) * 255.0 / (dmax - 1) + 0.5)
    v = np.clip(v, 0, 255)
    return np.where(disp.valid, v, 0).astype(np.uint8)


def fill_holes(disp: DisparityMap) -> DisparityMap:
    """Give each invalid pixel the smaller of its nearest valid row neighbours."""
    d = disp.disp
    valid = disp.valid
    h, w = d.shape
    cols = np.arange(w)[None, :].repeat(h, axis=0)
    left_idx = np.maximum.accumulate(np.where(valid, cols, -1), axis=1)
    right_idx = np.minimum.accumulate(np.where(valid, cols, w)[:, ::-1], axis=1)[:, ::-1]
    has_l, has_r = left_idx >= 0, right_idx < w
    lv = np.take_along_axis(d, np.clip(left_idx, 0, w - 1), axis=1)
    rv = np.take_along_axis(d, np.clip(right_idx, 0, w - 1), axis=1)
    both = np.minimum(lv, rv)
    fill = np.where(has_l & has_r, both, np.where(has_l, lv, rv))
    out = np.where(valid, d, np.where(has_l | has_r, fill, d)).astype(d.dtype)
    return DisparityMap(out, valid | has_l | has_r)


def median_5x5(img) -> np.ndarray:
    """Median of the clamped 5x5 neighbourhood (13th of 25 samples)."""
    a = np.asarray(img)
    padded = np.pad(a, 2, mode="edge")
    win = sliding_window_view(padded, (5, 5)).reshape(a.shape + (25,))
    return np.partition(win, 12, axis=-1)[..., 12].astype(a.dtype)

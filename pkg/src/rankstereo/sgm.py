"""Path-cost aggregation over four causal directions and winner-take-all."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import CostVolume
from .imagery import GrayImage


@dataclass(frozen=True)
class Penalties:
    """P1 for |dd| = 1 and the numerator P2' of the gradient-adaptive P2."""

    p1: int = 11
    p2_base: int = 128
    p2_min_is_p1: bool = True

    def __post_init__(self):
        if self.p1 < 0:
            raise ValueError(f"P1 must be non-negative, got {self.p1}")
        if self.p2_base < self.p1:
            raise ValueError(f"P2' ({self.p2_base}) must be >= P1 ({self.p1})")

    def p2_table(self) -> np.ndarray:
        """Effective P2 for every |dI| in 0..255."""
        g = np.arange(256)
        out = np.empty(256, dtype=np.int64)
        out[0] = self.p2_base
        out[1:] = np.maximum(self.p1, self.p2_base // g[1:])
        return out


# predecessor offsets (dx, dy): p - r for r at 0, 45, 90 and 135 degrees
PATHS = {
    0: (-1, 0),
    45: (-1, -1),
    90: (0, -1),
    135: (1, -1),
}


@dataclass(frozen=True, eq=False)
class AggregatedVolume:
    """S(p, d) = sum over directions of L_r(p, d), indexed ``agg[y, x, d]``."""

    agg: np.ndarray

    @property
    def height(self) -> int:
        return self.agg.shape[0]

    @property
    def width(self) -> int:
        return self.agg.shape[1]

    @property
    def dmax(self) -> int:
        return self.agg.shape[2]


def adaptive_p2(pen: Penalties, i_p: int, i_prev: int) -> int:
    g = abs(int(i_p) - int(i_prev))
    if g == 0:
        return pen.p2_base
    return max(pen.p1, pen.p2_base // g)


def path_step(prev, c_pd, pen: Penalties, p2_eff: int) -> np.ndarray:
    """One application of the path recursion for all d at a pixel.

    ``prev`` and ``c_pd`` may carry leading batch axes; d is the last axis.
    """
    prev = np.asarray(prev, dtype=np.int64)
    c_pd = np.asarray(c_pd, dtype=np.int64)
    p2 = np.asarray(p2_eff, dtype=np.int64)
    if p2.ndim:
        p2 = p2[..., None]
    m = prev.min(axis=-1, keepdims=True)
    best = np.minimum(prev, m + p2)
    if prev.shape[-1] > 1:
        best[..., 1:] = np.minimum(best[..., 1:], prev[..., :-1] + pen.p1)
        best[..., :-1] = np.minimum(best[..., :-1], prev[..., 1:] + pen.p1)
    return c_pd + best - m


def init_path(c_p0) -> np.ndarray:
    return np.asarray(c_p0, dtype=np.int64).copy()


def _p2_map(img: np.ndarray, pen: Penalties, dx: int, dy: int) -> np.ndarray:
    """Effective P2 at each pixel for predecessor offset (dx, dy); -1 where none."""
    h, w = img.shape
    a = img.astype(np.int64)
    out = np.full((h, w), -1, dtype=np.int64)
    ys = slice(max(0, -dy), h - max(0, dy))
    xs = slice(max(0, -dx), w - max(0, dx))
    ys_prev = slice(ys.start + dy, ys.stop + dy)
    xs_prev = slice(xs.start + dx, xs.stop + dx)
    grad = np.abs(a[ys, xs] - a[ys_prev, xs_prev])
    out[ys, xs] = pen.p2_table()[grad]
    return out


def path_costs(vol: CostVolume, left: GrayImage, pen: Penalties, direction: int) -> np.ndarray:
    """L_r over the whole image for a single direction, shape (H, W, D)."""
    c = vol.cost.astype(np.int64)
    h, w, _ = c.shape
    dx, dy = PATHS[direction]
    p2 = _p2_map(left.data, pen, dx, dy)
    out = np.empty_like(c)
    if dy == 0:
        # horizontal: every row advances in lockstep, one column at a time
        out[:, 0] = init_path(c[:, 0])
        for x in range(1, w):
            out[:, x] = path_step(out[:, x - 1], c[:, x], pen, p2[:, x])
        return out
    out[0] = init_path(c[0])
    for y in range(1, h):
        prev = out[y - 1]
        if dx == 0:
            out[y] = path_step(prev, c[y], pen, p2[y])
            continue
        # diagonal: the column whose predecessor falls outside starts a path
        start = 0 if dx < 0 else w - 1
        inner = slice(1, w) if dx < 0 else slice(0, w - 1)
        src = slice(0, w - 1) if dx < 0 else slice(1, w)
        out[y, start] = init_path(c[y, start])
        out[y, inner] = path_step(prev[src], c[y, inner], pen, p2[y, inner])
    return out


def aggregate(vol: CostVolume, left: GrayImage, pen: Penalties = Penalties(),
              paths=tuple(PATHS)) -> AggregatedVolume:
    if (vol.height, vol.width) != left.shape:
        raise ValueError(
            f"dimension mismatch: volume {vol.width}x{vol.height} vs image {left.width}x{left.height}")
    total = np.zeros(vol.cost.shape, dtype=np.int64)
    # fixed summation order keeps the result deterministic
    for r in paths:
        total += path_costs(vol, left, pen, r)
    return AggregatedVolume(total)


def winner_take_all(agg) -> np.ndarray:
    """argmin over d; np.argmin already breaks ties toward the smallest index."""
    s = agg.agg if isinstance(agg, AggregatedVolume) else np.asarray(agg)
    return np.argmin(s, axis=-1).astype(np.int32)

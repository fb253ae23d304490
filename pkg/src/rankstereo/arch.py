"""Transaction-level model of the disparity-parallel SGM datapath.

The simulator consumes pixels strictly in raster order and keeps only the
state the hardware would: two k-line input buffers, one stored row of path
costs per non-horizontal direction, a one-pixel delay register for the 45
degree path, and the running 0 degree state. All path costs saturate at
``l_max``. Timing is not modelled beyond the ``f_max = 9 f_s`` relation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import SgmConfig
from .cost import CostFamily, CostVolume, KernelSpec, comparison_bits
from .imagery import GrayImage, check_pair
from .refine import DisparityMap
from .sgm import Penalties, aggregate, winner_take_all

# reference operating points: resolution and frame rate
OPERATING_POINTS = [
    ("450x375/30fps", 450, 375, 30),
    ("450x375/60fps", 450, 375, 60),
    ("640x480/30fps", 640, 480, 30),
    ("640x480/60fps", 640, 480, 60),
    ("720p/30fps", 1280, 720, 30),
]

LINE_MATCH_FACTOR = 9


def max_frequency(w: int, h: int, fps: float, lines: int = LINE_MATCH_FACTOR) -> float:
    """Clock in MHz needed to time-multiplex ``lines`` line matchers per pixel."""
    return lines * w * h * fps / 1e6


def frequency_table(configs=OPERATING_POINTS):
    return [(label, round(max_frequency(w, h, fps), 1)) for label, w, h, fps in configs]


def bits_for(value: int) -> int:
    """ceil(log2(value + 1)): bits needed to hold 0..value."""
    if value < 0:
        raise ValueError("value must be non-negative")
    return int(value).bit_length()


def memory_budget(d: int, w: int, l_max: int) -> int:
    """On-chip path-cost buffer size in bits: (D + 5)(3W + 1) ceil(log2(L_max + 1))."""
    return (d + 5) * (3 * w + 1) * bits_for(l_max)


def bitwidth_plan(c_max: int, pen: Penalties):
    """(cost_bits, lr_bits) sufficient for costs <= c_max and L_r <= c_max + P2'."""
    return bits_for(c_max), bits_for(c_max + pen.p2_base)


@dataclass
class ArchParams:
    width: int
    height: int
    dmax: int = 64
    fps: float = 30.0
    l_max: int = 2**16 - 1
    lines_buffered: int = 9


@dataclass
class ArchReport:
    f_max: float
    m_b_bits: int
    cost_bits: int = 0
    lr_bits: int = 0
    simulated_peak_occupancy: int = 0      # bits of path-cost storage
    peak_lr_entries: int = 0
    line_buffer_bits: int = 0
    saturation_count: int = 0
    pixels: int = 0
    equivalent: bool | None = None

    @property
    def m_b_kilobytes(self) -> float:
        return self.m_b_bits / 8 / 1024

    def lines(self):
        out = [
            f"f_max_mhz = {self.f_max:.1f}",
            f"m_b_bits = {self.m_b_bits}",
            f"m_b_kb = {self.m_b_kilobytes:.1f}",
            f"cost_bits = {self.cost_bits}",
            f"lr_bits = {self.lr_bits}",
        ]
        if self.pixels:
            out += [
                f"peak_occupancy_bits = {self.simulated_peak_occupancy}",
                f"line_buffer_bits = {self.line_buffer_bits}",
                f"saturation_count = {self.saturation_count}",
            ]
        if self.equivalent is not None:
            out.append(f"equivalent: {'yes' if self.equivalent else 'no'}")
        return out


class LrEngine:
    """Path-cost stage: D sub-PEs per direction, shared across four directions.

    Feed one cost vector per pixel in raster order through :meth:`step`; it
    returns the summed path costs S(p, .) for that pixel.
    """

    def __init__(self, width: int, dmax: int, pen: Penalties, l_max: int):
        self.width, self.dmax, self.pen, self.l_max = width, dmax, pen, int(l_max)
        self.p2_lut = pen.p2_table()
        # one stored row per non-horizontal direction; slot x holds column x
        self.rows = {r: np.zeros((width, dmax), dtype=np.int64) for r in (45, 90, 135)}
        self.filled = {r: np.zeros(width, dtype=bool) for r in (45, 90, 135)}
        # previous-row 45 degree value of column x - 1, rescued before slot x - 1 was overwritten
        self.delay45 = np.zeros(dmax, dtype=np.int64)
        self.state0 = np.zeros(dmax, dtype=np.int64)
        self.prev_pixels = np.zeros(width, dtype=np.int64)
        self.cur_pixels = np.zeros(width, dtype=np.int64)
        self.y = -1
        self.saturations = 0
        self.peak_entries = 0
        self._live_slots = 0

    def start_row(self):
        self.y += 1
        self.prev_pixels, self.cur_pixels = self.cur_pixels, self.prev_pixels

    def _store(self, r, x, vec):
        if not self.filled[r][x]:
            self.filled[r][x] = True
            self._live_slots += 1
        self.rows[r][x] = vec

    def step(self, x: int, intensity: int, cost) -> np.ndarray:
        c = np.asarray(cost, dtype=np.int64)
        y = self.y
        self.cur_pixels[x] = intensity
        up = self.prev_pixels
        prev = np.zeros((4, self.dmax), dtype=np.int64)
        has = np.zeros(4, dtype=bool)
        grad = np.zeros(4, dtype=np.int64)
        if x > 0:
            prev[0], has[0] = self.state0, True
            grad[0] = abs(intensity - int(self.cur_pixels[x - 1]))
        if y > 0:
            if x > 0:
                prev[1], has[1] = self.delay45, True
                grad[1] = abs(intensity - int(up[x - 1]))
            prev[2], has[2] = self.rows[90][x], True
            grad[2] = abs(intensity - int(up[x]))
            if x + 1 < self.width:
                prev[3], has[3] = self.rows[135][x + 1], True
                grad[3] = abs(intensity - int(up[x + 1]))

        # minLr comparator tree, P2r lookup and the aligned data terms L1, L2, L3
        min_lr = prev.min(axis=1, keepdims=True)
        p2r = self.p2_lut[grad][:, None]
        big = np.iinfo(np.int64).max // 4
        l2 = np.full_like(prev, big)
        l3 = np.full_like(prev, big)
        l2[:, 1:] = prev[:, :-1] + self.pen.p1
        l3[:, :-1] = prev[:, 1:] + self.pen.p1
        best = np.minimum(np.minimum(prev, l2), np.minimum(l3, min_lr + p2r)) - min_lr
        exact = c[None, :] + np.where(has[:, None], best, 0)

        self.saturations += int((exact > self.l_max).sum())
        lr = np.minimum(exact, self.l_max)

        self.delay45 = self.rows[45][x].copy()
        self._store(45, x, lr[1])
        self._store(90, x, lr[2])
        self._store(135, x, lr[3])
        self.state0 = lr[0]
        # plus one D-vector each for the 45 degree delay register and the 0 degree state
        self.peak_entries = max(self.peak_entries, (self._live_slots + 2) * self.dmax)
        return lr.sum(axis=0)


def simulate_lr(vol: CostVolume, left: GrayImage, pen: Penalties, l_max: int):
    """Run the path-cost stage over a precomputed volume; returns (disp, engine)."""
    h, w, dmax = vol.cost.shape
    eng = LrEngine(w, dmax, pen, l_max)
    img = left.data.astype(np.int64)
    disp = np.zeros((h, w), dtype=np.int32)
    for y in range(h):
        eng.start_row()
        for x in range(w):
            s = eng.step(x, int(img[y, x]), vol.cost[y, x])
            disp[y, x] = int(np.argmin(s))
    return disp, eng


class LineBuffer:
    """k-line window over a raster stream with replicated borders."""

    def __init__(self, width: int, lines: int):
        self.width, self.lines = width, lines
        self.rows = deque(maxlen=lines)
        self.first_row = 0
        self._current = []
        self.peak_pixels = 0

    def push(self, value: int):
        # the oldest line is released as the first pixel of a new line arrives,
        # so at most ``lines * width`` pixels are ever resident
        if not self._current and len(self.rows) == self.lines:
            self.rows.popleft()
            self.first_row += 1
        self._current.append(int(value))
        if len(self._current) == self.width:
            self.rows.append(np.array(self._current, dtype=np.uint8))
            self._current = []
        self.peak_pixels = max(self.peak_pixels, len(self.rows) * self.width + len(self._current))

    def window_rows(self, y: int, height: int, radius: int) -> np.ndarray:
        """Rows clamp(y + dy) for dy in [-radius, radius], stacked (2r+1, W)."""
        idx = [min(max(y + dy, 0), height - 1) - self.first_row for dy in range(-radius, radius + 1)]
        if min(idx) < 0 or max(idx) >= len(self.rows):
            raise RuntimeError(f"row {y} window not resident in the line buffer")
        return np.stack([self.rows[i] for i in idx])


def _row_bits(window: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Packed comparison vectors of the centre line of a (M, W) window."""
    # comparison_bits on the window reproduces image clamping: rows are
    # already clamped, columns clamp inside the window the same way
    bits = comparison_bits(GrayImage(window), kernel)
    return bits[kernel.rows // 2]


def streaming_pipeline(left: GrayImage, right: GrayImage, cfg: SgmConfig = SgmConfig(),
                       fps: float = 30.0, check: bool = True):
    """Stream a pair through line buffers, rank cost PEs and the L_r stage.

    Returns the winner-take-all disparity map and an :class:`ArchReport`.
    With ``check`` the result is compared against the frame-based reference.
    """
    check_pair(left, right)
    kind = cfg.cost_kind.variant
    if not kind.is_rank:
        raise ValueError(f"streaming model supports rank-family costs only, not {kind.value}")
    kernel, dmax, pen, l_max = cfg.kernel, cfg.dmax, cfg.penalties, cfg.lmax
    h, w = left.shape
    ry = kernel.rows // 2
    lb_l, lb_r = LineBuffer(w, kernel.rows), LineBuffer(w, kernel.rows)
    eng = LrEngine(w, dmax, pen, l_max)
    cols = np.clip(np.arange(w)[:, None] - np.arange(dmax)[None, :], 0, w - 1)
    disp = np.zeros((h, w), dtype=np.int32)
    costs = np.zeros((h, w, dmax), dtype=np.int64) if check else None
    c_max = 0

    def emit(y):
        nonlocal c_max
        lbits = _row_bits(lb_l.window_rows(y, h, ry), kernel)
        rbits = _row_bits(lb_r.window_rows(y, h, ry), kernel)
        lrank = np.bitwise_count(lbits).sum(axis=-1).astype(np.int64)
        rrank = np.bitwise_count(rbits).sum(axis=-1).astype(np.int64)
        eng.start_row()
        for x in range(w):
            c = cols[x]
            ham = np.bitwise_count(lbits[x][None, :] ^ rbits[c]).sum(axis=-1).astype(np.int64)
            ad = np.abs(lrank[x] - rrank[c])
            if kind is CostFamily.RANK_AD:
                cost = ad
            elif kind is CostFamily.RANK_SAD:
                cost = ham
            else:
                cost = ad + ham
            c_max = max(c_max, int(cost.max()))
            if costs is not None:
                costs[y, x] = cost
            s = eng.step(x, int(left.data[y, x]), cost)
            disp[y, x] = int(np.argmin(s))

    next_out = 0
    for y in range(h):
        for x in range(w):
            lb_l.push(left.data[y, x])
            lb_r.push(right.data[y, x])
        # output row y - ry once its lower window edge has arrived
        while next_out <= y - ry:
            emit(next_out)
            next_out += 1
    while next_out < h:
        emit(next_out)
        next_out += 1

    cost_bits, lr_bits = bitwidth_plan(c_max, pen)
    width_bits = bits_for(l_max)
    report = ArchReport(
        f_max=max_frequency(w, h, fps),
        m_b_bits=memory_budget(dmax, w, l_max),
        cost_bits=cost_bits,
        lr_bits=lr_bits,
        simulated_peak_occupancy=eng.peak_entries * width_bits,
        peak_lr_entries=eng.peak_entries,
        line_buffer_bits=(lb_l.peak_pixels + lb_r.peak_pixels) * 8,
        saturation_count=eng.saturations,
        pixels=w * h,
    )
    if check:
        ref = winner_take_all(aggregate(CostVolume(costs), left, pen))
        report.equivalent = bool(np.array_equal(ref, disp))
    return DisparityMap(disp), report

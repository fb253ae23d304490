"""Matching costs C(p, d) and cost-volume assembly.

Every window and disparity sample is clamped to the image rectangle. The right
window for disparity ``d`` is the kernel centred at ``(clamp(x - d), y)``.

Comparison vectors (one bit per kernel position, row-major) are packed into
``ceil(M*N / 64)`` uint64 words so that Rank SAD reduces to a popcount of XOR.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .imagery import GrayImage, check_pair


class CostFamily(str, enum.Enum):
    SAD = "sad"
    BT = "bt"
    RANK_AD = "rank_ad"
    RANK_SAD = "rank_sad"
    BLEND_SAD_RT = "blend"
    UNIFIED_RANK = "unified"

    @property
    def is_rank(self) -> bool:
        return self in (CostFamily.RANK_AD, CostFamily.RANK_SAD, CostFamily.UNIFIED_RANK)


@dataclass(frozen=True)
class CostKind:
    variant: CostFamily = CostFamily.UNIFIED_RANK
    alpha: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "variant", CostFamily(self.variant))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @classmethod
    def parse(cls, name: str, alpha: float = 0.2) -> "CostKind":
        return cls(CostFamily(name.lower()), alpha)

    @property
    def name(self) -> str:
        return self.variant.value

    def __str__(self):
        return self.name


ALL_KINDS = tuple(CostKind(f) for f in CostFamily)


@dataclass(frozen=True)
class KernelSpec:
    rows: int = 9
    cols: int = 9

    def __post_init__(self):
        for v in (self.rows, self.cols):
            if v < 1 or v % 2 == 0:
                raise ValueError(f"kernel dimensions must be odd and >= 1, got {self.rows}x{self.cols}")

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        m, _, n = text.lower().partition("x")
        return cls(int(m), int(n or m))

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def radius(self):
        return self.rows // 2, self.cols // 2

    def offsets(self):
        """(dy, dx) offsets in row-major order."""
        ry, rx = self.radius
        return [(dy, dx) for dy in range(-ry, ry + 1) for dx in range(-rx, rx + 1)]

    def __str__(self):
        return f"{self.rows}x{self.cols}"


@dataclass(frozen=True, eq=False)
class CostVolume:
    """Integer costs indexed ``cost[y, x, d]``."""

    cost: np.ndarray

    @property
    def height(self) -> int:
        return self.cost.shape[0]

    @property
    def width(self) -> int:
        return self.cost.shape[1]

    @property
    def dmax(self) -> int:
        return self.cost.shape[2]

    def __eq__(self, other):
        if not isinstance(other, CostVolume):
            return NotImplemented
        return bool(np.array_equal(self.cost, other.cost))


def _clamp(v, hi):
    return min(max(v, 0), hi - 1)


# ---------------------------------------------------------------- scalar ops

def _window(img, x, y, kernel):
    a = img.data if isinstance(img, GrayImage) else np.asarray(img)
    h, w = a.shape
    return [int(a[_clamp(y + dy, h), _clamp(x + dx, w)]) for dy, dx in kernel.offsets()]


def comparison_vector(img, p, kernel: KernelSpec = KernelSpec()):
    """Bits T[I(q) < I(p)] for q over the clamped window around p, row-major."""
    x, y = p
    a = img.data if isinstance(img, GrayImage) else np.asarray(img)
    centre = int(a[_clamp(y, a.shape[0]), _clamp(x, a.shape[1])])
    return tuple(int(v < centre) for v in _window(a, x, y, kernel))


def rank_transform(img, p, kernel: KernelSpec = KernelSpec()) -> int:
    return sum(comparison_vector(img, p, kernel))


def cost_rank_ad(left_rank: int, right_rank: int) -> int:
    return abs(int(left_rank) - int(right_rank))


def cost_rank_sad(left_bits, right_bits) -> int:
    if len(left_bits) != len(right_bits):
        raise ValueError(f"comparison vectors differ in length: {len(left_bits)} vs {len(right_bits)}")
    return sum(abs(int(a) - int(b)) for a, b in zip(left_bits, right_bits))


def cost_unified(left_bits, right_bits) -> int:
    return cost_rank_ad(sum(left_bits), sum(right_bits)) + cost_rank_sad(left_bits, right_bits)


def cost_sad(left, right, p, d: int, kernel: KernelSpec = KernelSpec()) -> int:
    x, y = p
    xr = _clamp(x - d, left.width)
    lw = _window(left, x, y, kernel)
    rw = _window(right, xr, y, kernel)
    return sum(abs(a - b) for a, b in zip(lw, rw))


def _bt_half(ref_row, other_row, xa, xb):
    """2x the one-sided Birchfield-Tomasi term of ref[xa] against other[xb]."""
    n = len(other_row)
    c = 2 * int(other_row[xb])
    lo_n = int(other_row[xb]) + int(other_row[_clamp(xb - 1, n)])
    hi_n = int(other_row[xb]) + int(other_row[_clamp(xb + 1, n)])
    imin, imax = min(c, lo_n, hi_n), max(c, lo_n, hi_n)
    v = 2 * int(ref_row[xa])
    return max(0, v - imax, imin - v)


def cost_bt(left, right, p, d: int) -> int:
    """Symmetric Birchfield-Tomasi dissimilarity, rounded half up."""
    x, y = p
    lrow, rrow = left.data[y], right.data[y]
    xr = _clamp(x - d, left.width)
    twice = min(_bt_half(lrow, rrow, x, xr), _bt_half(rrow, lrow, xr, x))
    return (twice + 1) // 2


def blend(c_sad, c_rt, alpha: float):
    """round(alpha * C_SAD + (1 - alpha) * C_RT), half up; works on arrays."""
    v = alpha * np.asarray(c_sad, dtype=np.float64) + (1.0 - alpha) * np.asarray(c_rt, dtype=np.float64)
    out = np.floor(v + 0.5).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def scalar_cost(left, right, p, d, kind: CostKind, kernel: KernelSpec = KernelSpec()) -> int:
    """Naive per-pixel composition of the component costs; the volume oracle."""
    x, y = p
    xr = _clamp(x - d, left.width)
    v = kind.variant
    if v is CostFamily.SAD:
        return cost_sad(left, right, p, d, kernel)
    if v is CostFamily.BT:
        return cost_bt(left, right, p, d)
    lb = comparison_vector(left, (x, y), kernel)
    rb = comparison_vector(right, (xr, y), kernel)
    if v is CostFamily.RANK_AD:
        return cost_rank_ad(sum(lb), sum(rb))
    if v is CostFamily.RANK_SAD:
        return cost_rank_sad(lb, rb)
    if v is CostFamily.UNIFIED_RANK:
        return cost_unified(lb, rb)
    return blend(cost_sad(left, right, p, d, kernel), cost_rank_ad(sum(lb), sum(rb)), kind.alpha)


def max_cost(kind: CostKind, kernel: KernelSpec = KernelSpec()) -> int:
    """Upper bound on any entry of a volume of this kind."""
    mn = kernel.size
    v = kind.variant
    if v is CostFamily.SAD:
        return 255 * mn
    if v is CostFamily.BT:
        return 255
    if v is CostFamily.RANK_AD:
        return mn - 1
    if v is CostFamily.RANK_SAD:
        # the centre bit is always 0 on both sides
        return mn - 1
    if v is CostFamily.UNIFIED_RANK:
        return 2 * (mn - 1)
    return blend(255 * mn, mn - 1, kind.alpha)


# ----------------------------------------------------------- dense versions

def _shifted(a: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """out[y, x] = a[clamp(y + dy), clamp(x + dx)]."""
    h, w = a.shape
    ys = np.clip(np.arange(h) + dy, 0, h - 1)
    xs = np.clip(np.arange(w) + dx, 0, w - 1)
    return a[np.ix_(ys, xs)]


def _window_views(a: np.ndarray, kernel: KernelSpec):
    """Yield clamped shifts of ``a`` for each kernel offset, as views of one padded copy."""
    ry, rx = kernel.radius
    h, w = a.shape
    padded = np.pad(a, ((ry, ry), (rx, rx)), mode="edge")
    for dy, dx in kernel.offsets():
        yield padded[ry + dy : ry + dy + h, rx + dx : rx + dx + w]


def comparison_bits(img: GrayImage, kernel: KernelSpec = KernelSpec()) -> np.ndarray:
    """Packed comparison vectors for every pixel, shape (H, W, words) uint64.

    Bit k of the vector (row-major kernel position k) lives in word k // 64 at
    bit position k % 64.
    """
    a = img.data
    words = -(-kernel.size // 64)
    planes = np.zeros((words,) + a.shape, dtype=np.uint64)
    bit = np.empty(a.shape, dtype=np.uint64)
    for k, view in enumerate(_window_views(a, kernel)):
        np.less(view, a, out=bit, casting="unsafe")
        bit <<= np.uint64(k % 64)
        planes[k // 64] |= bit
    return np.ascontiguousarray(np.moveaxis(planes, 0, -1))


def rank_image(img: GrayImage, kernel: KernelSpec = KernelSpec()) -> np.ndarray:
    return np.bitwise_count(comparison_bits(img, kernel)).sum(axis=-1, dtype=np.int32)


def unpack_bits(packed: np.ndarray, length: int) -> tuple:
    """Inverse of the packing used by :func:`comparison_bits` for one pixel."""
    return tuple(int((int(packed[k // 64]) >> (k % 64)) & 1) for k in range(length))


def _right_columns(width: int, ds) -> np.ndarray:
    """(W, len(ds)) table of clamp(x - d)."""
    x = np.arange(width)[:, None]
    return np.clip(x - np.asarray(ds)[None, :], 0, width - 1)


def _sad_planes(left, right, kernel, ds):
    la = left.data.astype(np.int32)
    ra = right.data.astype(np.int32)
    cols = _right_columns(left.width, ds)
    out = np.zeros((left.height, left.width, len(ds)), dtype=np.int32)
    for lw, rw in zip(_window_views(la, kernel), _window_views(ra, kernel)):
        out += np.abs(lw[:, :, None] - rw[:, cols])
    return out


def _bt_planes(left, right, ds):
    la = left.data.astype(np.int32)
    ra = right.data.astype(np.int32)
    cols = _right_columns(left.width, ds)

    def bounds(a):
        prev = _shifted(a, 0, -1)
        nxt = _shifted(a, 0, 1)
        c = 2 * a
        lo, hi = a + prev, a + nxt
        return np.minimum(np.minimum(c, lo), hi), np.maximum(np.maximum(c, lo), hi)

    lmin, lmax = bounds(la)
    rmin, rmax = bounds(ra)
    lv = 2 * la[:, :, None]
    rv = 2 * ra[:, cols]
    fwd = np.maximum(0, np.maximum(lv - rmax[:, cols], rmin[:, cols] - lv))
    bwd = np.maximum(0, np.maximum(rv - lmax[:, :, None], lmin[:, :, None] - rv))
    return (np.minimum(fwd, bwd) + 1) // 2


def _rank_planes(lbits, rbits, lrank, rrank, variant, ds):
    width = lbits.shape[1]
    cols = _right_columns(width, ds)
    out = np.empty(lbits.shape[:2] + (len(ds),), dtype=np.int32)
    for j in range(len(ds)):
        c = cols[:, j]
        ad = np.abs(lrank - rrank[:, c])
        if variant is CostFamily.RANK_AD:
            out[..., j] = ad
            continue
        ham = np.bitwise_count(lbits ^ rbits[:, c]).sum(axis=-1, dtype=np.int32)
        out[..., j] = ham if variant is CostFamily.RANK_SAD else ad + ham
    return out


def build_cost_volume(left: GrayImage, right: GrayImage, kind: CostKind = CostKind(),
                      kernel: KernelSpec = KernelSpec(), dmax: int = 64,
                      workers: int = 1) -> CostVolume:
    """Dense cost volume for every pixel and every d in [0, dmax - 1].

    ``workers`` splits the disparity planes across threads; the result does not
    depend on the split.
    """
    check_pair(left, right)
    if dmax < 1:
        raise ValueError(f"dmax must be >= 1, got {dmax}")
    if not isinstance(kind, CostKind):
        kind = CostKind(kind)
    v = kind.variant

    rank_state = None
    if v is not CostFamily.SAD and v is not CostFamily.BT:
        lbits, rbits = comparison_bits(left, kernel), comparison_bits(right, kernel)
        lrank = np.bitwise_count(lbits).sum(axis=-1, dtype=np.int32)
        rrank = np.bitwise_count(rbits).sum(axis=-1, dtype=np.int32)
        rank_state = (lbits, rbits, lrank, rrank)

    def planes(ds):
        if v is CostFamily.SAD:
            return _sad_planes(left, right, kernel, ds)
        if v is CostFamily.BT:
            return _bt_planes(left, right, ds)
        if v is CostFamily.BLEND_SAD_RT:
            sad = _sad_planes(left, right, kernel, ds)
            rt = _rank_planes(*rank_state, CostFamily.RANK_AD, ds)
            return blend(sad, rt, kind.alpha).astype(np.int32)
        return _rank_planes(*rank_state, v, ds)

    all_ds = np.arange(dmax)
    if workers <= 1 or dmax == 1:
        cost = planes(all_ds)
    else:
        chunks = [c for c in np.array_split(all_ds, min(workers, dmax)) if len(c)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(planes, chunks))
        cost = np.concatenate(parts, axis=2)
    return CostVolume(np.ascontiguousarray(cost, dtype=np.int32))


# ------------------------------------------------------------- dump format

def dump_volume(vol, path) -> None:
    """Write ``COSTVOL W H D`` then little-endian uint16 values in (y, x, d) order."""
    cost = vol.cost if isinstance(vol, CostVolume) else np.asarray(vol)
    if cost.min(initial=0) < 0 or cost.max(initial=0) > 0xFFFF:
        raise ValueError("cost values do not fit in 16 bits")
    h, w, d = cost.shape
    with open(path, "wb") as fh:
        fh.write(f"COSTVOL {w} {h} {d}\n".encode("ascii"))
        fh.write(cost.astype("<u2").tobytes())


def load_volume(path) -> CostVolume:
    with open(path, "rb") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != b"COSTVOL":
            raise ValueError(f"{path}: not a COSTVOL file")
        w, h, d = (int(t) for t in header[1:])
        raw = np.frombuffer(fh.read(), dtype="<u2")
    if raw.size != w * h * d:
        raise ValueError(f"{path}: expected {w * h * d} values, found {raw.size}")
    return CostVolume(raw.reshape(h, w, d).astype(np.int32))

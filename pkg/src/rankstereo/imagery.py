"""Raster I/O for rectified stereo pairs and ground-truth disparity maps.

Only the netpbm family is supported (P2/P3/P5/P6, maxval 255). The parser is
self-contained so that round trips are bit-exact.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


class ImageFormatError(ValueError):
    """Raised for malformed or unsupported raster files."""


class DimensionMismatch(ValueError):
    """Raised when two rasters that must share a size do not."""

    def __init__(self, a, b):
        super().__init__(f"dimension mismatch: {a[0]}x{a[1]} vs {b[0]}x{b[1]}")


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster. ``data`` is an (H, W) uint8 array, row-major."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"GrayImage needs a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self):
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class GroundTruthMap:
    """True disparity per pixel; ``known`` is False where the raster held 0."""

    disparity: np.ndarray
    known: np.ndarray
    scale_divisor: float = 1.0

    @property
    def width(self) -> int:
        return self.disparity.shape[1]

    @property
    def height(self) -> int:
        return self.disparity.shape[0]

    @property
    def shape(self):
        return self.disparity.shape

    def is_integer_valued(self) -> bool:
        d = self.disparity[self.known]
        return bool(np.all(d == np.round(d)))


def _tokens(buf: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise ImageFormatError("truncated header")
        if buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        out.append(buf[start:pos])
    return out, pos


def read_pnm(path) -> np.ndarray:
    """Return the raw samples of a PGM/PPM file as (H, W) or (H, W, 3) uint8."""
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc

    magic = buf[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise ImageFormatError(f"{path}: magic number {magic!r} is not P2/P3/P5/P6")
    channels = 3 if magic in (b"P3", b"P6") else 1
    (w_tok, h_tok, max_tok), pos = _tokens(buf, 3, 2)
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric width/height/maxval in header") from None
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: width and height must be positive, got {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: maxval {maxval} unsupported (only 255)")

    count = width * height * channels
    if magic in (b"P5", b"P6"):
        # exactly one whitespace byte separates header from raster
        pos += 1
        raw = buf[pos : pos + count]
        if len(raw) != count:
            raise ImageFormatError(f"{path}: raster has {len(raw)} bytes, expected {count}")
        arr = np.frombuffer(raw, dtype=np.uint8)
    else:
        try:
            arr = np.array(buf[pos:].split(), dtype=np.int64)
        except ValueError:
            raise ImageFormatError(f"{path}: non-numeric sample in ASCII raster") from None
        if arr.size < count:
            raise ImageFormatError(f"{path}: raster has {arr.size} samples, expected {count}")
        arr = arr[:count]
        if arr.min() < 0 or arr.max() > maxval:
            raise ImageFormatError(f"{path}: sample outside [0, {maxval}]")
        arr = arr.astype(np.uint8)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return arr.reshape(shape).copy()


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luma with round-half-up: round(0.299 R + 0.587 G + 0.114 B)."""
    # integer weights in thousandths keep the rounding exact
    rgb = rgb.astype(np.int64)
    acc = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return ((acc + 500) // 1000).astype(np.uint8)


def load_gray(path) -> GrayImage:
    arr = read_pnm(path)
    if arr.ndim == 3:
        arr = rgb_to_gray(arr)
    return GrayImage(arr)


def load_ground_truth(path, scale_divisor: float) -> GroundTruthMap:
    """Load a disparity raster where raw value 0 marks unknown pixels."""
    if not scale_divisor > 0:
        raise ValueError(f"scale_divisor must be positive, got {scale_divisor}")
    raw = load_gray(path).data
    known = raw != 0
    disp = np.where(known, raw.astype(np.float64) / scale_divisor, 0.0)
    return GroundTruthMap(disp, known, float(scale_divisor))


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.data.tobytes()


def save_gray(img: GrayImage, path) -> None:
    if not isinstance(img, GrayImage):
        img = GrayImage(np.asarray(img))
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(encode_pgm(img))
    os.replace(tmp, path)


def check_pair(left: GrayImage, right: GrayImage) -> None:
    if left.shape != right.shape:
        raise DimensionMismatch((left.width, left.height), (right.width, right.height))

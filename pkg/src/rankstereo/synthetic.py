"""Procedural rectified stereo scenes with exact integer ground truth.

Each scene is a stack of textured fronto-parallel layers. A layer at
disparity ``d`` seen at left column ``x`` appears at right column ``x - d``;
both views are rendered with a z-buffer (larger disparity wins), so
occlusions behave like a real pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagery import GrayImage, GroundTruthMap


@dataclass
class Scene:
    left: GrayImage
    right: GrayImage
    truth: GroundTruthMap
    name: str = "synthetic"


def _texture(rng, h, w, smooth):
    t = rng.normal(size=(h, w))
    if smooth > 0:
        t = ndimage.gaussian_filter(t, smooth)
    t = (t - t.min()) / max(np.ptp(t), 1e-9)
    return t


def layered_scene(width=96, height=72, disparities=(4, 10, 18), seed=0,
                  smooth=1.0, noise=0.0, name="synthetic") -> Scene:
    """Background plane plus rectangular foreground layers.

    ``disparities[0]`` is the background; each further value adds a layer
    with a random rectangle footprint in left-image coordinates.
    """
    rng = np.random.default_rng(seed)
    pad = max(disparities) + 1
    ext = width + 2 * pad
    # textures and footprints live on left-image columns u in [-pad, width + pad)
    layers = []
    for i, d in enumerate(disparities):
        tex = 40 + 180 * _texture(rng, height, ext, smooth)
        mask = np.zeros((height, ext), dtype=bool)
        if i == 0:
            mask[:] = True
        else:
            rw = int(rng.integers(width // 5, width // 2))
            rh = int(rng.integers(height // 5, height // 2))
            x0 = int(rng.integers(0, width - rw))
            y0 = int(rng.integers(0, height - rh))
            mask[y0 : y0 + rh, pad + x0 : pad + x0 + rw] = True
        layers.append((d, tex, mask))

    left = np.zeros((height, width))
    right = np.zeros((height, width))
    truth = np.zeros((height, width))
    zl = np.full((height, width), -1)
    zr = np.full((height, width), -1)
    ul = pad + np.arange(width)
    for d, tex, mask in layers:
        show = mask[:, ul] & (d > zl)
        left[show] = tex[:, ul][show]
        truth[show] = d
        zl[show] = d
        # right column xr sees the surface point at left column xr + d
        ur = ul + d
        showr = mask[:, ur] & (d > zr)
        right[showr] = tex[:, ur][showr]
        zr[showr] = d

    if noise > 0:
        left = left + rng.normal(scale=noise, size=left.shape)
        right = right + rng.normal(scale=noise, size=right.shape)
    left = np.clip(np.rint(left), 0, 255).astype(np.uint8)
    right = np.clip(np.rint(right), 0, 255).astype(np.uint8)
    gt = GroundTruthMap(truth.astype(np.float64), np.ones_like(truth, dtype=bool), 1.0)
    return Scene(GrayImage(left), GrayImage(right), gt, name)


def shifted_pair(width=64, height=48, shift=5, seed=0, smooth=1.0) -> Scene:
    """Right view is the left view translated by ``shift`` columns."""
    return layered_scene(width, height, (shift,), seed=seed, smooth=smooth, name=f"shift{shift}")


def random_image(rng, width, height) -> GrayImage:
    return GrayImage(rng.integers(0, 256, size=(height, width), dtype=np.uint8))

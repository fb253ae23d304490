import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rankstereo.config import SgmConfig
from rankstereo.cost import build_cost_volume
from rankstereo.refine import (DisparityMap, fill_holes, left_right_check, median_5x5, render,
                               right_disparity, subpixel, subpixel_offset)
from rankstereo.sgm import aggregate, winner_take_all
from rankstereo.synthetic import layered_scene, shifted_pair


def run_sgm(scene, dmax):
    cfg = SgmConfig(dmax=dmax)
    vol = build_cost_volume(scene.left, scene.right, cfg.cost_kind, cfg.kernel, dmax)
    agg = aggregate(vol, scene.left, cfg.penalties)
    return agg, DisparityMap(winner_take_all(agg))


def occlusion_mask(truth):
    """Left pixels whose match in the right view is hidden behind a nearer surface."""
    h, w = truth.shape
    occ = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            xr = x - truth[y, x]
            for x2 in range(x + 1, w):
                if x2 - truth[y, x2] == xr and truth[y, x2] > truth[y, x]:
                    occ[y, x] = True
                    break
    return occ


def test_right_disparity_bruteforce(rng):
    s = rng.integers(0, 20, (4, 7, 5))
    dr = right_disparity(s)
    for y in range(4):
        for x in range(7):
            cands = [(s[y, x + d, d], d) for d in range(5) if x + d < 7]
            assert dr[y, x] == min(cands)[1]


def test_lr_rigid_shift_valid():
    scene = shifted_pair(64, 40, shift=5, seed=4)
    agg, disp = run_sgm(scene, 12)
    checked = left_right_check(agg, disp)
    assert checked.valid[:, 12:-4].all()


def test_lr_single_disparity(rng):
    s = rng.integers(0, 9, (5, 6, 1))
    out = left_right_check(s, DisparityMap(np.zeros((5, 6), np.int32)))
    assert out.valid.all()


def test_lr_occlusion_band():
    scene = layered_scene(96, 72, (2, 14), seed=5)
    truth = scene.truth.disparity.astype(int)
    agg, disp = run_sgm(scene, 20)
    checked = left_right_check(agg, disp)
    occ = occlusion_mask(truth)
    assert occ.sum() > 50
    interior = np.zeros_like(occ)
    interior[5:-5, 22:-5] = True
    # most of the geometric occlusion band is rejected, very little else is
    assert (~checked.valid[occ & interior]).mean() > 0.6
    assert (~checked.valid[~occ & interior]).mean() < 0.05


def test_lr_never_revalidates(rng):
    s = rng.integers(0, 30, (6, 10, 4))
    d = DisparityMap(winner_take_all(s), rng.random((6, 10)) > 0.3)
    assert not (left_right_check(s, d).valid & ~d.valid).any()


def test_subpixel_offsets():
    assert subpixel_offset(6, 2, 6) == 0.0
    assert subpixel_offset(6, 2, 4) == pytest.approx(1 / 6)
    assert subpixel_offset(3, 3, 3) == 0.0
    # raw vertex at 110 / (2 * -90) = -0.61 is clamped
    assert subpixel_offset(10, 0, -100) == -0.5


def test_subpixel_map():
    s = np.array([[[1, 5, 9], [6, 2, 4], [6, 2, 6]]], dtype=np.int64)
    d = DisparityMap(winner_take_all(s))
    sub = subpixel(s, d)
    assert sub.disp[0, 0] == 0.0
    assert sub.disp[0, 1] == pytest.approx(1 + 1 / 6)
    assert sub.disp[0, 2] == 1.0


@given(arrays(np.int64, (3, 4, 6), elements=st.integers(0, 1000)))
def test_subpixel_bounded(s):
    d = DisparityMap(winner_take_all(s))
    sub = subpixel(s, d)
    assert np.all(np.abs(sub.disp - d.disp) <= 0.5)


def test_render():
    d = DisparityMap(np.array([[63.0, 0.0, 31.5, 10.0]]), np.array([[True, True, True, False]]))
    assert render(d, 64).tolist() == [[255, 0, 128, 0]]
    with pytest.raises(ValueError):
        render(d, 1)


@given(arrays(np.float64, 20, elements=st.floats(0, 63)))
def test_render_monotone(v):
    v = np.sort(v)
    g = render(DisparityMap(v[None, :]), 64)[0]
    assert (np.diff(g.astype(int)) >= 0).all()


def test_fill_holes():
    d = DisparityMap(np.array([[10, 0, 14, 3]]), np.array([[True, False, True, True]]))
    assert fill_holes(d).disp.tolist() == [[10, 10, 14, 3]]
    d = DisparityMap(np.array([[0, 0, 7, 9]]), np.array([[False, False, True, True]]))
    assert fill_holes(d).disp.tolist() == [[7, 7, 7, 9]]
    full = DisparityMap(np.arange(6).reshape(2, 3))
    assert np.array_equal(fill_holes(full).disp, full.disp)
    none = DisparityMap(np.zeros((1, 4)), np.zeros((1, 4), bool))
    assert not fill_holes(none).valid.any()


@given(arrays(np.int64, (4, 9), elements=st.integers(0, 60)), arrays(bool, (4, 9)))
def test_fill_keeps_valid(d, valid):
    out = fill_holes(DisparityMap(d, valid))
    assert np.array_equal(out.disp[valid], d[valid])
    rows_with_valid = valid.any(axis=1)
    assert out.valid[rows_with_valid].all()


def test_median_examples():
    assert np.array_equal(median_5x5(np.full((6, 7), 9, np.uint8)), np.full((6, 7), 9))
    z = np.zeros((9, 9), np.uint8)
    z[4, 4] = 255
    assert median_5x5(z)[4, 4] == 0
    grid = np.arange(1, 26, dtype=np.uint8).reshape(5, 5)
    assert median_5x5(grid)[2, 2] == 13


def test_median_bruteforce(rng):
    a = rng.integers(0, 256, (7, 8), dtype=np.uint8)
    out = median_5x5(a)
    for y in range(7):
        for x in range(8):
            vals = sorted(int(a[min(max(y + i, 0), 6), min(max(x + j, 0), 7)])
                          for i in range(-2, 3) for j in range(-2, 3))
            assert out[y, x] == vals[12]


@given(arrays(np.uint8, (6, 6)))
def test_median_values_subset(a):
    assert set(np.unique(median_5x5(a))) <= set(np.unique(a))

"""End-to-end smoke checks for the Python bindings.

The numeric heavy lifting is covered by the C++ suites; here we only make
sure the NumPy surface round-trips data, dispatches correctly, and raises
the mapped exception types.
"""

import math

import numpy as np
import pytest

import macchiato as mc


def f1_masks():
    pre = mc.make_preset("f1")
    assert pre["neighborhood"] == "n4"
    masks = pre["masks"]
    assert masks.shape == (2, 8)
    assert masks.dtype == np.uint8
    return masks


def test_name_lists():
    methods = mc.method_names()
    assert len(methods) == 10
    assert "mv" in methods and "macchiato-j" in methods
    assert len(mc.preset_names()) == 5


def test_fuse_hard_methods():
    masks = f1_masks()
    mv = mc.fuse(masks, "mv", neighborhood="n4")
    assert not mv["soft"]
    assert mv["mask"].nonzero()[0].tolist() == [3, 4]
    assert mv["volume"] == 2.0

    mj = mc.fuse(masks, "macchiato-j", neighborhood="n4")
    assert mj["mask"].nonzero()[0].tolist() == [2, 3, 4, 5]
    assert abs(mj["lmsd"] - 0.0625) < 1e-9
    assert len(mj["component_lmsd"]) == 1


def test_fuse_soft_methods():
    masks = f1_masks()
    ma = mc.fuse(masks, "ma", neighborhood="n4")
    assert ma["soft"]
    assert abs(ma["volume"] - 3.0) < 1e-12
    assert ma["thresholded_size"] == 2  # strictly above one half

    mml = mc.fuse(masks, "mml-staple", neighborhood="n4", prior="avg")
    assert len(mml["p"]) == 2 and len(mml["q"]) == 2
    assert all(0.0 < p <= 1.0 for p in mml["p"])


def test_lmsd_dispatch():
    masks = f1_masks()
    union = (masks.sum(axis=0) > 0).astype(np.uint8)
    assert abs(mc.lmsd(masks, union, "jaccard", neighborhood="n4") - 0.0625) < 1e-9
    # float64 candidates take the surrogate path
    soft = union.astype(np.float64) * 0.5
    tan = mc.lmsd(masks, soft, "tanimoto", neighborhood="n4")
    assert tan > 0.0
    with pytest.raises(ValueError):
        mc.lmsd(masks, soft, "jaccard", neighborhood="n4")


def test_exhaustive_agrees_with_heuristic():
    masks = f1_masks()
    oracle = mc.exhaustive_hard(masks, "jaccard", neighborhood="n4")
    assert oracle["mask"].nonzero()[0].tolist() == [2, 3, 4, 5]
    assert abs(oracle["lmsd"] - 0.0625) < 1e-12


def test_background_sweep():
    masks = f1_masks()
    rows = mc.background_sweep(masks, "mv", [0, 4], neighborhood="n4")
    assert [r["margin"] for r in rows] == [0, 4]
    assert [r["hard_size"] for r in rows] == [2.0, 2.0]
    assert all(math.isnan(r["p_mean"]) for r in rows)

    rows = mc.background_sweep(masks, "macchiato-j", [0, 4], neighborhood="n4")
    assert [r["hard_size"] for r in rows] == [4.0, 4.0]


def test_entropy():
    masks = f1_masks()
    ma = mc.fuse(masks, "ma", neighborhood="n4")
    want = 2.0 * math.log(2.0)  # two voxels at one half
    assert abs(mc.shannon_entropy(ma["mask"], neighborhood="n4") - want) < 1e-12


def test_exception_mapping():
    masks = f1_masks()
    with pytest.raises(ValueError):
        mc.fuse(masks, "nope", neighborhood="n4")
    with pytest.raises(ValueError):
        mc.fuse(masks, "mv", neighborhood="n4", heuristic="crown")
    with pytest.raises(ValueError):
        mc.fuse(masks, "mv", neighborhood="n4", prior="avg")
    with pytest.raises(ValueError):
        mc.fuse(masks, "mv", neighborhood="n5")
    big = np.ones((1, 8, 8), dtype=np.uint8)
    with pytest.raises(RuntimeError):
        mc.exhaustive_hard(big, "jaccard", neighborhood="n8")

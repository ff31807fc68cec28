import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from fsextrap.conceal import (Algorithm, BlockError, LossPattern, algorithm_config, block_window,
                              conceal, generate_grid_pattern, psnr_vs_iterations, read_pattern,
                              series_label, write_curve_csv, write_pattern, write_report_csv)
from fsextrap.grid import MISSING, OUTSIDE, SUPPORT
from fsextrap.spatial import Compensation

SMALL = dict(transform_size=16, rho_hat=0.8)


def _image(h=40, w=40, seed=0):
    rng = np.random.default_rng(seed)
    m, n = np.mgrid[0:h, 0:w]
    return np.clip(128 + 60 * np.sin(0.3 * m + 0.2 * n) + rng.normal(0, 6, (h, w)), 0, 255)


def test_standard_grid_pattern():
    p = generate_grid_pattern((512, 512), (16, 16))
    assert len(p) == 81
    assert p.block_size == (16, 16)
    rows = sorted({r for r, _ in p.origins})
    assert len(rows) == 9
    assert rows[0] >= 16 and rows[-1] + 16 + 16 <= 512
    assert min(np.diff(rows)) >= 32


def test_grid_pattern_errors():
    with pytest.raises(ValueError):
        generate_grid_pattern((10, 10), (16, 16))
    with pytest.raises(ValueError):
        generate_grid_pattern((512, 512), (16, 16), spacing=20)
    with pytest.raises(ValueError):
        generate_grid_pattern((100, 100), (16, 16), count_limit=81)


def test_single_centered_block():
    p = generate_grid_pattern((48, 48), (16, 16), count_limit=1)
    assert p.blocks == ((16, 16, 16, 16),)


def test_explicit_spacing():
    p = generate_grid_pattern((512, 512), (16, 16), spacing=48, count_limit=None)
    assert len(p) == 100
    p = generate_grid_pattern((512, 512), (16, 16), spacing=48, count_limit=81)
    assert len(p) == 81


def test_pattern_bounds_checked():
    with pytest.raises(ValueError):
        LossPattern((20, 20), ((10, 10, 16, 16),))


def test_pattern_file_round_trip(tmp_path):
    p = generate_grid_pattern((128, 96), (8, 8), count_limit=4, support=8)
    write_pattern(p, tmp_path / "p.txt")
    q = read_pattern(tmp_path / "p.txt", (128, 96))
    assert q == p
    (tmp_path / "bad.txt").write_text("# c\n1 2 3\n")
    with pytest.raises(ValueError):
        read_pattern(tmp_path / "bad.txt", (128, 96))


def test_algorithm_mapping():
    assert algorithm_config("fse").compensation is Compensation.NONE
    assert algorithm_config("ofse").compensation is Compensation.FULL
    cfg = algorithm_config("fofse", gamma=0.4, iterations=7)
    assert cfg.compensation is Compensation.CONSTANT and cfg.gamma == 0.4 and cfg.iterations == 7
    with pytest.raises(ValueError):
        algorithm_config("jpeg")


def test_block_window_border_and_neighbours():
    img = _image()
    pattern = LossPattern((40, 40), ((2, 2, 4, 4), (2, 8, 4, 4)))
    lost = pattern.missing_map()
    f, mask, origin = block_window(img, lost, (2, 2, 4, 4), 4)
    assert origin == (-2, -2)
    assert mask.shape == (12, 12)
    assert np.all(mask.labels[:2, :] == OUTSIDE)
    assert np.all(mask.labels[:, :2] == OUTSIDE)
    assert np.all(mask.labels[4:8, 4:8] == MISSING)
    # the neighbouring lost block covers window columns 10 and 11
    assert np.all(mask.labels[4:8, 10:12] == OUTSIDE)
    assert mask.labels[8, 10] == SUPPORT
    f2, mask2, _ = block_window(img, lost, (2, 8, 4, 4), 4)
    assert np.all(mask2.labels[4:8, 0:2] == OUTSIDE)
    assert np.all(f2[mask2.labels != SUPPORT] == 0.0)
    np.testing.assert_array_equal(f2[mask2.support], img[-2 + np.nonzero(mask2.support)[0],
                                                         4 + np.nonzero(mask2.support)[1]])


def test_zero_blocks_is_identity():
    img = _image()
    restored, report = conceal(img, LossPattern(img.shape, ()), "fofse")
    np.testing.assert_array_equal(restored, img)
    assert math.isinf(report.psnr_db) and report.n_blocks == 0


def test_pattern_image_mismatch():
    with pytest.raises(ValueError):
        conceal(_image(), LossPattern((30, 30), ()), "fse")


def test_block_errors_carry_identity():
    img = _image(8, 8)
    pattern = LossPattern((8, 8), ((0, 0, 8, 8),))
    with pytest.raises(BlockError) as info:
        conceal(img, pattern, "fofse", algorithm_config("fofse", **SMALL), support=2)
    assert info.value.index == 0 and "no support samples" in str(info.value)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(list(Algorithm)))
def test_write_back_isolation(seed, alg):
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 255, (36, 36))
    blocks = tuple((int(r), int(c), 4, 4) for r, c in rng.integers(0, 32, size=(3, 2)))
    pattern = LossPattern(img.shape, blocks)
    restored, _ = conceal(img, pattern, alg, algorithm_config(alg, iterations=8, **SMALL), support=4)
    keep = ~pattern.missing_map()
    np.testing.assert_array_equal(restored[keep], img[keep])


def test_block_order_and_threads_do_not_matter():
    img = _image(60, 60, seed=3)
    p = generate_grid_pattern(img.shape, (4, 4), count_limit=9, support=4)
    cfg = algorithm_config("fofse", iterations=30, **SMALL)
    a, ra = conceal(img, p, "fofse", cfg, support=4)
    b, rb = conceal(img, LossPattern(p.image_shape, p.blocks[::-1]), "fofse", cfg, support=4)
    c, rc = conceal(img, p, "fofse", cfg, support=4, threads=4)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, c)
    assert ra.psnr_db == rb.psnr_db == rc.psnr_db


def test_checkpoints_match_fresh_runs():
    img = _image(60, 60, seed=4)
    p = generate_grid_pattern(img.shape, (4, 4), count_limit=4, support=4)
    cfg = algorithm_config("fofse", iterations=20, **SMALL)
    _, rep = conceal(img, p, "fofse", cfg, support=4, checkpoint_stride=5)
    assert [i for i, _ in rep.curve] == [5, 10, 15, 20]
    for it, value in rep.curve:
        _, fresh = conceal(img, p, "fofse", algorithm_config("fofse", iterations=it, **SMALL), support=4)
        assert value == fresh.psnr_db
    assert rep.best_psnr_db == max(v for _, v in rep.curve)


def test_psnr_curve_table():
    img = _image(60, 60, seed=5)
    p = generate_grid_pattern(img.shape, (4, 4), count_limit=4, support=4)
    table = psnr_vs_iterations(img, p, [("fofse", 1.0), ("fse", 1.0), ("fofse", 0.3)], 12, 4,
                               support=4, transform_size=16)
    assert table.iterations == [4, 8, 12]
    assert table.series["FOFSE gamma=1"] == table.series["FSE"]
    assert set(table.series) == {"FOFSE gamma=1", "FSE", "FOFSE gamma=0.3"}
    it, val = table.peak("FSE")
    assert val == max(table.series["FSE"])
    empty = psnr_vs_iterations(img, p, [("fse", 1.0)], 3, 4, support=4, transform_size=16)
    assert empty.iterations == [] and empty.series == {"FSE": []}
    with pytest.raises(ValueError):
        psnr_vs_iterations(img, p, [("fse", 1.0)], 10, 0)


def test_report_and_curve_csv():
    img = _image()
    p = generate_grid_pattern(img.shape, (4, 4), count_limit=1, support=4)
    _, rep = conceal(img, p, "fse", algorithm_config("fse", iterations=5, **SMALL), support=4, name="x")
    text = write_report_csv([rep], comment="cfg")
    lines = text.splitlines()
    assert lines[0] == "# cfg"
    assert lines[1] == "image,algorithm,gamma,iterations,psnr_db,sec_per_block"
    assert lines[2].startswith("x,fse,1,5,")
    table = psnr_vs_iterations(img, p, [("fse", 1.0)], 4, 2, support=4, transform_size=16)
    curve = write_curve_csv(table).splitlines()
    assert curve[0] == "series,iteration,psnr_db" and len(curve) == 3
    assert series_label("ofse", 1.0) == "OFSE"

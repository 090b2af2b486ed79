import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patsketch import (
    MapFamily,
    UsageError,
    all_sketch,
    compress_pair,
    decompose_blocks,
    derive_params,
    estimate_aligned_l2sq,
    single_sketch,
)


def make_family(d=32, sigma=4, k=4, seed=0, fid="engine"):
    params = derive_params(64 * d, 16 * d, 0.3, seed, {"d": d, "k": k, "sigma": sigma})
    return MapFamily.create(params, fid, depth=k)


def test_decompose_examples():
    assert decompose_blocks(13) == [3, 2, 0]
    assert decompose_blocks(16) == [4]
    assert decompose_blocks(1) == [0]


@settings(max_examples=200, deadline=None)
@given(b=st.integers(min_value=1, max_value=1 << 40))
def test_decompose_property(b):
    levels = decompose_blocks(b)
    assert sum(1 << lv for lv in levels) == b
    assert levels == sorted(levels, reverse=True)
    assert len(levels) <= b.bit_length()


def test_decompose_rejects_nonpositive():
    with pytest.raises(UsageError):
        decompose_blocks(0)
    with pytest.raises(UsageError):
        decompose_blocks(-3)


def test_single_zero_input():
    fam = make_family()
    pyr = single_sketch(np.zeros(4 * 32), fam)
    for lvl in pyr.levels:
        assert np.array_equal(lvl, np.zeros_like(lvl))


def test_single_level_shapes():
    fam = make_family(d=16, k=3)
    pyr = single_sketch(np.random.default_rng(0).standard_normal(8 * 16), fam)
    assert [lvl.shape[1] for lvl in pyr.levels] == [8, 4, 2, 1]
    assert pyr.mode == "single"


def test_single_one_nonzero_block_follows_chain():
    # with all other blocks zero, the top equals the compressor chain
    # applied to that block paired with zeros at every level
    d = 16
    fam = make_family(d=d, k=3, sigma=3)
    rng = np.random.default_rng(5)
    block = rng.standard_normal(d)
    for b in range(8):
        x = np.zeros(8 * d)
        x[b * d : (b + 1) * d] = block
        top = single_sketch(x, fam).entry(3, 0)
        v = block.copy()
        zero = np.zeros(d)
        for i in range(1, 4):
            if (b >> (i - 1)) & 1:
                v = compress_pair(fam.compressor(i), zero, v)
            else:
                v = compress_pair(fam.compressor(i), v, zero)
        assert np.array_equal(top, v)


def test_single_usage_errors():
    fam = make_family(d=8, k=2)
    with pytest.raises(UsageError):
        single_sketch(np.zeros(12), fam)  # not a multiple of d
    with pytest.raises(UsageError):
        single_sketch(np.zeros(3 * 8), fam)  # not a power of two
    with pytest.raises(UsageError):
        single_sketch(np.zeros(8 * 8), fam)  # needs 3 levels, family has 2


def test_single_linearity():
    fam = make_family(d=16, k=3, sigma=4)
    rng = np.random.default_rng(9)
    x, y = rng.standard_normal(8 * 16), rng.standard_normal(8 * 16)
    a, b = 1.7, -0.4
    px, py = single_sketch(x, fam), single_sketch(y, fam)
    pz = single_sketch(a * x + b * y, fam)
    for lv in range(4):
        np.testing.assert_allclose(
            pz.levels[lv],
            a * px.levels[lv] + b * py.levels[lv],
            rtol=1e-9,
            atol=1e-12,
        )


def test_single_norm_tracking_frequency():
    # 200 seeds, 64 blocks: top energy within (1 +- 0.3) of the input
    # for at least 90% of runs
    d, k = 256, 6
    rng = np.random.default_rng(3)
    hits = 0
    trials = 200
    for i in range(trials):
        fam = make_family(d=d, k=k, sigma=6, seed=i, fid="norm")
        x = rng.standard_normal(64 * d)
        top = single_sketch(x, fam).entry(k, 0)
        ratio = float(top @ top) / float(x @ x)
        hits += 0.7 <= ratio <= 1.3
    assert hits / trials >= 0.9


def test_energy_tracking_per_level():
    # per-level total energy within (1 +- eps') of the previous level
    d, sigma, k = 300, 30, 4
    eps = 0.2
    hits = trials = 0
    rng = np.random.default_rng(10)
    for i in range(50):
        fam = make_family(d=d, k=k, sigma=sigma, seed=i, fid="energy")
        x = rng.standard_normal(16 * d)
        pyr = single_sketch(x, fam)
        ok = True
        for lv in range(1, k + 1):
            prev = float(np.sum(pyr.levels[lv - 1] ** 2))
            cur = float(np.sum(pyr.levels[lv] ** 2))
            ok &= (1 - eps) * prev <= cur <= (1 + eps) * prev
        hits += ok
        trials += 1
    assert hits / trials >= 0.9


def test_all_sketch_level_counts():
    fam = make_family(d=8, k=3)
    pyr = all_sketch(np.random.default_rng(1).standard_normal(10 * 8), fam)
    assert [lvl.shape[1] for lvl in pyr.levels] == [10, 9, 7, 3]
    small = all_sketch(np.random.default_rng(1).standard_normal(3 * 8), fam)
    assert [lvl.shape[1] for lvl in small.levels] == [3, 2, 0, 0]


def test_all_zero_input():
    fam = make_family(d=8, k=2)
    pyr = all_sketch(np.zeros(6 * 8), fam)
    for lvl in pyr.levels:
        assert np.array_equal(lvl, np.zeros_like(lvl))


def test_all_two_blocks_matches_single():
    fam = make_family(d=16, k=1)
    x = np.random.default_rng(2).standard_normal(2 * 16)
    a = all_sketch(x, fam)
    s = single_sketch(x, fam)
    assert a.levels[1].shape[1] == 1
    assert np.array_equal(a.entry(1, 0), s.entry(1, 0))


def test_all_matches_single_every_entry():
    # every all-mode entry equals the top of a fresh single fold of the
    # same slice, built with the same maps
    d, k = 16, 3
    fam = make_family(d=d, k=k, sigma=2)
    rng = np.random.default_rng(4)
    x = rng.standard_normal(8 * d)
    pyr = all_sketch(x, fam)
    for lv in range(k + 1):
        span = 1 << lv
        for j in range(pyr.levels[lv].shape[1]):
            ref = single_sketch(x[j * d : (j + span) * d], fam).entry(lv, 0)
            got = pyr.entry(lv, j)
            np.testing.assert_allclose(got, ref, rtol=1e-9, atol=1e-12)


def test_all_matches_handrolled_compress_chain():
    # independent route: fold one slice with scalar compress_pair calls
    d = 8
    fam = make_family(d=d, k=2, sigma=2)
    rng = np.random.default_rng(6)
    x = rng.standard_normal(6 * d)
    pyr = all_sketch(x, fam)
    blocks = x.reshape(6, d)
    j = 1
    lvl1_a = compress_pair(fam.compressor(1), blocks[j], blocks[j + 1])
    lvl1_b = compress_pair(fam.compressor(1), blocks[j + 2], blocks[j + 3])
    lvl2 = compress_pair(fam.compressor(2), lvl1_a, lvl1_b)
    np.testing.assert_allclose(pyr.entry(2, j), lvl2, rtol=1e-12, atol=1e-12)


def test_estimate_identical_fragments_zero():
    d = 16
    fam = make_family(d=d, k=3, sigma=3)
    rng = np.random.default_rng(7)
    frag = rng.standard_normal(5 * d)
    text = np.concatenate([rng.standard_normal(3 * d), frag, rng.standard_normal(2 * d)])
    tp = all_sketch(text, fam)
    pp = single_sketch(np.concatenate([frag, np.zeros(3 * d)]), fam)
    est = estimate_aligned_l2sq(tp, pp, 3, decompose_blocks(5))
    assert est == 0.0


def test_estimate_single_level_is_top_difference():
    d = 16
    fam = make_family(d=d, k=2, sigma=3)
    rng = np.random.default_rng(8)
    t = rng.standard_normal(6 * d)
    p = rng.standard_normal(4 * d)
    tp = all_sketch(t, fam)
    pp = single_sketch(p, fam)
    est = estimate_aligned_l2sq(tp, pp, 1, [2])
    diff = tp.entry(2, 1) - pp.entry(2, 0)
    assert est == pytest.approx(float(diff @ diff), rel=1e-12)


def test_estimate_matches_exact_frequency():
    # estimates stay within (1 +- 0.3) of the true squared distance for
    # at least 90% of 200 seeded runs
    d, k = 256, 3
    rng = np.random.default_rng(11)
    hits = 0
    trials = 200
    for i in range(trials):
        fam = make_family(d=d, k=k, sigma=6, seed=1000 + i, fid="est")
        t = rng.standard_normal(10 * d)
        p = rng.standard_normal(5 * d)
        tp = all_sketch(t, fam)
        pp = single_sketch(np.concatenate([p, np.zeros(3 * d)]), fam)
        start = int(rng.integers(0, 6))
        est = estimate_aligned_l2sq(tp, pp, start, decompose_blocks(5))
        frag = t[start * d : (start + 5) * d]
        exact = float(np.sum((frag - p) ** 2))
        hits += (1 - 0.3) * exact <= est <= (1 + 0.3) * exact
    assert hits / trials >= 0.9


def test_estimate_symmetry():
    d = 16
    fam = make_family(d=d, k=3, sigma=3)
    rng = np.random.default_rng(12)
    t = rng.standard_normal(9 * d)
    p = rng.standard_normal(8 * d)
    tp = all_sketch(t, fam)
    pp = single_sketch(p, fam)
    dec = decompose_blocks(5)
    a = estimate_aligned_l2sq(tp, pp, 2, dec, pat_start_block=0)
    b = estimate_aligned_l2sq(pp, tp, 0, dec, pat_start_block=2)
    assert a == pytest.approx(b, rel=1e-12)


def test_estimate_family_mismatch_rejected():
    d = 16
    fam_a = make_family(d=d, k=2, fid="a")
    fam_b = make_family(d=d, k=2, fid="b")
    x = np.random.default_rng(0).standard_normal(4 * d)
    with pytest.raises(UsageError):
        estimate_aligned_l2sq(all_sketch(x, fam_a), single_sketch(x, fam_b), 0, [2])


def test_estimate_out_of_range_rejected():
    d = 16
    fam = make_family(d=d, k=2)
    x = np.random.default_rng(0).standard_normal(4 * d)
    tp, pp = all_sketch(x, fam), single_sketch(x, fam)
    with pytest.raises(UsageError):
        estimate_aligned_l2sq(tp, pp, 3, [2])  # block 3 + span 4 > 4 blocks
    with pytest.raises(UsageError):
        pp.entry(1, 1)  # unaligned single-mode block start


def test_family_determinism():
    fam1 = make_family(d=24, k=3, sigma=4, seed=42)
    fam2 = make_family(d=24, k=3, sigma=4, seed=42)
    for c1, c2 in zip(fam1.compressors, fam2.compressors):
        assert np.array_equal(c1.left_rows, c2.left_rows)
        assert np.array_equal(c1.right_signs, c2.right_signs)
    assert fam1.key == fam2.key

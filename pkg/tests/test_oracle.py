import numpy as np
import pytest

from patsketch import UsageError, error_report, exact_profile, make_profile


def test_l2sq_example():
    prof = exact_profile([1, 2, 3], [1, 1], "l2sq")
    assert prof.values.tolist() == [1.0, 5.0]
    assert prof.positions.tolist() == [0, 1]
    assert prof.exact_flags.all()


def test_l2_is_sqrt():
    sq = exact_profile([1, 2, 3], [1, 1], "l2sq")
    l2 = exact_profile([1, 2, 3], [1, 1], "l2")
    np.testing.assert_array_equal(l2.values, np.sqrt(sq.values))


def test_hamming_example():
    prof = exact_profile("abab", "ab", "hamming")
    assert prof.values.tolist() == [0.0, 2.0, 0.0]


def test_l1_example():
    prof = exact_profile([1, 2, 3], [1, 1], "l1")
    assert prof.values.tolist() == [1.0, 3.0]


def test_usage_errors():
    with pytest.raises(UsageError):
        exact_profile([1, 2], [1, 2, 3], "l1")
    with pytest.raises(UsageError):
        exact_profile([1, 2, 3], [1], "chebyshev")


def test_metric_inequalities_on_random_ints():
    rng = np.random.default_rng(0)
    for _ in range(10):
        t = rng.integers(0, 9, size=40)
        p = rng.integers(0, 9, size=7)
        ham = exact_profile(t, p, "hamming").values
        l1 = exact_profile(t, p, "l1").values
        l2sq = exact_profile(t, p, "l2sq").values
        assert (ham <= l1).all()
        maxdiff = np.abs(t.max() - p.min()), np.abs(p.max() - t.min())
        assert (l2sq <= max(maxdiff) * l1 + 1e-9).all()


def test_reversal_equivariance():
    rng = np.random.default_rng(1)
    t = rng.integers(0, 50, size=30).astype(float)
    p = rng.integers(0, 50, size=6).astype(float)
    fwd = exact_profile(t, p, "l2sq").values
    rev = exact_profile(t[::-1], p[::-1], "l2sq").values
    np.testing.assert_array_equal(fwd, rev[::-1])


def test_error_report_exact_match():
    est = make_profile("l1", [1.0, 2.0, 0.0])
    ref = make_profile("l1", [1.0, 2.0, 0.0], exact=True)
    rep = error_report(est, ref, 0.25)
    assert rep.fraction_within == 1.0
    assert rep.max_rel_error == 0.0
    assert rep.n_infinite == 0


def test_error_report_margins():
    ref_vals = np.array([2.0, 4.0, 8.0])
    ref = make_profile("l1", ref_vals, exact=True)
    inside = error_report(make_profile("l1", 1.2 * ref_vals), ref, 0.25)
    assert inside.fraction_within == 1.0
    outside = error_report(make_profile("l1", 1.3 * ref_vals), ref, 0.25)
    assert outside.fraction_within == 0.0
    assert outside.median_rel_error == pytest.approx(0.3)


def test_error_report_zero_handling():
    ref = make_profile("l1", [0.0, 0.0, 5.0], exact=True)
    est = make_profile("l1", [0.0, 1.0, 5.0])
    rep = error_report(est, ref, 0.25)
    assert rep.n_infinite == 1
    assert rep.rel_errors[0] == 0.0
    assert np.isinf(rep.rel_errors[1])
    assert rep.fraction_within == pytest.approx(2 / 3)


def test_error_report_excludes_exact_flagged():
    ref = make_profile("l1", [1.0, 1.0], exact=True)
    est = make_profile("l1", [9.0, 1.0])
    est.exact_flags[0] = True  # flagged positions leave the statistics
    rep = error_report(est, ref, 0.1)
    assert rep.n_excluded_exact == 1
    assert rep.n_evaluated == 1
    assert rep.fraction_within == 1.0


def test_error_report_mismatch_rejected():
    a = make_profile("l1", [1.0])
    b = make_profile("l2", [1.0], exact=True)
    with pytest.raises(UsageError):
        error_report(a, b, 0.1)
    c = make_profile("l1", [1.0, 2.0], exact=True)
    with pytest.raises(UsageError):
        error_report(a, c, 0.1)

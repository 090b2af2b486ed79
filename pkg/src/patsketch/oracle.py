"""Brute-force exact profiles and error statistics.

The oracle is the ground truth for every verification run, so it stays
an obviously correct O(n m) double loop; only the inner sum is
vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .profile import DistanceProfile, METRICS, as_numeric, as_tokens, make_profile


def exact_profile(T, P, metric: str) -> DistanceProfile:
    """Exact distance at every alignment, computed directly."""
    if metric not in METRICS:
        raise UsageError(f"unknown metric {metric!r}, expected one of {METRICS}")
    if metric == "hamming":
        t, p = as_tokens(T), as_tokens(P)
    else:
        t, p = as_numeric(T), as_numeric(P)
    n, m = t.size, p.size
    if not 1 <= m <= n:
        raise UsageError(f"need 1 <= m <= n, got m={m}, n={n}")
    out = np.empty(n - m + 1)
    for i in range(n - m + 1):
        w = t[i : i + m]
        if metric == "hamming":
            out[i] = np.count_nonzero(w != p)
        elif metric == "l1":
            out[i] = np.abs(w - p).sum()
        else:
            diff = w - p
            out[i] = np.dot(diff, diff)
    if metric == "l2":
        np.sqrt(out, out=out)
    return make_profile(metric, out, params=None, exact=True)


@dataclass
class ErrorReport:
    """Per-position relative errors of an estimate against the oracle.

    Positions flagged exact in the estimate are excluded.  Where the
    oracle is zero, the relative error is 0 if the estimate is also zero
    and the infinity sentinel otherwise; infinite entries are counted
    separately and left out of the median and max.
    """

    epsilon: float
    rel_errors: np.ndarray
    fraction_within: float
    median_rel_error: float
    max_rel_error: float
    n_evaluated: int
    n_excluded_exact: int
    n_infinite: int


def error_report(estimate: DistanceProfile, exact: DistanceProfile, epsilon: float) -> ErrorReport:
    if estimate.metric != exact.metric:
        raise UsageError(f"metric mismatch: {estimate.metric} vs {exact.metric}")
    if len(estimate) != len(exact):
        raise UsageError(f"length mismatch: {len(estimate)} vs {len(exact)}")
    mask = ~estimate.exact_flags
    est = estimate.values[mask]
    ref = exact.values[mask]
    rel = np.zeros(est.size)
    zero = ref == 0.0
    np.divide(np.abs(est - ref), ref, out=rel, where=~zero)
    rel[zero & (est != 0.0)] = np.inf
    finite = np.isfinite(rel)
    return ErrorReport(
        epsilon=float(epsilon),
        rel_errors=rel,
        fraction_within=float(np.mean(rel <= epsilon)) if rel.size else 1.0,
        median_rel_error=float(np.median(rel[finite])) if finite.any() else 0.0,
        max_rel_error=float(rel[finite].max()) if finite.any() else 0.0,
        n_evaluated=int(rel.size),
        n_excluded_exact=int(np.count_nonzero(~mask)),
        n_infinite=int(np.count_nonzero(~finite)),
    )

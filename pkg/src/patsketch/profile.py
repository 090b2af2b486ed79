"""Distance profile container and input coercion helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .jl import SketchParams

METRICS = ("l2", "l2sq", "l1", "hamming")


@dataclass
class DistanceProfile:
    """One value per alignment of the pattern against the text.

    positions are 0-based alignment indices 0..n-m.  exact_flags marks
    positions whose value came from the exact oracle rather than an
    estimate (the fallback path sets all of them).
    """

    metric: str
    positions: np.ndarray
    values: np.ndarray
    params_echo: SketchParams | None = None
    exact_flags: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise UsageError(f"unknown metric {self.metric!r}, expected one of {METRICS}")
        self.positions = np.asarray(self.positions, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.exact_flags is None:
            self.exact_flags = np.zeros(self.values.shape, dtype=bool)
        self.exact_flags = np.asarray(self.exact_flags, dtype=bool)
        if not (self.positions.shape == self.values.shape == self.exact_flags.shape):
            raise RuntimeError("profile arrays disagree in length")
        if self.values.size and self.values.min() < 0.0:
            raise RuntimeError("distance values must be non-negative")

    def __len__(self) -> int:
        return self.values.size


def make_profile(metric, values, params=None, exact=False) -> DistanceProfile:
    values = np.asarray(values, dtype=np.float64)
    flags = np.full(values.shape, bool(exact))
    return DistanceProfile(
        metric=metric,
        positions=np.arange(values.size, dtype=np.int64),
        values=values,
        params_echo=params,
        exact_flags=flags,
    )


def as_numeric(seq) -> np.ndarray:
    """Coerce a numeric sequence to a 1-D float64 array."""
    if isinstance(seq, (str, bytes)):
        raise UsageError("numeric metrics need number sequences, not text")
    try:
        arr = np.asarray(seq, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"input is not numeric: {exc}") from None
    if arr.ndim != 1:
        raise UsageError(f"expected a 1-D sequence, got shape {arr.shape}")
    return arr


def as_tokens(seq) -> np.ndarray:
    """Coerce a token sequence to a 1-D integer array.

    Strings and bytes become their byte values; anything else must be
    integer-valued.
    """
    if isinstance(seq, str):
        seq = seq.encode("utf-8")
    if isinstance(seq, (bytes, bytearray)):
        return np.frombuffer(bytes(seq), dtype=np.uint8).astype(np.int64)
    arr = np.asarray(seq)
    if arr.ndim != 1:
        raise UsageError(f"expected a 1-D token sequence, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.issubdtype(arr.dtype, np.floating) or (arr != np.floor(arr)).any():
            raise UsageError("tokens must be integers or text")
        arr = arr.astype(np.int64)
    return arr.astype(np.int64)

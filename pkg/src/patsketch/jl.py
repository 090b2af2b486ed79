"""Seeded column-sparse sign compressors and parameter derivation.

The primitive used everywhere else in the package is a linear map

    phi(x, y) = (A0 x + A1 y) / sqrt(sigma),      x, y in R^d

where A0 and A1 are d x d matrices whose columns each hold exactly
``sigma`` entries from {-1, +1} at distinct random rows.  Applying phi
costs O(d * sigma) additions, and ||phi(x, y)||^2 preserves
||x||^2 + ||y||^2 within a (1 +- eps) factor with high probability once
d ~ C * log2(n) / eps^2 and sigma ~ eps * d.

Every random draw is keyed by a (master_seed, label) pair, one label per
consumer (one per matrix column, for instance), so repeated runs are
bit-identical and independent streams never share state.

Batched application works on matrices whose COLUMNS are the input
vectors; column j of the output depends only on column j of the inputs
and the accumulation order per output coordinate is fixed, so any
batching or slicing of batches yields bit-identical values.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError, UsageError

_MASK64 = (1 << 64) - 1

#: Default constant C in the dimension formula d = ceil(C * log2(max(n, 4)) / eps^2).
#: Large enough for the verification suite at desk scale; override to tune.
DEFAULT_DIM_CONSTANT = 4.0


@dataclass(frozen=True)
class SeedStream:
    """A named, reproducible source of pseudorandomness.

    The same (master_seed, label) always yields the identical stream.
    ``child`` derives a longer label, so separate consumers can draw in
    any order (or in parallel) without affecting each other.
    """

    master_seed: int
    label: str

    def child(self, suffix: str) -> "SeedStream":
        return SeedStream(self.master_seed, f"{self.label}/{suffix}")

    def generator(self) -> np.random.Generator:
        key = f"{self.master_seed & _MASK64}|{self.label}".encode()
        digest = hashlib.blake2b(key, digest_size=16).digest()
        words = np.frombuffer(digest, dtype=np.uint32)
        seq = np.random.SeedSequence([int(w) for w in words])
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class SketchParams:
    """All derived constants for one run plus the master seed.

    Fields:
        n, m: text and pattern lengths of the instance.
        epsilon: total relative-error target in (0, 1).
        master_seed: root of every random draw.
        d: sketch dimension (block size).
        sigma: nonzeros per compressor column.
        k: number of compression levels the map family provides.
        h: edge granularity; must divide d.
        eps_sketch: per-level error budget; eps_sketch * (k+1) <= epsilon.
        eps_embed: embedding budget for the token / integer pipelines
            (zero when unused).
    """

    n: int
    m: int
    epsilon: float
    master_seed: int
    d: int
    sigma: int
    k: int
    h: int
    eps_sketch: float
    eps_embed: float = 0.0

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ParameterError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.d < 1:
            raise ParameterError(f"d must be positive, got {self.d}")
        if not 1 <= self.sigma <= self.d:
            raise ParameterError(
                f"need 1 <= sigma <= d, got sigma={self.sigma}, d={self.d}"
            )
        if self.k < 0:
            raise ParameterError(f"k must be non-negative, got {self.k}")
        if self.h < 1 or self.d % self.h != 0:
            raise ParameterError(
                f"h must be a positive divisor of d, got h={self.h}, d={self.d}"
            )
        if self.eps_sketch <= 0.0:
            raise ParameterError(f"eps_sketch must be positive, got {self.eps_sketch}")
        if self.eps_sketch * (self.k + 1) > self.epsilon + 1e-12:
            raise ParameterError(
                "per-level budget exceeds total: "
                f"eps_sketch={self.eps_sketch} * (k+1)={self.k + 1} > {self.epsilon}"
            )


def dimension_for(eps_sketch: float, n: int, c: float = DEFAULT_DIM_CONSTANT) -> int:
    """Sketch dimension for a per-level budget of ``eps_sketch``."""
    return int(math.ceil(c * math.log2(max(n, 4)) / eps_sketch**2))


def sparsity_for(eps_sketch: float, d: int) -> int:
    """Per-column nonzero count for a per-level budget of ``eps_sketch``."""
    return max(1, int(math.ceil(eps_sketch * d)))


def levels_for_blocks(blocks: int) -> int:
    """ceil(log2(blocks)) for blocks >= 1; 0 for an empty core."""
    return (blocks - 1).bit_length() if blocks >= 1 else 0


def core_blocks(m: int, h: int, d: int) -> int:
    """Number of whole d-blocks in the sketched core of an m-long pattern.

    The core is m - 2h rounded down to a multiple of d; the shortfall is
    summed exactly as part of the tail edge.
    """
    return max(0, (m - 2 * h) // d)


_OVERRIDE_KEYS = frozenset({"c", "d", "h", "sigma", "k", "eps_sketch", "eps_embed"})


def derive_params(
    n: int,
    m: int,
    epsilon: float,
    master_seed: int,
    overrides: dict | None = None,
) -> SketchParams:
    """Derive all run constants from an instance size and error target.

    Defaults:
        eps_sketch = epsilon / (2 * (k + 1)), reserving half the total
            budget for level accumulation;
        d = ceil(C * log2(max(n, 4)) / eps_sketch^2) with C = 4;
        sigma = max(1, ceil(eps_sketch * d));
        h = d;
        k = ceil(log2(max(1, core_blocks))) for the edge-split geometry.

    k and d depend on each other through the core length, so the integer
    fixed point is iterated from k = 0; if the iteration ever cycles the
    largest k seen wins (smaller per-level budget, never a larger one).

    ``overrides`` may pin any of: c, d, h, sigma, k, eps_sketch,
    eps_embed.  Overrides that violate the invariants raise
    ParameterError.
    """
    overrides = dict(overrides or {})
    unknown = set(overrides) - _OVERRIDE_KEYS
    if unknown:
        raise ParameterError(f"unknown override keys: {sorted(unknown)}")
    if not 1 <= m <= n:
        raise ParameterError(f"need 1 <= m <= n, got m={m}, n={n}")
    if not 0.0 < epsilon < 1.0:
        raise ParameterError(f"epsilon must be in (0, 1), got {epsilon}")
    c = float(overrides.get("c", DEFAULT_DIM_CONSTANT))
    if c <= 0.0:
        raise ParameterError(f"c must be positive, got {c}")

    def stage(k: int) -> tuple[float, int, int]:
        eps_sketch = float(overrides.get("eps_sketch", epsilon / (2.0 * (k + 1))))
        if eps_sketch <= 0.0:
            raise ParameterError(f"eps_sketch must be positive, got {eps_sketch}")
        d = int(overrides.get("d", dimension_for(eps_sketch, n, c)))
        h = int(overrides.get("h", d))
        return eps_sketch, d, h

    if "k" in overrides:
        k = int(overrides["k"])
        eps_sketch, d, h = stage(k)
    else:
        k, seen = 0, set()
        for _ in range(128):
            eps_sketch, d, h = stage(k)
            k_next = levels_for_blocks(core_blocks(m, h, d))
            if k_next == k:
                break
            if k_next in seen:
                k = max(seen | {k_next})
                eps_sketch, d, h = stage(k)
                break
            seen.add(k)
            k = k_next
        else:  # pragma: no cover - the loop settles within a couple of steps
            raise ParameterError("level-count derivation did not converge")

    sigma = int(overrides.get("sigma", sparsity_for(eps_sketch, d)))
    eps_embed = float(overrides.get("eps_embed", 0.0))
    return SketchParams(
        n=int(n),
        m=int(m),
        epsilon=float(epsilon),
        master_seed=int(master_seed),
        d=d,
        sigma=sigma,
        k=k,
        h=h,
        eps_sketch=eps_sketch,
        eps_embed=eps_embed,
    )


class PairCompressor:
    """One linear map phi(x, y) = (A0 x + A1 y) / sqrt(sigma).

    Both matrices are stored column-sparse: ``left_rows[c]`` lists the
    ``sigma`` distinct rows carrying column c of A0 and ``left_signs[c]``
    the matching +-1 entries (same for the right side).  The
    1/sqrt(sigma) scale is applied once per output coordinate during
    application, not baked into the stored entries.
    """

    __slots__ = (
        "d",
        "sigma",
        "left_rows",
        "left_signs",
        "right_rows",
        "right_signs",
        "left_mat",
        "right_mat",
        "scale",
    )

    def __init__(self, d, sigma, left_rows, left_signs, right_rows, right_signs):
        if not 1 <= sigma <= d:
            raise ParameterError(f"need 1 <= sigma <= d, got sigma={sigma}, d={d}")
        self.d = int(d)
        self.sigma = int(sigma)
        self.left_rows = np.ascontiguousarray(left_rows, dtype=np.int64)
        self.left_signs = np.ascontiguousarray(left_signs, dtype=np.int8)
        self.right_rows = np.ascontiguousarray(right_rows, dtype=np.int64)
        self.right_signs = np.ascontiguousarray(right_signs, dtype=np.int8)
        for rows, signs in (
            (self.left_rows, self.left_signs),
            (self.right_rows, self.right_signs),
        ):
            if rows.shape != (self.d, self.sigma) or signs.shape != rows.shape:
                raise ParameterError("column arrays must have shape (d, sigma)")
            if rows.min() < 0 or rows.max() >= self.d:
                raise ParameterError("row indices must lie in [0, d)")
            srt = np.sort(rows, axis=1)
            if self.sigma > 1 and not (np.diff(srt, axis=1) > 0).all():
                raise ParameterError("row indices within a column must be distinct")
            if not np.isin(signs, (-1, 1)).all():
                raise ParameterError("signs must be +-1")
        self.left_mat = _column_matrix(self.d, self.left_rows, self.left_signs)
        self.right_mat = _column_matrix(self.d, self.right_rows, self.right_signs)
        self.scale = 1.0 / math.sqrt(self.sigma)

    @property
    def left_cols(self):
        """Column c as a list of (row, sign) pairs, left matrix."""
        return [
            list(zip(self.left_rows[c].tolist(), self.left_signs[c].tolist()))
            for c in range(self.d)
        ]

    @property
    def right_cols(self):
        return [
            list(zip(self.right_rows[c].tolist(), self.right_signs[c].tolist()))
            for c in range(self.d)
        ]

    def apply_cols(self, left: np.ndarray, right: np.ndarray | None) -> np.ndarray:
        """Compress column pairs: out[:, j] = phi(left[:, j], right[:, j]).

        ``right=None`` stands for an all-zero right input and skips its
        matrix product (numerically identical).  Pass C-contiguous
        (d, B) arrays to avoid internal copies.
        """
        if left.ndim != 2 or left.shape[0] != self.d:
            raise UsageError(f"expected columns of dimension {self.d}, got {left.shape}")
        acc = self.left_mat @ left
        if right is not None:
            if right.shape != left.shape:
                raise UsageError(
                    f"left/right shape mismatch: {left.shape} vs {right.shape}"
                )
            acc += self.right_mat @ right
        acc *= self.scale
        return acc


def _column_matrix(d: int, rows: np.ndarray, signs: np.ndarray) -> sp.csc_array:
    sigma = rows.shape[1]
    cols = np.repeat(np.arange(d, dtype=np.int64), sigma)
    mat = sp.csc_array(
        (signs.ravel().astype(np.float64), (rows.ravel(), cols)), shape=(d, d)
    )
    mat.sort_indices()
    return mat


def draw_compressor(stream: SeedStream, d: int, sigma: int) -> PairCompressor:
    """Draw one compressor from the stream.

    Each of the 2d columns uses its own child stream: sigma distinct row
    positions come from a seeded shuffle of [0, d) and the signs are
    uniform +-1.  The draw is deterministic in (stream, d, sigma).
    """
    if not 1 <= sigma <= d:
        raise ParameterError(f"need 1 <= sigma <= d, got sigma={sigma}, d={d}")
    sides = {}
    for tag in ("L", "R"):
        rows = np.empty((d, sigma), dtype=np.int64)
        signs = np.empty((d, sigma), dtype=np.int8)
        for col in range(d):
            g = stream.child(f"{tag}/{col}").generator()
            rows[col] = g.permutation(d)[:sigma]
            signs[col] = g.integers(0, 2, size=sigma).astype(np.int8) * 2 - 1
        sides[tag] = (rows, signs)
    return PairCompressor(d, sigma, *sides["L"], *sides["R"])


def compress_pair(phi: PairCompressor, x, y) -> np.ndarray:
    """Evaluate phi on a single vector pair."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (phi.d,) or y.shape != (phi.d,):
        raise UsageError(
            f"expected two vectors of length {phi.d}, got {x.shape} and {y.shape}"
        )
    return phi.apply_cols(
        np.ascontiguousarray(x[:, None]), np.ascontiguousarray(y[:, None])
    )[:, 0]

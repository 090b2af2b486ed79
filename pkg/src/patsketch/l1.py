"""Absolute-difference profiles via a recursive unary projector.

An integer x in [0, u) is conceptually the unary word 1^x 0^(u-x); the
squared distance between two unary words equals |x - y| exactly.  The
projector realizes the composed compression of that unary word without
ever materializing it: level c splits the 2^c * d-wide range in half,
feeds an all-ones sketch for a full lower half, a zero vector for an
empty upper half, and recurses into the half that contains the 1/0
boundary.  The result is the linear image of the unary word under the
same fold a plain block sketch would compute, so text and pattern
projections difference correctly inside the engine.

Projection is implemented iteratively from the binary digits of
x div d, bottom up, which matches the recursion bit for bit while
avoiding deep call stacks for large universes.
"""

from __future__ import annotations

import math

import numpy as np

from .engine import ALIGNED_FALLBACK_BLOCKS, aligned_estimates
from .errors import ParameterError, UsageError
from .jl import (
    DEFAULT_DIM_CONSTANT,
    PairCompressor,
    SeedStream,
    SketchParams,
    derive_params,
    dimension_for,
    draw_compressor,
    levels_for_blocks,
)
from .oracle import exact_profile
from .profile import DistanceProfile, make_profile


class UnaryProjector:
    """Preprocessed state for projecting integers out of [0, u].

    ``maps`` holds one compressor per recursion level 1..L and
    ``ones_sketches[i]`` the image of the all-ones word of 2^i * d
    symbols, computed by s_i = phi'_i(s_{i-1}, s_{i-1}).  The universe
    is padded up to u_padded = d * 2^L so every level halves exactly.
    Full-level projections are memoized per integer value.
    """

    def __init__(self, d: int, u: int, maps: list[PairCompressor]):
        self.d = int(d)
        self.u = int(u)
        self.levels = len(maps)
        self.u_padded = self.d << self.levels
        self.maps = list(maps)
        self.ones_sketches = self.recompute_ones()
        self._cache: dict[int, np.ndarray] = {}

    def recompute_ones(self) -> list[np.ndarray]:
        """Run the ones recurrence s_i = phi'_i(s_{i-1}, s_{i-1})."""
        ones = [np.ones(self.d)]
        for comp in self.maps:
            col = np.ascontiguousarray(ones[-1][:, None])
            ones.append(comp.apply_cols(col, col)[:, 0])
        return ones

    def _digits(self, x: int, c: int) -> tuple[int, int]:
        # Branch bits are the binary digits of x div d, except that the
        # full word x == d * 2^c bottoms out at the all-ones base case.
        q, r = divmod(x, self.d)
        if q == 1 << c:
            q -= 1
            r = self.d
        return q, r

    def project(self, x: int, c: int | None = None) -> np.ndarray:
        """Image of the unary word for x under the first c levels."""
        c = self.levels if c is None else int(c)
        if not 0 <= c <= self.levels:
            raise UsageError(f"projector has levels 0..{self.levels}, asked for {c}")
        x = int(x)
        if not 0 <= x <= self.d << c:
            raise UsageError(f"value {x} outside [0, {self.d << c}] at level {c}")
        full = c == self.levels
        if full and x in self._cache:
            return self._cache[x]
        q, r = self._digits(x, c)
        cur = np.zeros((self.d, 1))
        cur[:r, 0] = 1.0
        for level in range(1, c + 1):
            comp = self.maps[level - 1]
            if (q >> (level - 1)) & 1:
                ones = np.ascontiguousarray(self.ones_sketches[level - 1][:, None])
                cur = comp.apply_cols(ones, cur)
            else:
                cur = comp.apply_cols(cur, None)
        out = cur[:, 0]
        out.flags.writeable = False
        if full:
            self._cache[x] = out
        return out

    def project_many(self, values: np.ndarray) -> np.ndarray:
        """Full-level projections for an array of values, one row each.

        Distinct values are evaluated in one batched pass per level and
        memoized; results are bit-identical to scalar ``project`` calls.
        """
        values = np.asarray(values, dtype=np.int64)
        if values.size == 0:
            return np.zeros((0, self.d))
        if values.min() < 0 or values.max() > self.u_padded:
            raise UsageError(f"values outside [0, {self.u_padded}]")
        uniq, inv = np.unique(values, return_inverse=True)
        missing = np.array(
            [v for v in uniq if int(v) not in self._cache], dtype=np.int64
        )
        if missing.size:
            cols = self._project_batch(missing)
            for j, v in enumerate(missing):
                row = np.ascontiguousarray(cols[:, j])
                row.flags.writeable = False
                self._cache[int(v)] = row
        table = np.stack([self._cache[int(v)] for v in uniq])
        return table[inv]

    def _project_batch(self, vals: np.ndarray) -> np.ndarray:
        q = vals // self.d
        r = vals - q * self.d
        at_cap = q == (1 << self.levels)
        q = np.where(at_cap, q - 1, q)
        r = np.where(at_cap, self.d, r)
        cur = (np.arange(self.d)[:, None] < r[None, :]).astype(np.float64)
        for level in range(1, self.levels + 1):
            comp = self.maps[level - 1]
            hi = ((q >> (level - 1)) & 1).astype(bool)
            lo_idx = np.flatnonzero(~hi)
            hi_idx = np.flatnonzero(hi)
            nxt = np.empty_like(cur)
            if lo_idx.size:
                nxt[:, lo_idx] = comp.apply_cols(cur[:, lo_idx], None)
            if hi_idx.size:
                ones = np.broadcast_to(
                    self.ones_sketches[level - 1][:, None], (self.d, hi_idx.size)
                )
                nxt[:, hi_idx] = comp.apply_cols(ones, cur[:, hi_idx])
            cur = nxt
        return cur


def l1_preprocess(u: int, d: int, stream: SeedStream, sigma: int) -> UnaryProjector:
    """Draw the level maps and ones sketches for universe size u."""
    if u < 1 or d < 1:
        raise ParameterError(f"need u >= 1 and d >= 1, got u={u}, d={d}")
    if not 1 <= sigma <= d:
        raise ParameterError(f"need 1 <= sigma <= d, got sigma={sigma}, d={d}")
    levels = levels_for_blocks(-(-u // d))
    maps = [
        draw_compressor(stream.child(f"level/{i}"), d, sigma)
        for i in range(1, levels + 1)
    ]
    return UnaryProjector(d=d, u=u, maps=maps)


def project(proj: UnaryProjector, x: int, c: int | None = None) -> np.ndarray:
    """Module-level alias for UnaryProjector.project."""
    return proj.project(x, c)


def l1_params(
    n: int,
    m: int,
    epsilon: float,
    master_seed: int,
    u: int,
    overrides: dict | None = None,
) -> SketchParams:
    """Constants for an absolute-difference run over universe [0, u).

    The budget splits three ways: a third to the projector (eps_embed =
    epsilon / (3L) per level), a third to level accumulation in the
    engine (eps_sketch = epsilon / (3(k+1))), and a third of headroom.
    """
    if u < 1:
        raise ParameterError(f"universe size must be positive, got {u}")
    ov = dict(overrides or {})
    k = int(ov.get("k", levels_for_blocks(max(1, m))))
    ov.setdefault("k", k)
    ov.setdefault("eps_sketch", epsilon / (3.0 * (k + 1)))
    if "eps_embed" not in ov:
        d = int(ov["d"]) if "d" in ov else dimension_for(
            float(ov["eps_sketch"]), n, float(ov.get("c", DEFAULT_DIM_CONSTANT))
        )
        proj_levels = levels_for_blocks(-(-u // d))
        ov["eps_embed"] = epsilon / (3.0 * max(1, proj_levels))
    return derive_params(n, m, epsilon, master_seed, ov)


def l1_profile(T, P, params: SketchParams, u: int, *, threads: int = 1) -> DistanceProfile:
    """Approximate sums of absolute differences for every alignment."""
    t = np.asarray(T, dtype=np.int64).ravel()
    p = np.asarray(P, dtype=np.int64).ravel()
    if p.size < 1:
        raise UsageError("pattern is empty")
    if t.size < p.size:
        raise UsageError(f"text ({t.size}) shorter than pattern ({p.size})")
    if params.n != t.size or params.m != p.size:
        raise UsageError(
            f"params were derived for n={params.n}, m={params.m}; "
            f"inputs have n={t.size}, m={p.size}"
        )
    for name, arr in (("text", t), ("pattern", p)):
        if arr.min() < 0 or arr.max() >= u:
            raise UsageError(f"{name} values must lie in [0, {u})")
    if p.size <= ALIGNED_FALLBACK_BLOCKS:
        ex = exact_profile(t.astype(np.float64), p.astype(np.float64), "l1")
        return make_profile("l1", ex.values, params=params, exact=True)
    if params.eps_embed <= 0.0:
        raise ParameterError("params carry no embedding budget; derive them with l1_params")
    sigma_embed = max(1, int(math.ceil(params.eps_embed * params.d)))
    proj = l1_preprocess(u, params.d, SeedStream(params.master_seed, "unary"), sigma_embed)
    et = proj.project_many(t)
    ep = proj.project_many(p)
    values = aligned_estimates(et, ep, params, family_id="engine", threads=threads)
    return make_profile("l1", values, params=params, exact=False)

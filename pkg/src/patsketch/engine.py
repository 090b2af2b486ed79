"""Pyramid sketches over block sequences.

``single_sketch`` folds a power-of-two run of d-blocks pairwise, level
by level, keeping every intermediate vector.  ``all_sketch`` folds every
starting block at once: its level-i entry j summarizes the contiguous
slice of d * 2^i symbols starting at block j.  Both procedures share one
map family, so an all-mode entry equals the single fold of the same
slice, and the sketch of a difference equals the difference of the
sketches.  Distances for arbitrary block counts are assembled by walking
the binary decomposition of the length over the retained levels.

Level arrays are stored column-major: ``levels[i]`` has shape
(d, count_i) and column j is the entry starting at block j (at block
j * 2^i in single mode).  Folds slice the output of full matrix
products, which is bit-identical to compressing each pair on its own
because every output column depends only on its own input column.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UsageError
from .jl import PairCompressor, SeedStream, SketchParams, draw_compressor, levels_for_blocks

#: Aligned-mode pipelines fall back to the exact oracle at or below this
#: many pattern blocks; sketching such short patterns is pure overhead.
ALIGNED_FALLBACK_BLOCKS = 4


@dataclass(frozen=True)
class MapFamily:
    """Compressors phi_1..phi_k shared by one set of pyramids.

    Compressor i is drawn from the stream labeled
    ``family/<family_id>/level/<i>``, so families with equal seeds are
    bit-identical and distinct ids are independent.
    """

    params: SketchParams
    family_id: str
    compressors: tuple[PairCompressor, ...]

    @classmethod
    def create(cls, params: SketchParams, family_id: str, depth: int | None = None):
        depth = params.k if depth is None else int(depth)
        root = SeedStream(params.master_seed, f"family/{family_id}")
        comps = tuple(
            draw_compressor(root.child(f"level/{i}"), params.d, params.sigma)
            for i in range(1, depth + 1)
        )
        return cls(params=params, family_id=family_id, compressors=comps)

    @property
    def depth(self) -> int:
        return len(self.compressors)

    def compressor(self, level: int) -> PairCompressor:
        if not 1 <= level <= self.depth:
            raise UsageError(f"family has levels 1..{self.depth}, asked for {level}")
        return self.compressors[level - 1]

    @property
    def key(self) -> tuple:
        p = self.params
        return (p.master_seed, self.family_id, p.d, p.sigma)


@dataclass
class SketchPyramid:
    """All intermediate vectors of one sketching run.

    levels[i] has shape (d, count_i); column j is the level-i entry.  In
    mode "all" count_i is max(0, B - 2^i + 1) and entry j starts at
    block j; in mode "single" count_i is B / 2^i and entry j covers
    blocks [j * 2^i, (j+1) * 2^i).  ``origin`` records where block 0
    sits in the source sequence.
    """

    d: int
    mode: str
    origin: int
    family_key: tuple
    levels: list[np.ndarray]

    @property
    def base_blocks(self) -> int:
        return self.levels[0].shape[1]

    def level_count(self, level: int) -> int:
        return self.levels[level].shape[1]

    def entry(self, level: int, block_start: int) -> np.ndarray:
        """The level vector covering blocks [block_start, block_start + 2^level)."""
        if not 0 <= level < len(self.levels):
            raise UsageError(
                f"pyramid has levels 0..{len(self.levels) - 1}, asked for {level}"
            )
        if self.mode == "single":
            if block_start % (1 << level):
                raise UsageError(
                    f"single-mode entries at level {level} start at multiples of {1 << level}"
                )
            idx = block_start >> level
        else:
            idx = block_start
        arr = self.levels[level]
        if not 0 <= idx < arr.shape[1]:
            raise UsageError(
                f"no entry at level {level} for block {block_start} "
                f"(level has {arr.shape[1]} entries)"
            )
        return arr[:, idx]


def _as_block_cols(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise UsageError(f"expected a 1-D sequence, got shape {x.shape}")
    if x.size == 0 or x.size % d:
        raise UsageError(f"length {x.size} is not a positive multiple of d={d}")
    return np.ascontiguousarray(x.reshape(-1, d).T)


def _fold_level(comp: PairCompressor, prev: np.ndarray, left_sel, right_sel) -> np.ndarray:
    # Full products then column slices: column j of A @ X depends only on
    # column j of X, so this matches per-pair compression bit for bit
    # while keeping the sparse kernel on contiguous input.
    lf = comp.left_mat @ prev
    rf = comp.right_mat @ prev
    out = lf[:, left_sel] + rf[:, right_sel]
    out *= comp.scale
    return out


def single_sketch(x, family: MapFamily, origin: int = 0) -> SketchPyramid:
    """Fold a power-of-two block run pairwise; keep every level.

    Level 0 holds the consecutive d-blocks of x; level i entry j is
    phi_i(level_{i-1}[2j], level_{i-1}[2j+1]).  The induced map from x
    to the top vector is linear.  Callers pad with zeros beforehand;
    padding does not change any linear image.
    """
    blocks = _as_block_cols(x, family.params.d)
    b = blocks.shape[1]
    if b & (b - 1):
        raise UsageError(f"block count {b} is not a power of two")
    k = b.bit_length() - 1
    if k > family.depth:
        raise UsageError(f"{b} blocks need {k} levels, family has {family.depth}")
    levels = [blocks]
    cur = blocks
    for i in range(1, k + 1):
        cur = _fold_level(
            family.compressor(i), cur, slice(0, None, 2), slice(1, None, 2)
        )
        levels.append(cur)
    return SketchPyramid(
        d=family.params.d, mode="single", origin=origin, family_key=family.key, levels=levels
    )


def all_sketch(x, family: MapFamily, depth: int | None = None, origin: int = 0) -> SketchPyramid:
    """Fold every starting block at once; keep every level.

    Level i entry j is phi_i(level_{i-1}[j], level_{i-1}[j + 2^(i-1)]),
    the sketch of the d * 2^i slice starting at block j.  Level i has
    max(0, B - 2^i + 1) entries.
    """
    blocks = _as_block_cols(x, family.params.d)
    b = blocks.shape[1]
    depth = family.depth if depth is None else int(depth)
    if depth > family.depth:
        raise UsageError(f"asked for {depth} levels, family has {family.depth}")
    d = family.params.d
    levels = [blocks]
    for i in range(1, depth + 1):
        shift = 1 << (i - 1)
        cnt = b - (1 << i) + 1
        if cnt <= 0:
            levels.append(np.zeros((d, 0)))
            continue
        levels.append(
            _fold_level(
                family.compressor(i),
                levels[i - 1],
                slice(0, cnt),
                slice(shift, shift + cnt),
            )
        )
    return SketchPyramid(d=d, mode="all", origin=origin, family_key=family.key, levels=levels)


def decompose_blocks(block_count: int) -> list[int]:
    """Exponents of the binary expansion of block_count, descending.

    sum(2**level for level in result) == block_count.
    """
    if block_count < 1:
        raise UsageError(f"block count must be positive, got {block_count}")
    return [i for i in range(block_count.bit_length() - 1, -1, -1) if (block_count >> i) & 1]


def estimate_aligned_l2sq(
    text_pyr: SketchPyramid,
    pat_pyr: SketchPyramid,
    text_start_block: int,
    decomposition: list[int],
    pat_start_block: int = 0,
) -> float:
    """Estimate the squared distance between two block-aligned fragments.

    Walks the decomposition left to right, adding ||v_text - v_pat||^2
    of the matching level entries and advancing both cursors by 2^level
    blocks.  Both pyramids must come from the same map family; otherwise
    the differences are meaningless and the call is rejected.
    """
    if text_pyr.family_key != pat_pyr.family_key:
        raise UsageError(
            f"pyramids from different map families: "
            f"{text_pyr.family_key} vs {pat_pyr.family_key}"
        )
    total = 0.0
    tc, pc = int(text_start_block), int(pat_start_block)
    for level in decomposition:
        diff = text_pyr.entry(level, tc) - pat_pyr.entry(level, pc)
        total += float(np.dot(diff, diff))
        tc += 1 << level
        pc += 1 << level
    return total


def pad_to_blocks(x: np.ndarray, d: int, blocks: int) -> np.ndarray:
    """Zero-pad a 1-D float array out to exactly ``blocks`` d-blocks."""
    want = blocks * d
    if x.size > want:
        raise UsageError(f"sequence of {x.size} does not fit in {blocks} blocks of {d}")
    if x.size == want:
        return x
    out = np.zeros(want)
    out[: x.size] = x
    return out


def aligned_estimates(
    text_blocks: np.ndarray,
    pat_blocks: np.ndarray,
    params: SketchParams,
    family_id: str = "engine",
    threads: int = 1,
) -> np.ndarray:
    """Squared-distance estimates for every block alignment.

    Used by the pipelines whose embeddings put each source symbol in its
    own d-block, so alignment t compares text blocks [t, t + m_b)
    against the whole pattern and no exact edges are needed.  One
    all-mode text pyramid and one single-mode pattern pyramid suffice.
    Inputs are (count, d) matrices, one block per row.
    """
    if text_blocks.ndim != 2 or pat_blocks.ndim != 2 or text_blocks.shape[1] != pat_blocks.shape[1]:
        raise UsageError("text and pattern block matrices must share their width")
    n_b, m_b = text_blocks.shape[0], pat_blocks.shape[0]
    if not 1 <= m_b <= n_b:
        raise UsageError(f"need 1 <= pattern blocks <= text blocks, got {m_b}, {n_b}")
    depth = levels_for_blocks(m_b)
    if params.k < depth:
        raise ParameterError(
            f"params provide k={params.k} levels but the pattern needs {depth}"
        )
    family = MapFamily.create(params, family_id, depth=depth)
    pat_seq = pad_to_blocks(pat_blocks.reshape(-1), params.d, 1 << depth)
    pat_pyr = single_sketch(pat_seq, family)
    text_pyr = all_sketch(text_blocks.reshape(-1), family, depth=depth)
    decomp = decompose_blocks(m_b)
    n_align = n_b - m_b + 1

    def fill(lo: int, hi: int) -> np.ndarray:
        acc = np.zeros(hi - lo)
        pb = 0
        for level in decomp:
            seg = text_pyr.levels[level][:, pb + lo : pb + hi] - pat_pyr.entry(level, pb)[:, None]
            acc += np.einsum("ij,ij->j", seg, seg)
            pb += 1 << level
        return acc

    values = np.zeros(n_align)
    ranges = chunk_ranges(n_align, threads)
    for (lo, hi), acc in zip(ranges, map_indexed(lambda r: fill(*r), ranges, threads)):
        values[lo:hi] = acc
    return values


def chunk_ranges(n: int, parts: int) -> list[tuple[int, int]]:
    """Split [0, n) into at most ``parts`` contiguous ranges."""
    parts = max(1, min(parts, n)) if n else 1
    bounds = np.linspace(0, n, parts + 1, dtype=np.int64)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(parts) if bounds[i] < bounds[i + 1]]


def map_indexed(fn, items, threads: int) -> list:
    """Apply fn to items, optionally on a thread pool; ordered results.

    Work is assigned by index and collected by index, so the output is
    identical for any thread count.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, it) for it in items]
        return [f.result() for f in futures]

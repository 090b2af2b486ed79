"""Approximate squared-distance profiles for numeric sequences.

Each alignment t is split at h-grid boundaries into three spans: an
exact head of fewer than h symbols reaching the next multiple of h, a
sketched core of m' symbols (m - 2h rounded down to a multiple of d),
and an exact tail holding the rest.  Cores always start at multiples of
h, so d/h shifted all-mode text pyramids cover every alignment, while
the h+1 pattern offsets get single-mode pyramids of their own.  Core
estimates difference retained pyramid levels along the binary
decomposition of the core's block count, and the head and tail are
summed directly.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .engine import (
    MapFamily,
    SketchPyramid,
    _fold_level,
    all_sketch,
    decompose_blocks,
    map_indexed,
    pad_to_blocks,
)
from .errors import ParameterError, UsageError
from .jl import SketchParams, levels_for_blocks
from .oracle import exact_profile
from .profile import DistanceProfile, as_numeric, make_profile


def fallback_threshold(params: SketchParams) -> int:
    """Patterns at or below this length take the exact path."""
    return 4 * params.d + 2 * params.h


def l2_profile(
    T,
    P,
    params: SketchParams,
    *,
    squared: bool = False,
    threads: int = 1,
) -> DistanceProfile:
    """Profile of (squared) distances for every alignment of P in T.

    Returns square roots (metric "l2") by default; ``squared=True``
    returns the additive squared values (metric "l2sq") that the engine
    actually estimates.  Alignments where the pattern matches the text
    exactly yield exactly 0.  Patterns at or below the fallback
    threshold are answered by the exact oracle and flagged as such.
    """
    t = as_numeric(T)
    p = as_numeric(P)
    _check_instance(t, p, params)
    metric = "l2sq" if squared else "l2"
    if p.size <= fallback_threshold(params):
        ex = exact_profile(t, p, metric)
        return make_profile(metric, ex.values, params=params, exact=True)
    values = _engaged_values(t, p, params, threads)
    if not squared:
        np.sqrt(values, out=values)
    return make_profile(metric, values, params=params, exact=False)


def _check_instance(t: np.ndarray, p: np.ndarray, params: SketchParams) -> None:
    if p.size < 1:
        raise UsageError("pattern is empty")
    if t.size < p.size:
        raise UsageError(f"text ({t.size}) shorter than pattern ({p.size})")
    if params.n != t.size or params.m != p.size:
        raise UsageError(
            f"params were derived for n={params.n}, m={params.m}; "
            f"inputs have n={t.size}, m={p.size}"
        )


def _engaged_values(t: np.ndarray, p: np.ndarray, params: SketchParams, threads: int) -> np.ndarray:
    n, m, d, h = t.size, p.size, params.d, params.h
    core = ((m - 2 * h) // d) * d
    blocks = core // d
    depth = levels_for_blocks(blocks)
    if params.k < depth:
        raise ParameterError(f"params provide k={params.k} levels but the core needs {depth}")
    family = MapFamily.create(params, "engine", depth=depth)
    decomp = decompose_blocks(blocks)

    pat_pyrs = _offset_pyramids(p, core, h, family)

    runs = d // h

    def build_run(r: int) -> SketchPyramid:
        seg = t[r * h :]
        padded = pad_to_blocks(seg, d, -(-seg.size // d))
        return all_sketch(padded, family, depth=depth, origin=r * h)

    text_pyrs = map_indexed(build_run, range(runs), threads)

    n_align = n - m + 1

    def fill_class(c: int):
        # Alignments congruent to c mod d share their head length o, run
        # index r, and tail length; their core blocks advance by one per
        # step of d, so each span is one strided slice or gather.
        ts = np.arange(c, n_align, d)
        if not ts.size:
            return ts, np.zeros(0)
        o = (-c) % h
        r = ((c + o) % d) // h
        base = (c + o - r * h) // d
        acc = np.zeros(ts.size)
        if o:
            win = sliding_window_view(t, o)[ts]
            acc += ((win - p[:o]) ** 2).sum(axis=1)
        tail = m - o - core
        if tail:
            win = sliding_window_view(t, tail)[ts + o + core]
            acc += ((win - p[o + core :]) ** 2).sum(axis=1)
        text_levels = text_pyrs[r].levels
        pat_pyr = pat_pyrs[o]
        blk = base + (ts - c) // d
        pb = 0
        for level in decomp:
            tv = text_levels[level][:, blk + pb]
            diff = tv - pat_pyr.entry(level, pb)[:, None]
            acc += np.einsum("ij,ij->j", diff, diff)
            pb += 1 << level
        return ts, acc

    values = np.zeros(n_align)
    for ts, acc in map_indexed(fill_class, range(min(d, n_align)), threads):
        values[ts] = acc
    return values


def _offset_pyramids(p: np.ndarray, core: int, h: int, family: MapFamily) -> list[SketchPyramid]:
    """Single-mode pyramids for the h+1 core substrings of the pattern.

    All offsets share block count and maps, so the folds run stacked:
    one application per level covers every offset, and the columns for
    each offset are exactly what a standalone single fold yields.
    """
    d = family.params.d
    blocks = core // d
    pad = 1 << levels_for_blocks(blocks)
    stack = np.zeros((d, (h + 1) * pad))
    for o in range(h + 1):
        stack[:, o * pad : o * pad + blocks] = p[o : o + core].reshape(blocks, d).T
    levels = [stack]
    for i in range(1, pad.bit_length()):
        levels.append(
            _fold_level(
                family.compressor(i), levels[i - 1], slice(0, None, 2), slice(1, None, 2)
            )
        )
    out = []
    for o in range(h + 1):
        per = [lvl[:, o * (pad >> i) : (o + 1) * (pad >> i)] for i, lvl in enumerate(levels)]
        out.append(
            SketchPyramid(d=d, mode="single", origin=o, family_key=family.key, levels=per)
        )
    return out

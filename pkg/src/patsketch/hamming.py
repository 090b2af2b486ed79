"""Mismatch-count profiles through a random binary alphabet embedding.

Each token maps to d uniform random bits, so two distinct tokens land at
squared distance about d/2 and a mismatch count H becomes a squared
distance of about H * d/2 between the embedded words.  Every original
alignment starts on a block boundary of the embedding, so one all-mode
text pyramid and one pattern pyramid answer the whole profile with no
exact edges; the estimate is rescaled by 2/d at the end.
"""

from __future__ import annotations

import numpy as np

from .engine import ALIGNED_FALLBACK_BLOCKS, aligned_estimates
from .errors import UsageError
from .jl import SeedStream, SketchParams, derive_params, levels_for_blocks
from .oracle import exact_profile
from .profile import DistanceProfile, as_tokens, make_profile


class CharEmbedder:
    """Lazy token -> bit-vector map, keyed by (seed, token).

    Bit vectors are realized on first use and cached, so unbounded
    alphabets cost only the distinct tokens actually seen.
    """

    def __init__(self, d: int, seed: int):
        self.d = int(d)
        self.seed = int(seed)
        self._cache: dict[int, np.ndarray] = {}

    def bits(self, token) -> np.ndarray:
        tok = int(token)
        vec = self._cache.get(tok)
        if vec is None:
            g = SeedStream(self.seed, f"char/{tok}").generator()
            vec = g.integers(0, 2, size=self.d).astype(np.float64)
            vec.flags.writeable = False
            self._cache[tok] = vec
        return vec

    def embed_matrix(self, tokens: np.ndarray) -> np.ndarray:
        """One row of bits per token; realizes the cache in token order."""
        if tokens.size == 0:
            return np.zeros((0, self.d))
        uniq, inv = np.unique(tokens, return_inverse=True)
        table = np.stack([self.bits(tok) for tok in uniq])
        return table[inv]


def embed_word(embedder: CharEmbedder, word) -> np.ndarray:
    """Concatenated bit blocks of a token sequence, length L * d."""
    tokens = as_tokens(word)
    return embedder.embed_matrix(tokens).reshape(-1)


def hamming_params(
    n: int,
    m: int,
    epsilon: float,
    master_seed: int,
    overrides: dict | None = None,
) -> SketchParams:
    """Constants for a mismatch-count run.

    The embedded pattern spans m blocks, so the pyramid needs
    ceil(log2(m)) levels; half of epsilon pays for the embedding
    distortion and the per-level sketch budget spends the other half.
    """
    ov = dict(overrides or {})
    ov.setdefault("k", levels_for_blocks(max(1, m)))
    ov.setdefault("eps_embed", epsilon / 2.0)
    return derive_params(n, m, epsilon, master_seed, ov)


def hamming_profile(T, P, params: SketchParams, *, threads: int = 1) -> DistanceProfile:
    """Approximate mismatch counts for every alignment of P in T."""
    t = as_tokens(T)
    p = as_tokens(P)
    if p.size < 1:
        raise UsageError("pattern is empty")
    if t.size < p.size:
        raise UsageError(f"text ({t.size}) shorter than pattern ({p.size})")
    if params.n != t.size or params.m != p.size:
        raise UsageError(
            f"params were derived for n={params.n}, m={params.m}; "
            f"inputs have n={t.size}, m={p.size}"
        )
    if p.size <= ALIGNED_FALLBACK_BLOCKS:
        ex = exact_profile(t, p, "hamming")
        return make_profile("hamming", ex.values, params=params, exact=True)
    emb = CharEmbedder(params.d, params.master_seed)
    et = emb.embed_matrix(t)
    ep = emb.embed_matrix(p)
    values = aligned_estimates(et, ep, params, family_id="engine", threads=threads)
    values *= 2.0 / params.d
    return make_profile("hamming", values, params=params, exact=False)

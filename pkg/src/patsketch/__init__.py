"""Approximate text-to-pattern distance profiles without convolution.

For every alignment of a pattern of length m against a text of length
n, the package computes a (1 +- eps) estimate of the squared-l2, l1, or
Hamming distance.  The engine folds block sequences through seeded
column-sparse sign compressors, retaining every intermediate level so a
fragment of any length can be answered from its binary decomposition.
Token and integer metrics reduce to the squared-l2 engine through
randomized embeddings.  A brute-force oracle and error reporting are
included for verification, and a CLI covers generation, profiling,
verification, and benchmarking.
"""

from .engine import (
    ALIGNED_FALLBACK_BLOCKS,
    MapFamily,
    SketchPyramid,
    aligned_estimates,
    all_sketch,
    decompose_blocks,
    estimate_aligned_l2sq,
    single_sketch,
)
from .errors import ParameterError, UsageError
from .hamming import CharEmbedder, embed_word, hamming_params, hamming_profile
from .jl import (
    DEFAULT_DIM_CONSTANT,
    PairCompressor,
    SeedStream,
    SketchParams,
    compress_pair,
    core_blocks,
    derive_params,
    dimension_for,
    draw_compressor,
    levels_for_blocks,
    sparsity_for,
)
from .l1 import UnaryProjector, l1_params, l1_preprocess, l1_profile, project
from .l2 import fallback_threshold, l2_profile
from .oracle import ErrorReport, error_report, exact_profile
from .profile import METRICS, DistanceProfile, as_numeric, as_tokens, make_profile

__version__ = "0.1.0"

__all__ = [
    "ALIGNED_FALLBACK_BLOCKS",
    "CharEmbedder",
    "DEFAULT_DIM_CONSTANT",
    "DistanceProfile",
    "ErrorReport",
    "MapFamily",
    "METRICS",
    "PairCompressor",
    "ParameterError",
    "SeedStream",
    "SketchParams",
    "SketchPyramid",
    "UnaryProjector",
    "UsageError",
    "aligned_estimates",
    "all_sketch",
    "as_numeric",
    "as_tokens",
    "compress_pair",
    "core_blocks",
    "decompose_blocks",
    "derive_params",
    "dimension_for",
    "draw_compressor",
    "embed_word",
    "error_report",
    "estimate_aligned_l2sq",
    "exact_profile",
    "fallback_threshold",
    "hamming_params",
    "hamming_profile",
    "l1_params",
    "l1_preprocess",
    "l1_profile",
    "l2_profile",
    "levels_for_blocks",
    "make_profile",
    "project",
    "single_sketch",
    "sparsity_for",
]

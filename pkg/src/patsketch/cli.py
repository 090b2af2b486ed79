"""Batch command-line interface.

Subcommands: ``gen`` writes synthetic inputs, ``dist`` computes a
profile CSV, ``verify`` scores the estimator against the oracle over
seeded instances, and ``bench`` times the approximate pipeline against
the exact one.  All positions in outputs are 0-based.  Exit codes:
0 ok, 1 internal failure, 2 usage or input error.  The environment
variable PATSKETCH_LOG controls log verbosity only; all semantics flow
through flags.
"""

from __future__ import annotations

import argparse
import logging
import os
import statistics
import sys
import time

import numpy as np

from .errors import ParameterError, UsageError
from .hamming import hamming_params, hamming_profile
from .jl import SeedStream, derive_params
from .l1 import l1_params, l1_profile
from .l2 import l2_profile
from .oracle import error_report, exact_profile
from .profile import METRICS, DistanceProfile

log = logging.getLogger("patsketch")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="patsketch",
        description="approximate text-to-pattern distance profiles (0-based positions)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded synthetic input file")
    g.add_argument("--n", type=int, required=True, help="sequence length")
    g.add_argument("--mode", choices=("ints", "bytes"), default="ints")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--universe", type=int, default=100, help="ints mode: values in [0, U)")
    g.add_argument("--alphabet", type=int, default=256, help="bytes mode: tokens in [0, K), K <= 256")

    d = sub.add_parser("dist", help="compute a distance profile CSV")
    d.add_argument("--metric", choices=METRICS, required=True)
    d.add_argument("--text", required=True)
    d.add_argument("--pattern", required=True)
    d.add_argument("--epsilon", type=float, default=0.25)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--mode", choices=("ints", "bytes"), default="ints")
    d.add_argument("--u", type=int, default=None, help="l1 universe size; inferred when omitted")
    _add_overrides(d)
    d.add_argument("--out", required=True)
    d.add_argument("--emit-exact", action="store_true", help="add exact and rel_error columns")

    v = sub.add_parser("verify", help="score the estimator against the oracle")
    v.add_argument("--metric", choices=METRICS, required=True)
    v.add_argument("--epsilon", type=float, default=0.25)
    v.add_argument("--seeds", type=int, default=5)
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--m", type=int, required=True)
    v.add_argument("--u", type=int, default=65536, help="l1 universe size")
    v.add_argument("--alphabet", type=int, default=4, help="hamming alphabet size")
    _add_overrides(v)

    b = sub.add_parser("bench", help="time approximate vs exact profiles")
    b.add_argument("--metric", choices=METRICS, default="l2")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--epsilon", type=float, default=0.25)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--u", type=int, default=65536)
    b.add_argument("--alphabet", type=int, default=4)
    _add_overrides(b)
    b.add_argument("--out", required=True)
    return p


def _add_overrides(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--d", type=int, default=None, help="override sketch dimension")
    sp.add_argument("--h", type=int, default=None, help="override edge granularity (must divide d)")
    sp.add_argument("--c", type=float, default=None, help="override the dimension constant C")


def _overrides(args) -> dict:
    out = {}
    for key in ("d", "h", "c"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def _read_input(path: str, mode: str) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if mode == "bytes":
        arr = np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    else:
        toks = data.decode("utf-8").split()
        arr = np.array([int(t) for t in toks], dtype=np.int64)
    if arr.size == 0:
        raise UsageError(f"{path}: empty input")
    return arr


def _atomic_write(path: str, payload: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _compute(metric: str, T: np.ndarray, P: np.ndarray, epsilon: float, seed: int,
             overrides: dict, u: int | None) -> DistanceProfile:
    n, m = T.size, P.size
    if not 1 <= m <= n:
        raise UsageError(f"need 1 <= m <= n, got m={m}, n={n}")
    if metric in ("l2", "l2sq"):
        params = derive_params(n, m, epsilon, seed, overrides)
        return l2_profile(T, P, params, squared=(metric == "l2sq"))
    if metric == "hamming":
        params = hamming_params(n, m, epsilon, seed, overrides)
        return hamming_profile(T, P, params)
    params = l1_params(n, m, epsilon, seed, u, overrides)
    return l1_profile(T, P, params, u)


def run_gen(args) -> None:
    if args.n < 1:
        raise UsageError(f"--n must be positive, got {args.n}")
    g = SeedStream(args.seed, f"gen/{args.mode}").generator()
    if args.mode == "ints":
        if args.universe < 1:
            raise UsageError(f"--universe must be positive, got {args.universe}")
        vals = g.integers(0, args.universe, size=args.n)
        payload = ("\n".join(str(int(v)) for v in vals) + "\n").encode()
    else:
        if not 1 <= args.alphabet <= 256:
            raise UsageError(f"--alphabet must lie in [1, 256], got {args.alphabet}")
        payload = bytes(g.integers(0, args.alphabet, size=args.n).astype(np.uint8))
    _atomic_write(args.out, payload)
    log.info("wrote %d %s tokens to %s", args.n, args.mode, args.out)


def run_dist(args) -> None:
    T = _read_input(args.text, args.mode)
    P = _read_input(args.pattern, args.mode)
    u = args.u
    if args.metric == "l1":
        if u is None:
            u = int(max(T.max(), P.max())) + 1
            log.info("universe inferred from inputs: u=%d", u)
    elif u is not None:
        raise UsageError("--u applies to the l1 metric only")
    prof = _compute(args.metric, T, P, args.epsilon, args.seed, _overrides(args), u)
    exact = exact_profile(T, P, args.metric) if args.emit_exact else None
    lines = []
    if exact is None:
        lines.append("position,estimate")
        for pos, v in zip(prof.positions, prof.values):
            lines.append(f"{pos},{v:.17g}")
    else:
        lines.append("position,estimate,exact,rel_error")
        for pos, v, e in zip(prof.positions, prof.values, exact.values):
            rel = (0.0 if v == e else float("inf")) if e == 0.0 else abs(v - e) / e
            lines.append(f"{pos},{v:.17g},{e:.17g},{rel:.17g}")
    _atomic_write(args.out, ("\n".join(lines) + "\n").encode())


def _synthetic_instance(metric: str, n: int, m: int, seed: int, alphabet: int, u: int):
    g = SeedStream(seed, f"verify/{metric}").generator()
    if metric in ("l2", "l2sq"):
        hi = 101
    elif metric == "hamming":
        hi = alphabet
    else:
        hi = u
    return g.integers(0, hi, size=n), g.integers(0, hi, size=m)


def run_verify(args) -> None:
    if args.seeds < 1:
        raise UsageError(f"--seeds must be positive, got {args.seeds}")
    fractions = []
    for seed in range(args.seeds):
        T, P = _synthetic_instance(args.metric, args.n, args.m, seed, args.alphabet, args.u)
        u = args.u if args.metric == "l1" else None
        prof = _compute(args.metric, T, P, args.epsilon, seed, _overrides(args), u)
        exact = exact_profile(T, P, args.metric)
        rep = error_report(prof, exact, args.epsilon)
        fractions.append(rep.fraction_within)
        print(
            f"seed={seed} metric={args.metric} n={args.n} m={args.m} "
            f"fraction_within={rep.fraction_within:.4f} "
            f"median_rel_error={rep.median_rel_error:.4g} "
            f"max_rel_error={rep.max_rel_error:.4g} "
            f"exact_fallback={rep.n_excluded_exact} infinite={rep.n_infinite}"
        )
    print(f"total seeds={args.seeds} fraction_within={statistics.mean(fractions):.4f}")


def run_bench(args) -> None:
    if args.reps < 3:
        raise UsageError(f"--reps must be at least 3, got {args.reps}")
    T, P = _synthetic_instance(args.metric, args.n, args.m, args.seed, args.alphabet, args.u)
    u = args.u if args.metric == "l1" else None
    approx_ms, exact_ms = [], []
    baseline = None
    for _ in range(args.reps):
        t0 = time.perf_counter()
        prof = _compute(args.metric, T, P, args.epsilon, args.seed, _overrides(args), u)
        approx_ms.append((time.perf_counter() - t0) * 1e3)
        if baseline is None:
            baseline = prof.values
        elif not np.array_equal(baseline, prof.values):
            raise RuntimeError("profile changed between identically seeded repetitions")
        t0 = time.perf_counter()
        exact_profile(T, P, args.metric)
        exact_ms.append((time.perf_counter() - t0) * 1e3)
    rows = [
        "method,n,m,epsilon,millis",
        f"approx,{args.n},{args.m},{args.epsilon},{statistics.median(approx_ms):.3f}",
        f"exact,{args.n},{args.m},{args.epsilon},{statistics.median(exact_ms):.3f}",
    ]
    _atomic_write(args.out, ("\n".join(rows) + "\n").encode())
    for row in rows[1:]:
        print(row)


_COMMANDS = {"gen": run_gen, "dist": run_dist, "verify": run_verify, "bench": run_bench}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("PATSKETCH_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        _COMMANDS[args.command](args)
    except (UsageError, ParameterError, OSError, UnicodeDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # invariant breaches and the unforeseen
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()

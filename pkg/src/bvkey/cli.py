"""Command-line experiment harness.

Exit codes: 0 success, 1 some trial ended ambiguous, 2 bad configuration,
3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import harness
from .boolfn import CapError, load_truth_table, walsh_spectrum
from .cipher import derived_f, derived_g, toy_em
from .gf2 import EnumerationCapError, solve_affine_system
from .harness import ConfigError, ExperimentConfig

EXIT_OK, EXIT_AMBIGUOUS, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit), overrides config")
    common.add_argument("--trials", type=int, help="number of trials, overrides config")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--timing", action="store_true", help="include wall times (breaks byte-identity)")

    p = argparse.ArgumentParser(prog="bvkey", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", parents=[common], help="spectrum/structure report of a function")
    an.add_argument("--table", type=Path, help="truth-table JSON file")
    an.add_argument("--key", type=lambda v: int(v, 0), help="secret s for the derived function")
    an.add_argument("--plaintext", type=lambda v: int(v, 0), help="plaintext m for the derived function")
    an.add_argument("--derived", choices=("f", "g"), default="f")
    an.add_argument("--sigma", action="append", help="closeness threshold, e.g. 1/16 (repeatable)")
    for name in ("find-struct", "recover-key", "recover-key-g", "sweep"):
        sub.add_parser(name, parents=[common])
    sub.add_parser("bench", parents=[common], help="time the core kernels")
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _load(args, mode: str | None) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config is required for this command")
    cfg = harness.load_config(args.config)
    if mode is not None:
        cfg.mode = mode
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None:
        cfg.trials = args.trials
    cfg.validate()
    return cfg


def _cmd_analyze(args) -> int:
    sigmas = args.sigma or ["1/4", "1/16"]
    if args.table is not None:
        F = load_truth_table(args.table)
    else:
        cfg = _load(args, "analyze")
        E = cfg.build_cipher()
        s = args.key if args.key is not None else cfg.secret
        m = args.plaintext if args.plaintext is not None else cfg.plaintext
        if s is None or m is None:
            raise ConfigError("analyze needs a key and a plaintext (flags or config)")
        F = derived_f(E, s, m) if args.derived == "f" else derived_g(E, s, m)
        sigmas = args.sigma or cfg.sigmas
    _emit(harness.dumps(harness.analyze_function(F, sigmas)), args.out)
    return EXIT_OK


def _cmd_batch(args, mode: str) -> int:
    cfg = _load(args, mode)
    reports = harness.run_batch(cfg, threads=args.threads, timing=args.timing)
    if args.format == "csv":
        _emit(harness.trials_csv(reports), args.out)
    else:
        _emit(harness.dumps(harness.batch_document(cfg, reports)), args.out)
    return harness.exit_code(reports)


def _cmd_sweep(args) -> int:
    cfg = _load(args, None)
    rows = harness.run_sweep(cfg, threads=args.threads)
    if args.format == "json":
        _emit(harness.dumps({"schema_version": harness.SCHEMA_VERSION, "kind": "sweep", "rows": rows}), args.out)
    else:
        _emit(harness.sweep_csv(rows), args.out)
    return EXIT_OK


def _timeit(fn, repeat=3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cmd_bench(args) -> int:
    from .attack import AttackConfig, recover_key
    from .boolfn import BooleanFunction
    from .qoracle import RelatedKeyOracle, RngStream

    gen = np.random.default_rng(args.seed or 0)
    out = {}
    for k in (12, 16, 20):
        f = BooleanFunction(k, gen.integers(0, 2, 1 << k, dtype=np.uint8))
        out[f"walsh_k{k}_s"] = _timeit(lambda: walsh_spectrum(f))
    eqs = [(int(w), int(r)) for w, r in zip(gen.integers(0, 1 << 20, 400), gen.integers(0, 2, 400))]
    out["solve_k20_p400_s"] = _timeit(lambda: solve_affine_system(eqs, 20))
    E = toy_em(12, seed=1)
    out["recover_key_em12_p48_s"] = _timeit(
        lambda: recover_key(RelatedKeyOracle(E, 0x5A5), 0, AttackConfig(p=48), RngStream(1)), repeat=1)
    _emit(json.dumps({"schema_version": harness.SCHEMA_VERSION, "kind": "bench", "timings": out},
                     indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command in ("find-struct", "recover-key", "recover-key-g"):
            return _cmd_batch(args, args.command)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_bench(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnumerationCapError, CapError) as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

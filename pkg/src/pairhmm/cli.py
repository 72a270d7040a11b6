"""Command-line interface: align, verify, bench, and gen subcommands.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""
from __future__ import annotations

import argparse
import os
import sys

from .batchio import parse_batch_file, write_batch_file, write_scores
from .datagen import generate_synthetic, generate_verification_pairs
from .errors import DataError, NumericError, PairHmmError
from .model import EngineConfig, default_configs, enumerate_work_items
from .partition import select_config
from .pipeline import run
from .reference import forward_reference_linear_space
from .wavefront import forward_wavefront

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(EXIT_USAGE)


def _default_threads():
    env = os.environ.get("PAIRHMM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _parse_length_spec(text):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return (int(lo), int(hi))
    return int(text)


def _parse_configs(text, precision, scale_log2):
    configs = []
    for part in text.split(","):
        try:
            p, k = part.split(":")
            configs.append(EngineConfig(int(p), int(k), precision, scale_log2))
        except (ValueError, PairHmmError) as exc:
            raise DataError("bad config %r: %s" % (part, exc)) from None
    return configs


def _engine_args(sub, threads=True):
    sub.add_argument("--precision", choices=("f32", "f64"), default="f32")
    sub.add_argument("--scale-log2", type=int, default=None,
                     help="boundary scale exponent (default 120 for f32, 0 for f64)")
    if threads:
        sub.add_argument("--threads", type=int, default=_default_threads(),
                         help="worker threads (default $PAIRHMM_THREADS or 1)")
    sub.add_argument("--configs", default=None, metavar="P:K,...",
                     help="restrict to the given lane configurations")
    sub.add_argument("--chunk-mb", type=int, default=512,
                     help="chunk memory budget in MiB")


def _resolve_configs(args):
    if args.configs:
        return _parse_configs(args.configs, args.precision, args.scale_log2)
    return default_configs(args.precision, args.scale_log2)


def _cmd_align(args):
    batches = parse_batch_file(args.input)
    scores, report = run(batches, _resolve_configs(args),
                         budget_bytes=args.chunk_mb * 1024 * 1024,
                         workers=args.threads)
    write_scores(args.output, batches, scores, report.errors, report)
    print("items=%d errors=%d cells=%d seconds=%.3f gcups=%.3f"
          % (scores.shape[0], len(report.errors), report.total_cells,
             report.wall_seconds, report.gcups))
    if scores.shape[0] and len(report.errors) == scores.shape[0]:
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_verify(args):
    if args.input:
        batches = parse_batch_file(args.input)
    else:
        batches = generate_verification_pairs(args.pairs, args.seed,
                                              max_read_len=args.max_len,
                                              max_hap_len=args.max_len)
    cfgs = _resolve_configs(args)
    items = enumerate_work_items(batches)
    worst = 0.0
    failures = 0
    for item in items:
        batch = batches[item.batch_index]
        read = batch.reads[item.read_index]
        hap = batch.haps[item.hap_index]
        expected = forward_reference_linear_space(read, hap).log10_likelihood
        try:
            cfg = select_config(read.length, cfgs)
            got = forward_wavefront(read, hap, cfg).log10_likelihood
        except PairHmmError as exc:
            print("item %d failed: %s" % (item.global_id, exc), file=sys.stderr)
            failures += 1
            continue
        worst = max(worst, abs(got - expected))
    print("pairs=%d max_dlog10=%.3e tol=%.1e failures=%d"
          % (len(items), worst, args.tol, failures))
    return EXIT_OK if worst <= args.tol and failures == 0 else EXIT_NUMERIC


def _cmd_bench(args):
    if args.input:
        batches = parse_batch_file(args.input)
    else:
        mode = "independent" if args.independent else "derived"
        batches = generate_synthetic(args.batches, args.reads, args.haps,
                                     args.fixed_len, args.fixed_len,
                                     args.seed, mode=mode)
    scores, report = run(batches, _resolve_configs(args),
                         budget_bytes=args.chunk_mb * 1024 * 1024,
                         workers=args.threads)
    print("cells=%d seconds=%.6f gcups=%.6f errors=%d"
          % (report.total_cells, report.wall_seconds, report.gcups,
             len(report.errors)))
    return EXIT_OK


def _cmd_gen(args):
    batches = generate_synthetic(args.batches, args.reads, args.haps,
                                 _parse_length_spec(args.read_len),
                                 _parse_length_spec(args.hap_len),
                                 args.seed, mode=args.mode)
    write_batch_file(args.output, batches)
    total = sum(b.num_items for b in batches)
    print("wrote %d batches, %d work items to %s"
          % (len(batches), total, args.output))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="pairhmm",
                     description="Pair-HMM forward likelihood engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", parents=[], help="score a batch file")
    p_align.add_argument("--input", required=True)
    p_align.add_argument("--output", required=True)
    _engine_args(p_align)
    p_align.set_defaults(fn=_cmd_align)

    p_verify = sub.add_parser("verify",
                              help="compare the tiled engine against the oracle")
    p_verify.add_argument("--input", default=None)
    p_verify.add_argument("--pairs", type=int, default=1000)
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--max-len", type=int, default=1024)
    p_verify.add_argument("--tol", type=float, default=1e-3)
    _engine_args(p_verify, threads=False)
    p_verify.set_defaults(fn=_cmd_verify)

    p_bench = sub.add_parser("bench", help="measure pipeline throughput")
    p_bench.add_argument("--input", default=None)
    p_bench.add_argument("--fixed-len", type=int, default=256)
    p_bench.add_argument("--batches", type=int, default=4)
    p_bench.add_argument("--reads", type=int, default=64)
    p_bench.add_argument("--haps", type=int, default=8)
    p_bench.add_argument("--seed", type=int, default=42)
    p_bench.add_argument("--independent", action="store_true",
                         help="draw reads independently of haplotypes")
    _engine_args(p_bench)
    p_bench.set_defaults(fn=_cmd_bench)

    p_gen = sub.add_parser("gen", help="write a synthetic batch file")
    p_gen.add_argument("--output", required=True)
    p_gen.add_argument("--batches", type=int, default=1)
    p_gen.add_argument("--reads", type=int, default=8)
    p_gen.add_argument("--haps", type=int, default=2)
    p_gen.add_argument("--read-len", default="10:151")
    p_gen.add_argument("--hap-len", default="160:320")
    p_gen.add_argument("--seed", type=int, default=42)
    p_gen.add_argument("--mode", choices=("independent", "derived"),
                       default="derived",
                       help="derived reads resemble a batch haplotype and "
                            "stay scorable at any length")
    p_gen.set_defaults(fn=_cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except NumericError as exc:
        print("numeric error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC
    except (PairHmmError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

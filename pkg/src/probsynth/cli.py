"""Command-line pipeline for the corpus heuristics toolkit.

Subcommands: gen, cluster, probs, thresholds, measure, validate, synth.
Every command validates its inputs up front, writes outputs atomically
(temp file then rename), and emits deterministic bytes for fixed seeds.
Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterable

from .corpus import (
    Corpus,
    CorpusFormatError,
    generate_zipf_corpus,
    load_corpus,
    parse_size_spec,
    save_corpus,
)
from .probability import (
    ProbabilityTable,
    ThresholdTable,
    derive_thresholds,
    global_instruction_probs,
    probability_range,
    solution_probability,
    subset_instruction_probs,
    write_ranges_csv,
    write_tables_csv,
    write_thresholds_csv,
)
from .spacecount import MULTISETS, SEQUENCES, fmt12, measure, write_measurements_csv
from .subsets import SubsetFamily, cluster_subsets, load_family, save_family
from .synth import WideningSchedule, load_test_spec, random_program_corpus, synthesize
from .xval import validate, write_validation_csv


@contextmanager
def _atomic_output(path: str):
    """Write to a temp file next to the target, then rename into place."""
    target = Path(path)
    parent = target.parent if str(target.parent) else Path(".")
    fd, tmp_name = tempfile.mkstemp(dir=parent, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            yield f
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _parse_size_range(text: str) -> list[int]:
    spec = parse_size_spec(text)
    return list(range(spec.lo, spec.hi + 1))


def _parse_fractions(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        value = float(part)
        if not 0 < value < 1:
            raise ValueError(f"fraction {part!r} is not in (0, 1)")
        out.append(value)
    if not out:
        raise ValueError("no fractions given")
    return out


def _map_ordered(fn: Callable, items: Iterable, threads: int) -> list:
    """Apply fn over items, optionally on a thread pool; order is preserved
    either way so outputs do not depend on the thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _load_family_arg(args) -> SubsetFamily | None:
    if getattr(args, "family", None):
        return load_family(args.family, cap=args.cap)
    return None


def _resolve_scope(args, family: SubsetFamily | None) -> str:
    scope = args.scope
    if scope == "auto":
        scope = "both" if family is not None else "global"
    if scope in ("subsets", "both") and family is None:
        raise ValueError(f"--scope {scope} requires --family")
    return scope


def cmd_gen(args) -> int:
    if args.dsl_programs:
        corpus = random_program_corpus(
            num_units=args.units,
            size_distribution=args.sizes,
            seed=args.seed,
            zipf_exponent=args.exponent,
        )
    else:
        corpus = generate_zipf_corpus(
            num_units=args.units,
            alphabet_size=args.alphabet,
            zipf_exponent=args.exponent,
            size_distribution=args.sizes,
            seed=args.seed,
            clusters=args.clusters,
            cluster_size=args.cluster_size,
        )
    with _atomic_output(args.output) as f:
        save_corpus(corpus, f)
    return 0


def cmd_cluster(args) -> int:
    corpus = load_corpus(args.input)
    family = cluster_subsets(corpus, cap=args.cap)
    with _atomic_output(args.output) as f:
        save_family(family, f)
    return 0


def _subset_tables(corpus: Corpus, family: SubsetFamily, threads: int) -> list[ProbabilityTable]:
    return _map_ordered(lambda s: subset_instruction_probs(corpus, s), family.subsets, threads)


def cmd_probs(args) -> int:
    corpus = load_corpus(args.input)
    family = _load_family_arg(args)
    scope = _resolve_scope(args, family)
    tables: list[ProbabilityTable] = []
    if scope in ("global", "both"):
        tables.append(global_instruction_probs(corpus))
    if scope in ("subsets", "both"):
        if args.per_size is not None:
            for subset in family.subsets:
                try:
                    tables.append(subset_instruction_probs(corpus, subset, size=args.per_size))
                except ValueError:
                    print(
                        f"note: subset {subset.id} has no covered units of size {args.per_size}; skipped",
                        file=sys.stderr,
                    )
        else:
            tables.extend(_subset_tables(corpus, family, args.threads))
    with _atomic_output(args.output) as f:
        write_tables_csv(tables, f)
    return 0


def _scope_units(corpus: Corpus, family: SubsetFamily | None, scope: str):
    """Ordered (table, scope unit ids) pairs for the requested scope."""
    if scope in ("global", "both"):
        yield global_instruction_probs(corpus), [u.id for u in corpus.units]
    if scope in ("subsets", "both"):
        for subset in family.subsets:
            yield subset_instruction_probs(corpus, subset), list(subset.covered_units)


def cmd_thresholds(args) -> int:
    corpus = load_corpus(args.input)
    family = _load_family_arg(args)
    scope = _resolve_scope(args, family)
    pairs = list(_scope_units(corpus, family, scope))

    def build(pair) -> ThresholdTable:
        table, unit_ids = pair
        return derive_thresholds(corpus, table, unit_ids, args.max_size)

    built = _map_ordered(build, pairs, args.threads)
    with _atomic_output(args.output) as f:
        write_thresholds_csv(built, f)

    if args.ranges:
        rows = []
        for table, unit_ids in pairs:
            observed_by_size: dict[int, list[float]] = {}
            for unit_id in unit_ids:
                unit = corpus.unit_by_id[unit_id]
                if unit.size > args.max_size:
                    continue
                observed_by_size.setdefault(unit.size, []).append(
                    solution_probability(table, unit.instructions)
                )
            for size in range(1, args.max_size + 1):
                rows.append((table.scope, probability_range(table, size, observed_by_size.get(size))))
        with _atomic_output(args.ranges) as f:
            write_ranges_csv(rows, f)

    if args.pu_probs:
        with _atomic_output(args.pu_probs) as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["scope", "pu_id", "size", "log10_probability"])
            for table, unit_ids in pairs:
                for unit_id in unit_ids:
                    unit = corpus.unit_by_id[unit_id]
                    if unit.size > args.max_size:
                        continue
                    log_prob = solution_probability(table, unit.instructions)
                    writer.writerow([table.scope, unit_id, str(unit.size), fmt12(log_prob)])
    return 0


def cmd_measure(args) -> int:
    corpus = load_corpus(args.input)
    family = _load_family_arg(args)
    scope = _resolve_scope(args, family)
    sizes = _parse_size_range(args.sizes)
    max_size = max(sizes)

    def run(pair):
        table, unit_ids = pair
        thresholds = derive_thresholds(corpus, table, unit_ids, max_size)
        return measure(table, thresholds, sizes, args.cap, mode=args.mode, cumulative=args.cumulative)

    measured = _map_ordered(run, _scope_units(corpus, family, scope), args.threads)
    with _atomic_output(args.output) as f:
        write_measurements_csv([m for group in measured for m in group], f)
    return 0


def cmd_validate(args) -> int:
    corpus = load_corpus(args.input)
    fractions = _parse_fractions(args.fractions)

    def run_fraction(fraction: float):
        return validate(
            corpus,
            fractions=[fraction],
            max_size=args.max_size,
            seed=args.seed,
            repeats=args.repeats,
            probs_from_train=args.train_probs,
        )

    groups = _map_ordered(run_fraction, fractions, args.threads)
    with _atomic_output(args.output) as f:
        write_validation_csv([r for group in groups for r in group], f)
    return 0


def cmd_synth(args) -> int:
    corpus = load_corpus(args.input)
    spec = load_test_spec(args.spec)
    family = cluster_subsets(corpus, cap=args.cap)
    tables = {s.id: subset_instruction_probs(corpus, s) for s in family.subsets}
    thresholds = {
        s.id: derive_thresholds(corpus, tables[s.id], list(s.covered_units), args.max_size)
        for s in family.subsets
    }
    if args.no_prune:
        schedule = WideningSchedule(floor_log10=-float("inf"))
    else:
        schedule = WideningSchedule(step_log10=args.step, max_rounds=args.max_rounds)
    report = synthesize(spec, family, tables, thresholds, args.max_size, schedule)
    with _atomic_output(args.output) as f:
        json.dump(report.to_json(), f, indent=2)
        f.write("\n")
    return 0


def _add_common_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", required=True, help="output file path")


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probsynth",
        description="Corpus-driven probability heuristics for pruning program synthesis search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--units", type=int, required=True, help="number of program units")
    p.add_argument("--alphabet", type=int, default=100, help="alphabet size (ranked)")
    p.add_argument("--exponent", type=float, default=1.0, help="Zipf exponent")
    p.add_argument("--sizes", default="1..40", help="unit size range A..B (default 1..40)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--clusters", type=int, default=0, help="overlapping instruction pools (0 = none)")
    p.add_argument("--cluster-size", type=int, default=10, help="instructions per pool")
    p.add_argument(
        "--dsl-programs",
        action="store_true",
        help="generate well-formed stack-DSL programs instead of abstract units",
    )
    _add_common_output(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("cluster", help="cluster units into capped instruction subsets")
    p.add_argument("-i", "--input", required=True, help="corpus JSONL")
    p.add_argument("--cap", type=int, default=10, help="max instructions per subset (default 10)")
    _add_common_output(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("probs", help="instruction probability tables as CSV")
    p.add_argument("-i", "--input", required=True, help="corpus JSONL")
    p.add_argument("--family", help="subset family JSONL (for per-subset scopes)")
    p.add_argument("--cap", type=int, default=None, help="cap recorded in the family file")
    p.add_argument("--scope", choices=["global", "subsets", "both", "auto"], default="auto")
    p.add_argument(
        "--per-size",
        type=int,
        default=None,
        help="restrict per-subset counts to covered units of exactly this size",
    )
    _add_threads(p)
    _add_common_output(p)
    p.set_defaults(func=cmd_probs)

    p = sub.add_parser("thresholds", help="per-size solution probability thresholds as CSV")
    p.add_argument("-i", "--input", required=True, help="corpus JSONL")
    p.add_argument("--family", help="subset family JSONL (for per-subset scopes)")
    p.add_argument("--cap", type=int, default=None, help="cap recorded in the family file")
    p.add_argument("--scope", choices=["global", "subsets", "both", "auto"], default="auto")
    p.add_argument("--max-size", type=int, default=40, help="largest unit size to use (default 40)")
    p.add_argument("--ranges", help="also write possible/observed probability ranges CSV here")
    p.add_argument("--pu-probs", help="also write per-unit solution probabilities CSV here")
    _add_threads(p)
    _add_common_output(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("measure", help="exact admissible-space sizes and reductions as CSV")
    p.add_argument("-i", "--input", required=True, help="corpus JSONL")
    p.add_argument("--family", help="subset family JSONL (for per-subset scopes)")
    p.add_argument("--scope", choices=["global", "subsets", "both", "auto"], default="auto")
    p.add_argument("--sizes", required=True, help="solution size range A..B")
    p.add_argument("--cap", type=int, default=10, help="baseline subset cap (default 10)")
    p.add_argument("--mode", choices=[SEQUENCES, MULTISETS], default=SEQUENCES)
    p.add_argument("--cumulative", action="store_true", help="count all depths 1..S, not just depth S")
    _add_threads(p)
    _add_common_output(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("validate", help="cross-validate thresholds on held-out units")
    p.add_argument("-i", "--input", required=True, help="corpus JSONL")
    p.add_argument("--fractions", required=True, help="comma-separated training fractions in (0,1)")
    p.add_argument("--max-size", type=int, default=40)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--repeats", type=int, default=1, help="splits per fraction (per-repeat seeds)")
    p.add_argument(
        "--train-probs",
        action="store_true",
        help="stricter variant: instruction probabilities from the training part only",
    )
    _add_threads(p)
    _add_common_output(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synth", help="synthesize a DSL program from a test-case spec")
    p.add_argument("--spec", required=True, help="test-case spec JSON")
    p.add_argument("-i", "--input", required=True, help="DSL program corpus JSONL")
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--max-size", type=int, default=5, help="largest program size to try")
    p.add_argument("--step", type=float, default=-2.0, help="log10 widening step per round")
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--no-prune", action="store_true", help="disable threshold pruning")
    _add_threads(p)
    _add_common_output(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusFormatError, ValueError, KeyError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Cross-validation of per-size thresholds against held-out program units.

For each training fraction the corpus is split uniformly at random into a
training and a test part; thresholds are the per-size minimum solution
probabilities observed in the training part, and coverage is the
percentage of test units (per size) whose solution probability clears the
threshold for their size. Instruction probabilities default to the full
corpus, matching the protocol this reproduces; ``probs_from_train``
switches to the stricter variant where they too come from the training
part only.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .corpus import Corpus
from .probability import (
    LOG10_SLACK,
    ProbabilityTable,
    derive_thresholds,
    fmt12,
    global_instruction_probs,
    solution_probability,
)


def split_corpus(corpus: Corpus, fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Split units into (train, test) uniformly at random without replacement.

    Train receives round(fraction * N) units, clamped to 1..N-1 so both
    sides stay non-empty; unit order within each side follows the corpus.
    Deterministic per (corpus, fraction, seed).
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = len(corpus.units)
    if n < 2:
        raise ValueError(f"corpus must have at least 2 units to split, got {n}")
    k = min(max(round(fraction * n), 1), n - 1)
    rng = random.Random(seed)
    train_idx = set(rng.sample(range(n), k))
    train = tuple(u for i, u in enumerate(corpus.units) if i in train_idx)
    test = tuple(u for i, u in enumerate(corpus.units) if i not in train_idx)
    return Corpus(units=train), Corpus(units=test)


@dataclass(frozen=True)
class ValidationResult:
    """Coverage of held-out units per size for one training fraction."""

    training_fraction: float
    seed: int
    per_size_coverage: dict[int, float]
    per_size_test_counts: dict[int, int]
    sizes_without_threshold: tuple[int, ...]

    def mean_coverage(self) -> float:
        if not self.per_size_coverage:
            return 0.0
        return sum(self.per_size_coverage.values()) / len(self.per_size_coverage)


def _coverage_for_split(
    table: ProbabilityTable,
    thresholds: dict[int, float],
    test: Corpus,
    max_size: int,
) -> tuple[dict[int, float], dict[int, int]]:
    hits: dict[int, int] = {s: 0 for s in thresholds}
    totals: dict[int, int] = {s: 0 for s in thresholds}
    for unit in test.units:
        size = unit.size
        if size > max_size or size not in thresholds:
            continue
        totals[size] += 1
        try:
            log_prob = solution_probability(table, unit.instructions)
        except KeyError:
            continue  # instruction unseen in the probability scope: not covered
        if log_prob >= thresholds[size] - LOG10_SLACK:
            hits[size] += 1
    coverage = {
        s: (100.0 * hits[s] / totals[s]) if totals[s] else 100.0 for s in sorted(thresholds)
    }
    return coverage, {s: totals[s] for s in sorted(thresholds)}


def validate(
    corpus: Corpus,
    fractions: Sequence[float],
    max_size: int,
    seed: int,
    repeats: int = 1,
    probs_from_train: bool = False,
) -> list[ValidationResult]:
    """Run the threshold cross-validation sweep over training fractions.

    One split per (fraction, repeat) with per-repeat seeds; every repeat is
    reported separately. Sizes 1..max_size that the training part never
    exhibits are listed in ``sizes_without_threshold``.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    full_table = None if probs_from_train else global_instruction_probs(corpus)
    results = []
    for fraction in fractions:
        for rep in range(repeats):
            rep_seed = seed + rep
            train, test = split_corpus(corpus, fraction, rep_seed)
            table = global_instruction_probs(train) if probs_from_train else full_table
            thr = derive_thresholds(corpus, table, [u.id for u in train.units], max_size)
            coverage, totals = _coverage_for_split(table, thr.thresholds, test, max_size)
            missing = tuple(s for s in range(1, max_size + 1) if s not in thr.thresholds)
            results.append(
                ValidationResult(
                    training_fraction=fraction,
                    seed=rep_seed,
                    per_size_coverage=coverage,
                    per_size_test_counts=totals,
                    sizes_without_threshold=missing,
                )
            )
    return results


def write_validation_csv(results: Iterable[ValidationResult], out: IO[str]) -> None:
    """CSV export of the sweep: fraction, size, coverage percentage, test count."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["fraction", "size", "coverage_pct", "n_test_pus"])
    for result in results:
        for size, coverage in result.per_size_coverage.items():
            writer.writerow(
                [
                    fmt12(result.training_fraction),
                    str(size),
                    fmt12(coverage),
                    str(result.per_size_test_counts[size]),
                ]
            )

"""Exact counting of the admissible search space above a probability threshold.

A node is a candidate solution of a given size over a scope's instruction
alphabet; it is admissible when its log10 solution probability is at least
the threshold (minus the package-wide slack). Counts are exact arbitrary-
precision integers in either of two modes:

  sequences  -- ordered candidates; each admissible instruction multiset
                contributes its multinomial coefficient S!/prod(m_i!)
  multisets  -- unordered candidates; each admissible multiset counts once

The counter is a depth-first branch and bound over multisets with the
instructions sorted by descending probability. At a partial assignment two
exact bounds apply: if even the best completion (all remaining slots on
the most probable remaining instruction) falls below the threshold the
branch is cut, and if even the worst completion passes, the whole subtree
is added in closed form. Both bounds are exact, so the result equals full
enumeration.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from typing import IO, Iterable

from .probability import LOG10_SLACK, ProbabilityTable, ThresholdTable, fmt12

logger = logging.getLogger(__name__)

SEQUENCES = "sequences"
MULTISETS = "multisets"
_MODES = (SEQUENCES, MULTISETS)

# brute_force_count refuses anything bigger than this
_BRUTE_FORCE_MAX_ALPHABET = 8
_BRUTE_FORCE_MAX_SIZE = 8


def _check_mode(mode: str) -> None:
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")


def _count_exact_size(logs: list[float], size: int, threshold: float, sequences: bool) -> int:
    """Count admissible candidates of exactly ``size`` instructions."""
    k = len(logs)
    limit = threshold - LOG10_SLACK
    worst_log = logs[-1]

    def rec(i: int, remaining: int, logp: float, coeff: int) -> int:
        # Best completion: all remaining slots on instruction i (the most
        # probable one left). Admissible bound: nothing below survives.
        if logp + remaining * logs[i] < limit:
            return 0
        # Worst completion: all remaining slots on the least probable
        # instruction. If even that passes, the whole subtree is admissible.
        if logp + remaining * worst_log >= limit:
            n = k - i
            if sequences:
                return coeff * n**remaining
            return math.comb(remaining + n - 1, n - 1)
        total = 0
        for m in range(remaining + 1):
            if sequences:
                total += rec(i + 1, remaining - m, logp + m * logs[i], coeff * math.comb(remaining, m))
            else:
                total += rec(i + 1, remaining - m, logp + m * logs[i], 1)
        return total

    return rec(0, size, 0.0, 1)


def count_admissible(
    table: ProbabilityTable,
    size: int,
    threshold: float,
    mode: str = SEQUENCES,
    cumulative: bool = False,
) -> int:
    """Exact number of admissible candidates at ``size`` over the table's alphabet.

    With ``cumulative`` the candidates of every depth 1..size are counted
    against the same threshold (the interior-node variant of the space).
    """
    _check_mode(mode)
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    if not table.log10_probs:
        raise ValueError("probability table is empty")
    logs = sorted(table.log10_probs.values(), reverse=True)
    sizes = range(1, size + 1) if cumulative else (size,)
    return sum(_count_exact_size(logs, s, threshold, mode == SEQUENCES) for s in sizes)


def brute_force_count(
    table: ProbabilityTable,
    size: int,
    threshold: float,
    mode: str = SEQUENCES,
    cumulative: bool = False,
) -> int:
    """Test oracle: full enumeration with no pruning, same admissibility rule.

    Guarded to alphabets of at most 8 instructions and sizes of at most 8.
    """
    _check_mode(mode)
    if len(table.log10_probs) > _BRUTE_FORCE_MAX_ALPHABET or size > _BRUTE_FORCE_MAX_SIZE:
        raise ValueError(
            f"brute force guard: need alphabet <= {_BRUTE_FORCE_MAX_ALPHABET} and "
            f"size <= {_BRUTE_FORCE_MAX_SIZE}, got {len(table.log10_probs)} and {size}"
        )
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    logs = list(table.log10_probs.values())
    limit = threshold - LOG10_SLACK
    sizes = range(1, size + 1) if cumulative else (size,)
    count = 0
    for s in sizes:
        if mode == SEQUENCES:
            candidates = product(logs, repeat=s)
        else:
            candidates = combinations_with_replacement(logs, s)
        for candidate in candidates:
            if sum(candidate) >= limit:
                count += 1
    return count


def baseline_size(is_cap: int, size: int) -> int:
    """Unpruned sequence count over a cap-sized subset alphabet: cap ** size."""
    if is_cap < 1:
        raise ValueError(f"is_cap must be >= 1, got {is_cap}")
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    return is_cap**size


@dataclass(frozen=True)
class SpaceMeasurement:
    """Admissible-space size and reduction against the baseline for one size."""

    scope: str
    size: int
    threshold: float
    admissible_count: int
    baseline_count: int
    reduction_oom: float
    mode: str


def measure(
    table: ProbabilityTable,
    thresholds: ThresholdTable,
    sizes: Iterable[int],
    is_cap: int,
    mode: str = SEQUENCES,
    cumulative: bool = False,
) -> list[SpaceMeasurement]:
    """Measure admissible space and baseline reduction for each requested size.

    Sizes without a derived threshold are reported and skipped. A fully
    pruned space (admissible count 0) yields an infinite reduction, kept
    as the float infinity sentinel.
    """
    _check_mode(mode)
    out = []
    for size in sizes:
        if size not in thresholds.thresholds:
            logger.warning("no threshold for scope %s at size %d; skipping", thresholds.scope, size)
            continue
        threshold = thresholds.thresholds[size]
        admissible = count_admissible(table, size, threshold, mode=mode, cumulative=cumulative)
        baseline = baseline_size(is_cap, size)
        if admissible == 0:
            reduction = math.inf
        else:
            reduction = math.log10(baseline) - math.log10(admissible)
        out.append(
            SpaceMeasurement(
                scope=table.scope,
                size=size,
                threshold=threshold,
                admissible_count=admissible,
                baseline_count=baseline,
                reduction_oom=reduction,
                mode=mode,
            )
        )
    return out


def write_measurements_csv(measurements: Iterable[SpaceMeasurement], out: IO[str]) -> None:
    """CSV export; counts render as exact decimal strings regardless of size."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["scope", "size", "mode", "threshold_log10", "admissible_count", "baseline_count", "reduction_oom"]
    )
    for m in measurements:
        writer.writerow(
            [
                m.scope,
                str(m.size),
                m.mode,
                fmt12(m.threshold),
                str(m.admissible_count),
                str(m.baseline_count),
                fmt12(m.reduction_oom),
            ]
        )

"""Generate-and-test synthesizer over a small stack DSL, pruned by solution probability.

Programs are flat sequences of instructions from a fixed 24-instruction
stack language over integers and integer lists. Evaluation faults (stack
underflow, type mismatch, overflow, empty-list access) are ordinary values
rather than exceptions, so candidate programs can be executed blindly.

The synthesizer walks each instruction subset in turn, extending partial
programs depth-first in descending instruction-probability order and
testing each generated candidate that clears the threshold for its size.
A partial of length L is cut when its solution probability falls below
every threshold it could still reach (the per-size thresholds for sizes L
and up); since adding instructions only lowers the probability, this cut
never removes a candidate the thresholds admit. If a full sweep at one
threshold level fails, all thresholds are widened by a fixed log10 step
and the sweep repeats, down to the minimum possible probability per size.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping, Sequence

from .corpus import Corpus, ProgramUnit, SizeSpec, parse_size_spec
from .probability import LOG10_SLACK, ProbabilityTable, ThresholdTable
from .subsets import SubsetFamily

INT_LIMIT = 2**63
LIST_LIMIT = 1024


@dataclass(frozen=True)
class Fault:
    """Evaluation fault carried as a value."""

    reason: str


def _is_int(v: object) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_list(v: object) -> bool:
    return isinstance(v, list)


def _bounded(n: int):
    if abs(n) >= INT_LIMIT:
        return Fault("overflow")
    return (n,)


def _need_int(v) -> bool:
    return not _is_int(v)


def _need_list(v) -> bool:
    return not _is_list(v)


def _op_add(x, y):
    if _need_int(x) or _need_int(y):
        return Fault("type-mismatch")
    return _bounded(x + y)


def _op_sub(x, y):
    if _need_int(x) or _need_int(y):
        return Fault("type-mismatch")
    return _bounded(x - y)


def _op_mul(x, y):
    if _need_int(x) or _need_int(y):
        return Fault("type-mismatch")
    return _bounded(x * y)


def _op_neg(x):
    if _need_int(x):
        return Fault("type-mismatch")
    return _bounded(-x)


def _op_inc(x):
    if _need_int(x):
        return Fault("type-mismatch")
    return _bounded(x + 1)


def _op_dec(x):
    if _need_int(x):
        return Fault("type-mismatch")
    return _bounded(x - 1)


def _list_to_int(fn):
    def op(v):
        if _need_list(v):
            return Fault("type-mismatch")
        if not v:
            return Fault("empty-list")
        return (fn(v),)

    return op


def _op_length(v):
    if _need_list(v):
        return Fault("type-mismatch")
    return (len(v),)


def _op_sum(v):
    if _need_list(v):
        return Fault("type-mismatch")
    return _bounded(sum(v))


def _op_tail(v):
    if _need_list(v):
        return Fault("type-mismatch")
    if not v:
        return Fault("empty-list")
    return (v[1:],)


def _op_reverse(v):
    if _need_list(v):
        return Fault("type-mismatch")
    return (v[::-1],)


def _op_sort(v):
    if _need_list(v):
        return Fault("type-mismatch")
    return (sorted(v),)


def _op_concat(x, y):
    if _need_list(x) or _need_list(y):
        return Fault("type-mismatch")
    if len(x) + len(y) > LIST_LIMIT:
        return Fault("overflow")
    return (x + y,)


def _op_map_inc(v):
    if _need_list(v):
        return Fault("type-mismatch")
    if any(abs(e) + 1 >= INT_LIMIT for e in v):
        return Fault("overflow")
    return ([e + 1 for e in v],)


def _op_filter_pos(v):
    if _need_list(v):
        return Fault("type-mismatch")
    return ([e for e in v if e > 0],)


# name -> (input arity, output arity, implementation)
_OPS = {
    "push0": (0, 1, lambda: (0,)),
    "push1": (0, 1, lambda: (1,)),
    "push2": (0, 1, lambda: (2,)),
    "push3": (0, 1, lambda: (3,)),
    "add": (2, 1, _op_add),
    "dup": (1, 2, lambda x: (x, x)),
    "sub": (2, 1, _op_sub),
    "mul": (2, 1, _op_mul),
    "swap": (2, 2, lambda x, y: (y, x)),
    "inc": (1, 1, _op_inc),
    "drop": (1, 0, lambda x: ()),
    "dec": (1, 1, _op_dec),
    "neg": (1, 1, _op_neg),
    "length": (1, 1, _op_length),
    "sum": (1, 1, _op_sum),
    "head": (1, 1, _list_to_int(lambda v: v[0])),
    "tail": (1, 1, _op_tail),
    "reverse": (1, 1, _op_reverse),
    "sort": (1, 1, _op_sort),
    "concat": (2, 1, _op_concat),
    "maximum": (1, 1, _list_to_int(max)),
    "minimum": (1, 1, _list_to_int(min)),
    "map_inc": (1, 1, _op_map_inc),
    "filter_pos": (1, 1, _op_filter_pos),
}

# Canonical alphabet order doubles as the rank order for synthetic corpora.
DSL_ALPHABET = tuple(_OPS)


def _step(stack: list, instruction: str):
    """Apply one instruction to the stack in place; return a Fault or None."""
    try:
        in_arity, _, fn = _OPS[instruction]
    except KeyError:
        raise ValueError(f"unknown DSL instruction {instruction!r}") from None
    if len(stack) < in_arity:
        return Fault("stack-underflow")
    if in_arity:
        args = stack[-in_arity:]
        del stack[-in_arity:]
        result = fn(*args)
    else:
        result = fn()
    if isinstance(result, Fault):
        return result
    stack.extend(result)
    return None


def evaluate(program: Sequence[str], inputs: Sequence = ()):
    """Run a program on the given input stack; the result is the top value.

    Deterministic; all runtime failures come back as Fault values.
    """
    stack = list(inputs)
    for instruction in program:
        fault = _step(stack, instruction)
        if fault is not None:
            return fault
    if not stack:
        return Fault("empty-stack")
    return stack[-1]


def stack_effect(program: Sequence[str], input_arity: int = 0) -> int | None:
    """Statically computed final stack depth, or None on underflow."""
    depth = input_arity
    for instruction in program:
        if instruction not in _OPS:
            return None
        in_arity, out_arity, _ = _OPS[instruction]
        if depth < in_arity:
            return None
        depth += out_arity - in_arity
    return depth


def well_formed(program: Sequence[str], input_arity: int = 0) -> bool:
    """True when the program never underflows and leaves a result on the stack."""
    depth = stack_effect(program, input_arity)
    return depth is not None and depth >= 1


def _check_value(value, where: str) -> None:
    if _is_int(value):
        return
    if _is_list(value) and all(_is_int(e) for e in value):
        return
    raise ValueError(f"{where}: values must be integers or integer lists, got {value!r}")


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class, despite the domain name

    inputs: tuple
    expected: object


@dataclass(frozen=True)
class TestCaseSpec:
    """Input/output examples the synthesized program must satisfy.

    Inputs must be DSL values; the expected output may be any JSON value
    (a value no DSL program produces makes the spec unsatisfiable).
    """

    __test__ = False

    cases: tuple[TestCase, ...]

    def __post_init__(self) -> None:
        if not self.cases:
            raise ValueError("a test-case spec needs at least one case")
        arity = len(self.cases[0].inputs)
        for i, case in enumerate(self.cases):
            if len(case.inputs) != arity:
                raise ValueError(f"case {i}: expected {arity} inputs, got {len(case.inputs)}")
            for value in case.inputs:
                _check_value(value, f"case {i}")

    @property
    def input_arity(self) -> int:
        return len(self.cases[0].inputs)


def _values_equal(result, expected) -> bool:
    return type(result) is type(expected) and result == expected


def satisfies(program: Sequence[str], spec: TestCaseSpec) -> bool:
    """True when the program reproduces every case's expected output."""
    return all(_values_equal(evaluate(program, case.inputs), case.expected) for case in spec.cases)


def cases_from_program(program: Sequence[str], inputs_list: Sequence[Sequence]) -> TestCaseSpec:
    """Build a spec by running a known program on the given inputs."""
    cases = []
    for inputs in inputs_list:
        result = evaluate(program, inputs)
        if isinstance(result, Fault):
            raise ValueError(f"program faults ({result.reason}) on inputs {inputs!r}")
        cases.append(TestCase(inputs=tuple(inputs), expected=result))
    return TestCaseSpec(cases=tuple(cases))


def load_test_spec(path: str | Path) -> TestCaseSpec:
    """Read a spec file: {"cases": [{"inputs": [...], "output": ...}, ...]}."""
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    try:
        cases = tuple(
            TestCase(inputs=tuple(entry["inputs"]), expected=entry["output"])
            for entry in payload["cases"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed test-case spec {path}: {exc}") from None
    return TestCaseSpec(cases=cases)


def save_test_spec(spec: TestCaseSpec, out: IO[str] | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8") as f:
            save_test_spec(spec, f)
        return
    payload = {"cases": [{"inputs": list(c.inputs), "output": c.expected} for c in spec.cases]}
    json.dump(payload, out, indent=2)
    out.write("\n")


@dataclass(frozen=True)
class WideningSchedule:
    """Iterative threshold widening: each round lowers every size's threshold
    by ``step_log10`` until it reaches its floor (the minimum possible
    solution probability at that size, unless overridden).

    A floor of -inf disables pruning entirely: a single round runs with no
    threshold at all.
    """

    step_log10: float = -2.0
    max_rounds: int | None = None
    floor_log10: float | None = None

    def __post_init__(self) -> None:
        if self.step_log10 >= 0:
            raise ValueError(f"step_log10 must be negative, got {self.step_log10}")

    @property
    def prunes(self) -> bool:
        return self.floor_log10 != -math.inf


UNPRUNED = WideningSchedule(floor_log10=-math.inf)


@dataclass
class SearchReport:
    """Outcome and node accounting for one synthesis run."""

    solution: tuple[str, ...] | None
    nodes_expanded: int
    nodes_pruned_by_threshold: int
    threshold_schedule_used: list[float]
    rounds: int
    solved_subset_id: int | None

    def to_json(self) -> dict:
        return {
            "solution": list(self.solution) if self.solution is not None else None,
            "nodes_expanded": self.nodes_expanded,
            "nodes_pruned_by_threshold": self.nodes_pruned_by_threshold,
            "threshold_schedule_used": self.threshold_schedule_used,
            "rounds": self.rounds,
            "solved_subset_id": self.solved_subset_id,
        }


class _SubsetSearch:
    """Per-subset search state: extension order, log-probs, threshold bases."""

    def __init__(self, subset_id, table: ProbabilityTable, thresholds: ThresholdTable, max_size: int, floor_override):
        self.subset_id = subset_id
        ordered = sorted(table.log10_probs.items(), key=lambda kv: (-kv[1], kv[0]))
        self.order = [instr for instr, _ in ordered]
        self.logps = dict(ordered)
        min_log = min(self.logps.values())
        self.floors = [0.0] + [
            floor_override if floor_override is not None else s * min_log
            for s in range(1, max_size + 1)
        ]
        self.bases = [0.0] + [
            thresholds.thresholds.get(s, self.floors[s]) for s in range(1, max_size + 1)
        ]

    def round_thresholds(self, offset: float, max_size: int) -> tuple[list[float], list[float], bool]:
        """Per-size active thresholds, suffix minima, and an all-at-floor flag."""
        active = [0.0] + [max(self.bases[s] + offset, self.floors[s]) for s in range(1, max_size + 1)]
        at_floor = all(active[s] <= self.floors[s] for s in range(1, max_size + 1))
        tail_min = list(active)
        for s in range(max_size - 1, 0, -1):
            tail_min[s] = min(tail_min[s], tail_min[s + 1])
        return active, tail_min, at_floor


def synthesize(
    spec: TestCaseSpec,
    family: SubsetFamily,
    tables: Mapping[int, ProbabilityTable],
    thresholds: Mapping[int, ThresholdTable],
    max_size: int,
    schedule: WideningSchedule | None = None,
    prune: bool = True,
) -> SearchReport:
    """Search for a program of at most ``max_size`` instructions satisfying the spec.

    Subsets are tried in family order within each widening round; the first
    candidate that is admissible at its size and passes every test case
    wins. An exhausted schedule (all thresholds at their floors with no
    solution) yields an empty report.

    The thresholds define which candidates are tested; the admissible cut
    of whole branches is the search optimization on top. ``prune=False``
    disables only the cut, so the run enumerates the same candidate space
    in the same order and returns the same solution while expanding at
    least as many nodes, which makes it the baseline for measuring what
    pruning saves.
    """
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    if schedule is None:
        schedule = WideningSchedule()

    searches = [
        _SubsetSearch(s.id, tables[s.id], thresholds[s.id], max_size, schedule.floor_log10)
        for s in family.subsets
    ]

    counters = {"expanded": 0, "pruned": 0}
    schedule_used: list[float] = []
    solution: tuple[str, ...] | None = None
    solved_subset: int | None = None
    rounds = 0

    round_index = 0
    while True:
        offset = round_index * schedule.step_log10 if schedule.prunes else -math.inf
        schedule_used.append(offset)
        rounds += 1
        all_floored = True
        for search in searches:
            active, tail_min, at_floor = search.round_thresholds(offset, max_size)
            if not at_floor:
                all_floored = False
            found = _dfs_subset(search, spec, max_size, active, tail_min, counters, prune)
            if found is not None:
                solution = found
                solved_subset = search.subset_id
                break
        if solution is not None or all_floored or not schedule.prunes:
            break
        if schedule.max_rounds is not None and rounds >= schedule.max_rounds:
            break
        round_index += 1

    return SearchReport(
        solution=solution,
        nodes_expanded=counters["expanded"],
        nodes_pruned_by_threshold=counters["pruned"],
        threshold_schedule_used=schedule_used,
        rounds=rounds,
        solved_subset_id=solved_subset,
    )


def _dfs_subset(
    search: _SubsetSearch,
    spec: TestCaseSpec,
    max_size: int,
    active: list[float],
    tail_min: list[float],
    counters: dict,
    prune: bool,
) -> tuple[str, ...] | None:
    order = search.order
    logps = search.logps
    expected = [case.expected for case in spec.cases]

    def rec(prefix: list[str], logp: float, states: list) -> tuple[str, ...] | None:
        length = len(prefix) + 1
        for instruction in order:
            child_logp = logp + logps[instruction]
            # Admissible cut: below every threshold this partial could
            # still reach, no completion can be admitted this round. Any
            # candidate admissible at its own size keeps every prefix
            # above the cut, so the cut never hides a testable candidate.
            if prune and child_logp < tail_min[length] - LOG10_SLACK:
                counters["pruned"] += 1
                continue
            counters["expanded"] += 1
            child_states = []
            alive = False
            for state in states:
                if state is None:
                    child_states.append(None)
                    continue
                new_state = list(state)
                if _step(new_state, instruction) is not None:
                    child_states.append(None)
                else:
                    child_states.append(new_state)
                    alive = True
            if child_logp >= active[length] - LOG10_SLACK:
                solved = all(
                    state is not None and state and _values_equal(state[-1], exp)
                    for state, exp in zip(child_states, expected)
                )
                if solved:
                    return tuple(prefix + [instruction])
            if length < max_size and alive:
                prefix.append(instruction)
                found = rec(prefix, child_logp, child_states)
                prefix.pop()
                if found is not None:
                    return found
        return None

    initial = [list(case.inputs) for case in spec.cases]
    return rec([], 0.0, initial)


def random_program_corpus(
    num_units: int,
    size_distribution: SizeSpec | str,
    seed: int,
    alphabet: Sequence[str] = DSL_ALPHABET,
    zipf_exponent: float = 1.0,
    input_arity: int = 0,
    probe_inputs: Sequence[Sequence] = ((),),
) -> Corpus:
    """Corpus of random well-formed DSL programs for synthesizer experiments.

    Instructions are drawn Zipf-weighted in the order the alphabet lists
    them; candidates are rejected until they are statically well-formed for
    ``input_arity`` and evaluate without fault on every probe input. The
    stored instruction list keeps program order, so corpus units double as
    runnable programs.
    """
    if num_units < 1:
        raise ValueError(f"num_units must be >= 1, got {num_units}")
    for instruction in alphabet:
        if instruction not in _OPS:
            raise ValueError(f"unknown DSL instruction {instruction!r}")
    for probe in probe_inputs:
        if len(probe) != input_arity:
            raise ValueError(f"probe {probe!r} does not match input arity {input_arity}")
    if isinstance(size_distribution, str):
        size_distribution = parse_size_spec(size_distribution)

    rng = random.Random(seed)
    weights = [k ** -zipf_exponent for k in range(1, len(alphabet) + 1)]
    cum = []
    running = 0.0
    for w in weights:
        running += w
        cum.append(running)

    id_width = len(str(num_units))
    units = []
    attempts = 0
    max_attempts = 20_000 * num_units
    while len(units) < num_units:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError(
                f"rejection sampling stalled after {attempts} attempts; "
                f"alphabet {list(alphabet)!r} may admit no valid programs at arity {input_arity}"
            )
        size = size_distribution.sample(rng)
        program = tuple(rng.choices(alphabet, cum_weights=cum, k=size))
        if not well_formed(program, input_arity):
            continue
        if any(isinstance(evaluate(program, probe), Fault) for probe in probe_inputs):
            continue
        units.append(ProgramUnit(id=f"p{len(units) + 1:0{id_width}d}", instructions=program))
    return Corpus(units=tuple(units))

"""Stack DSL evaluation and the threshold-pruned synthesizer."""

from __future__ import annotations

import pytest

from probsynth import (
    Fault,
    TestCase,
    TestCaseSpec,
    UNPRUNED,
    WideningSchedule,
    cases_from_program,
    cluster_subsets,
    derive_thresholds,
    evaluate,
    random_program_corpus,
    satisfies,
    solution_probability,
    stack_effect,
    subset_instruction_probs,
    synthesize,
    well_formed,
)
from probsynth.synth import _SubsetSearch, load_test_spec, save_test_spec


class TestEvaluate:
    @pytest.mark.parametrize(
        "program,inputs,expected",
        [
            (["push1", "push2", "add"], (), 3),
            (["dup", "add"], (5,), 10),
            (["sum"], ([1, 2, 3],), 6),
            (["push2", "push3", "mul"], (), 6),
            (["push3", "push1", "sub"], (), 2),
            (["push2", "neg"], (), -2),
            (["push2", "inc", "inc"], (), 4),
            (["push2", "dec"], (), 1),
            (["push1", "push2", "swap", "sub"], (), 1),
            (["push1", "push2", "drop"], (), 1),
            (["length"], ([4, 5],), 2),
            (["head"], ([7, 8],), 7),
            (["tail"], ([7, 8, 9],), [8, 9]),
            (["reverse"], ([1, 2, 3],), [3, 2, 1]),
            (["sort"], ([3, 1, 2],), [1, 2, 3]),
            (["concat"], ([1], [2, 3]), [1, 2, 3]),
            (["maximum"], ([4, 9, 2],), 9),
            (["minimum"], ([4, 9, 2],), 2),
            (["map_inc"], ([1, 2],), [2, 3]),
            (["filter_pos"], ([-2, 3, 0, 1],), [3, 1]),
        ],
    )
    def test_op_results(self, program, inputs, expected):
        assert evaluate(program, inputs) == expected

    @pytest.mark.parametrize(
        "program,inputs,reason",
        [
            (["add"], (), "stack-underflow"),
            (["sum"], (5,), "type-mismatch"),
            (["add"], (1, [2]), "type-mismatch"),
            (["head"], ([],), "empty-list"),
            (["drop"], (1,), "empty-stack"),
        ],
    )
    def test_faults_are_values(self, program, inputs, reason):
        result = evaluate(program, inputs)
        assert result == Fault(reason)

    def test_overflow_faults(self):
        program = ["push3", "dup"] + ["mul", "dup"] * 40
        result = evaluate(program[:-1], ())
        assert isinstance(result, Fault)
        assert result.reason == "overflow"

    def test_unknown_instruction_is_an_error(self):
        with pytest.raises(ValueError, match="frobnicate"):
            evaluate(["frobnicate"], ())

    def test_deterministic(self):
        program = ["push1", "push2", "add", "dup", "mul"]
        assert evaluate(program, ()) == evaluate(program, ())


class TestWellFormed:
    def test_stack_effect_counts_depth(self):
        assert stack_effect(["push1", "push2", "add"], 0) == 1
        assert stack_effect(["dup"], 1) == 2
        assert stack_effect(["add"], 0) is None

    def test_well_formed_needs_a_result(self):
        assert well_formed(["push1"], 0)
        assert not well_formed(["drop"], 1)
        assert not well_formed(["add"], 1)

    def test_well_formed_programs_never_underflow(self):
        corpus = random_program_corpus(150, "1..6", seed=23)
        for unit in corpus.units:
            result = evaluate(unit.instructions, ())
            assert result != Fault("stack-underflow")
            assert result != Fault("empty-stack")

    def test_program_corpus_deterministic(self):
        a = random_program_corpus(80, "1..5", seed=23, input_arity=1, probe_inputs=((4,),))
        b = random_program_corpus(80, "1..5", seed=23, input_arity=1, probe_inputs=((4,),))
        assert a == b


class TestTestCaseSpec:
    def test_requires_cases(self):
        with pytest.raises(ValueError):
            TestCaseSpec(cases=())

    def test_requires_consistent_arity(self):
        with pytest.raises(ValueError, match="inputs"):
            TestCaseSpec(cases=(TestCase((1,), 1), TestCase((1, 2), 3)))

    def test_rejects_non_dsl_inputs(self):
        with pytest.raises(ValueError):
            TestCaseSpec(cases=(TestCase(("text",), 1),))

    def test_round_trip(self, tmp_path):
        spec = TestCaseSpec(cases=(TestCase((5, [1, 2]), [2, 3]), TestCase((6, [0, 0]), [1, 1])))
        path = tmp_path / "spec.json"
        save_test_spec(spec, path)
        loaded = load_test_spec(path)
        assert loaded.cases[0].inputs == (5, [1, 2])
        assert loaded.cases[0].expected == [2, 3]

    def test_cases_from_program(self):
        spec = cases_from_program(["dup", "add"], [(2,), (5,)])
        assert spec.cases == (TestCase((2,), 4), TestCase((5,), 10))
        with pytest.raises(ValueError, match="faults"):
            cases_from_program(["head"], [([],)])


class TestSynthesize:
    def test_finds_constant_program(self, dsl_corpus, dsl_family, dsl_tables, dsl_thresholds):
        spec = TestCaseSpec(cases=(TestCase((), 3),))
        report = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=3)
        assert report.solution is not None
        assert len(report.solution) <= 3
        assert satisfies(report.solution, spec)
        assert report.nodes_expanded >= 1
        baseline = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=3, prune=False)
        assert report.nodes_expanded <= baseline.nodes_expanded

    def test_pruned_run_never_expands_more(self, dsl_corpus, dsl_family, dsl_tables, dsl_thresholds):
        # prune=False keeps the same admissible candidate space but never
        # cuts branches, so both runs return the same solution and the cut
        # can only save work
        planted = next(u for u in dsl_corpus.units if u.size == 4)
        spec = cases_from_program(planted.instructions, [()])
        pruned = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=4)
        baseline = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=4, prune=False)
        assert pruned.solution == baseline.solution
        assert pruned.solution is not None
        assert satisfies(pruned.solution, spec)
        assert baseline.nodes_pruned_by_threshold == 0
        assert pruned.nodes_expanded <= baseline.nodes_expanded

    def test_threshold_free_schedule_never_prunes(self, dsl_family, dsl_tables, dsl_thresholds):
        spec = TestCaseSpec(cases=(TestCase((), 7),))
        report = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=4, schedule=UNPRUNED)
        assert report.nodes_pruned_by_threshold == 0
        assert report.rounds == 1

    def test_planted_program_recovered(self, dsl_corpus, dsl_family, dsl_tables, dsl_thresholds):
        planted = next(u for u in dsl_corpus.units if u.size == 6)
        spec = cases_from_program(planted.instructions, [()])
        report = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=6)
        assert report.solution is not None
        assert satisfies(report.solution, spec)
        # prune-safety: the planted unit clears its own size's threshold in
        # the subset that covers it
        cover = next(s for s in dsl_family.subsets if planted.id in s.covered_units)
        log_prob = solution_probability(dsl_tables[cover.id], planted.instructions)
        assert log_prob >= dsl_thresholds[cover.id].thresholds[planted.size] - 1e-9

    def test_found_solution_clears_active_threshold(
        self, dsl_family, dsl_tables, dsl_thresholds
    ):
        spec = TestCaseSpec(cases=(TestCase((), 5),))
        report = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=4)
        assert report.solution is not None and report.rounds == 1
        table = dsl_tables[report.solved_subset_id]
        thr = dsl_thresholds[report.solved_subset_id]
        size = len(report.solution)
        base = thr.thresholds.get(size, size * table.min_log10)
        assert solution_probability(table, report.solution) >= base - 1e-9

    def test_unsatisfiable_spec_exhausts_schedule(self, dsl_family, dsl_tables, dsl_thresholds):
        spec = TestCaseSpec(cases=(TestCase((5,), "impossible"),))
        report = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=3)
        assert report.solution is None
        assert report.rounds == len(report.threshold_schedule_used)
        assert report.rounds >= 1
        # final round ran with every threshold at its floor
        assert report.threshold_schedule_used[-1] == min(report.threshold_schedule_used)

    def test_list_pipeline_synthesis(self):
        alphabet = ("sort", "reverse", "tail", "map_inc", "sum", "head", "dup", "filter_pos")
        corpus = random_program_corpus(
            120, "1..3", seed=41, alphabet=alphabet, input_arity=1, probe_inputs=(([3, 1, 2],),)
        )
        family = cluster_subsets(corpus, cap=8)
        tables = {s.id: subset_instruction_probs(corpus, s) for s in family.subsets}
        thresholds = {
            s.id: derive_thresholds(corpus, tables[s.id], list(s.covered_units), 3)
            for s in family.subsets
        }
        spec = TestCaseSpec(
            cases=(TestCase(([3, 1, 2],), [1, 2, 3]), TestCase(([9, 4],), [4, 9]))
        )
        report = synthesize(spec, family, tables, thresholds, max_size=3)
        assert report.solution is not None
        assert satisfies(report.solution, spec)

    def test_report_json_round_trip(self, dsl_family, dsl_tables, dsl_thresholds):
        spec = TestCaseSpec(cases=(TestCase((), 2),))
        report = synthesize(spec, dsl_family, dsl_tables, dsl_thresholds, max_size=2)
        payload = report.to_json()
        assert payload["solution"] == list(report.solution)
        assert payload["nodes_expanded"] == report.nodes_expanded


class TestWideningSchedule:
    def test_step_must_be_negative(self):
        with pytest.raises(ValueError):
            WideningSchedule(step_log10=0.5)

    def test_rounds_widen_monotonically(self, dsl_tables, dsl_thresholds):
        subset_id = next(iter(dsl_tables))
        search = _SubsetSearch(subset_id, dsl_tables[subset_id], dsl_thresholds[subset_id], 6, None)
        schedule = WideningSchedule()
        previous = None
        for round_index in range(6):
            active, tail_min, _ = search.round_thresholds(round_index * schedule.step_log10, 6)
            if previous is not None:
                assert all(a <= p for a, p in zip(active[1:], previous[1:]))
            assert all(tail_min[s] <= active[s] for s in range(1, 7))
            previous = active

    def test_thresholds_never_pass_their_floors(self, dsl_tables, dsl_thresholds):
        subset_id = next(iter(dsl_tables))
        search = _SubsetSearch(subset_id, dsl_tables[subset_id], dsl_thresholds[subset_id], 6, None)
        active, _, at_floor = search.round_thresholds(-1000.0, 6)
        assert at_floor
        assert active[1:] == search.floors[1:]

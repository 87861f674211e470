from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from geoagent.evaluator import (
    GENERATION_TOOLS,
    NoNumberFound,
    StepScores,
    aggregate_stepwise,
    answer_score,
    box_iou,
    category_f1,
    error_taxonomy,
    extract_first_number,
    order_metrics,
    score_step,
    stepwise_eval,
)
from geoagent.judge import JudgeUnavailable
from geoagent.orchestrator import (
    Action,
    FormatError,
    FormatErrorKind,
    RunStats,
    ToolCall,
)
from geoagent.registry import ToolCategory

# score_step -------------------------------------------------------------------

GOLD = Action(
    "compute",
    ToolCall(
        "ComputeDistance",
        {"geopackage": "b", "source_layer": "s", "target_layer": "t"},
    ),
)


def test_identical_prediction_scores_all_true(registry):
    scores = score_step(GOLD, GOLD, 3, registry)
    assert (scores.inst, scores.tool, scores.argn, scores.argv) == (
        True, True, True, True,
    )
    assert not scores.exempt


def test_missing_arg_breaks_argn(registry):
    pred = Action(
        "compute",
        ToolCall("ComputeDistance", {"geopackage": "b", "source_layer": "s"}),
    )
    scores = score_step(pred, GOLD, 3, registry)
    # The call itself fails validation (missing required), so inst is
    # false too; supply a schema-valid call that drops a gold-named arg
    # to isolate argn.
    assert not scores.inst

    gold = Action(
        "boundary",
        ToolCall("GetAreaBoundary", {"place": "X", "buffer_m": 100}),
    )
    pred = Action("boundary", ToolCall("GetAreaBoundary", {"place": "X"}))
    scores = score_step(pred, gold, 3, registry)
    assert scores.inst and scores.tool
    assert not scores.argn and not scores.argv


def test_wrong_tool_breaks_tool(registry):
    pred = Action("calc", ToolCall("Calculator", {"expression": "1"}))
    scores = score_step(pred, GOLD, 2, registry)
    assert scores.inst and not scores.tool


def test_format_error_scores_all_false(registry):
    pred = FormatError(FormatErrorKind.WRONG_FORMAT, "bad json")
    scores = score_step(pred, GOLD, 2, registry)
    assert (scores.inst, scores.tool, scores.argn, scores.argv) == (
        False, False, False, False,
    )


def test_wrong_value_breaks_only_argv(registry):
    pred = Action(
        "compute",
        ToolCall(
            "ComputeDistance",
            {"geopackage": "b", "source_layer": "WRONG", "target_layer": "t"},
        ),
    )
    scores = score_step(pred, GOLD, 2, registry)
    assert scores.inst and scores.tool and scores.argn
    assert not scores.argv


def test_first_step_marked_exempt(registry):
    scores = score_step(GOLD, GOLD, 1, registry)
    assert scores.exempt


def test_argv_normalization(registry):
    gold = Action(
        "d",
        ToolCall("DrawBox", {"image": "dir/img.png", "bbox": [1.0, 2.0, 3.0, 4.0],
                             "label": "Tank"}),
    )
    pred = Action(
        "d",
        ToolCall("DrawBox", {"image": "other/IMG.PNG", "bbox": [1.0005, 2.0, 3.0, 4.0],
                             "label": " tank "}),
    )
    scores = score_step(pred, gold, 2, registry)
    # case-insensitive strings, path tails, numbers at 1e-3 relative
    assert scores.argv


def test_ladder_monotonicity_is_enforced():
    with pytest.raises(AssertionError):
        StepScores(inst=False, tool=True, argn=False, argv=False)
    with pytest.raises(AssertionError):
        StepScores(inst=True, tool=False, argn=True, argv=False)


# order_metrics ----------------------------------------------------------------


def brute_force_order(pred, ref):
    unique = sorted(set(pred)) == sorted(set(ref))
    any_order = sorted(pred) == sorted(ref)
    same_order = list(pred) == list(ref)
    return unique, any_order, same_order


def test_order_metrics_definition_cases():
    verdict = order_metrics(["A", "B", "B", "C"], ["A", "B", "C", "B"])
    assert verdict.unique and verdict.any_order and not verdict.same_order

    verdict = order_metrics(["A", "B"], ["A", "B", "B"])
    assert verdict.unique and not verdict.any_order and not verdict.same_order

    verdict = order_metrics(["A", "B"], ["A", "B"])
    assert verdict.unique and verdict.any_order and verdict.same_order


def test_order_metrics_exhaustive_against_oracle():
    alphabet = ["A", "B", "C"]
    sequences = [
        seq
        for length in range(5)
        for seq in itertools.product(alphabet, repeat=length)
    ]
    assert len(sequences) == 1 + 3 + 9 + 27 + 81
    mismatches = 0
    for pred, ref in itertools.product(sequences, repeat=2):
        verdict = order_metrics(list(pred), list(ref))
        unique, any_order, same_order = brute_force_order(pred, ref)
        if (verdict.unique, verdict.any_order, verdict.same_order) != (
            unique, any_order, same_order,
        ):
            mismatches += 1
        # ladder: same_order => any_order => unique
        assert not (verdict.same_order and not verdict.any_order)
        assert not (verdict.any_order and not verdict.unique)
    assert mismatches == 0


# category_f1 ------------------------------------------------------------------

MAPPING = {
    "TextToBbox": ToolCategory.PERCEPTION,
    "CountGivenObject": ToolCategory.PERCEPTION,
    "Terminate": ToolCategory.OPERATION,
    "Plot": ToolCategory.OPERATION,
    "Calculator": ToolCategory.LOGIC,
    "Solver": ToolCategory.LOGIC,
    "ComputeDistance": ToolCategory.GIS,
    "AddPoisLayer": ToolCategory.GIS,
}


def oracle_f1(pred, ref):
    tp = sum((Counter(pred) & Counter(ref)).values())
    if not pred and not ref:
        return 1.0
    precision = tp / len(pred) if pred else 0.0
    recall = tp / len(ref) if ref else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def test_category_f1_paper_style_example():
    result = category_f1(
        ["TextToBbox"], ["TextToBbox", "CountGivenObject"], MAPPING
    )
    assert result.f1["perception"] == pytest.approx(2 / 3)
    assert result.applicable["perception"]
    assert result.f1["gis"] == 1.0 and not result.applicable["gis"]


def test_category_f1_identity():
    tools = ["TextToBbox", "Calculator", "Terminate", "ComputeDistance"]
    result = category_f1(tools, list(tools), MAPPING)
    assert all(value == 1.0 for value in result.f1.values())


def test_category_f1_multiset_counting():
    result = category_f1(["Calculator", "Calculator"], ["Calculator"], MAPPING)
    assert result.f1["logic"] == pytest.approx(2 / 3)


def test_category_f1_set_mode_collapses_duplicates():
    result = category_f1(
        ["Calculator", "Calculator"], ["Calculator"], MAPPING, set_mode=True
    )
    assert result.f1["logic"] == 1.0


def test_category_f1_unmapped_bucket():
    result = category_f1(["Mystery"], ["Calculator"], MAPPING)
    assert result.unmapped_pred == 1
    assert result.f1["logic"] == 0.0


def _multisets(items, max_count):
    for counts in itertools.product(range(max_count + 1), repeat=len(items)):
        yield [
            name for name, count in zip(items, counts) for _ in range(count)
        ]


@pytest.mark.parametrize(
    "category,tools",
    [
        ("perception", ["TextToBbox", "CountGivenObject"]),
        ("operation", ["Terminate", "Plot"]),
        ("logic", ["Calculator", "Solver"]),
        ("gis", ["ComputeDistance", "AddPoisLayer"]),
    ],
)
def test_category_f1_exhaustive_against_counting_oracle(category, tools):
    # All multiset pairs with up to 3 items per category.
    pools = [m for m in _multisets(tools, 3) if len(m) <= 3]
    for pred, ref in itertools.product(pools, repeat=2):
        result = category_f1(pred, ref, MAPPING)
        assert result.f1[category] == pytest.approx(oracle_f1(pred, ref))
        for other in result.f1:
            if other != category:
                assert result.f1[other] == 1.0
                assert not result.applicable[other]


# answer_score -----------------------------------------------------------------


def test_numeric_tolerance_from_the_scoring_protocol():
    assert answer_score("108", "100", "numeric") == 1.0
    assert answer_score("111", "100", "numeric") == 0.0
    assert answer_score("92", "100", "numeric") == 1.0
    assert answer_score("89", "100", "numeric") == 0.0


def test_numeric_boundary_inclusive_for_random_golds():
    rng = random.Random(2024)
    for _ in range(100):
        gold = rng.uniform(-1000, 1000)
        while gold == 0:
            gold = rng.uniform(-1000, 1000)
        for sign in (1, -1):
            on_boundary = gold * (1 + sign * 0.1)
            outside = gold * (1 + sign * (0.1 + 1e-6))
            assert answer_score(repr(on_boundary), repr(gold), "numeric") == 1.0
            assert answer_score(repr(outside), repr(gold), "numeric") == 0.0


def test_numeric_zero_gold_uses_absolute_tolerance():
    assert answer_score("0", "0", "numeric") == 1.0
    assert answer_score("1e-10", "0", "numeric") == 1.0
    assert answer_score("0.1", "0", "numeric") == 0.0


def test_numeric_extracts_first_number_from_text():
    assert answer_score("about 104 meters", "100 m", "numeric") == 1.0
    assert answer_score("no digits here", "100", "numeric") == 0.0


def test_empty_prediction_scores_zero():
    assert answer_score("", "100", "numeric") == 0.0
    assert answer_score("   ", "(0,0,10,10)", "bbox") == 0.0


def test_bbox_iou_case():
    # IoU((0,0,10,10), (5,0,15,10)) = 50/150 = 1/3 < 0.5
    assert box_iou([0, 0, 10, 10], [5, 0, 15, 10]) == pytest.approx(1 / 3)
    assert answer_score("(5, 0, 15, 10)", "(0, 0, 10, 10)", "bbox") == 0.0
    assert answer_score("(0, 0, 10, 10)", "(0, 0, 10, 10)", "bbox") == 1.0


def test_bbox_threshold_half_open():
    # IoU exactly 0.5: boxes overlap half of the union.
    assert answer_score("(0, 0, 10, 5)", "(0, 0, 10, 10)", "bbox") == 1.0


def test_text_requires_judge():
    with pytest.raises(JudgeUnavailable):
        answer_score("a", "b", "text")


def test_text_uses_configured_judge():
    class HalfJudge:
        def score(self, pred, gold, query):
            return 0.5

    assert answer_score("a", "b", "text", judge=HalfJudge()) == 0.5


def test_generation_scoring():
    assert answer_score("done", "done", "generation", generation_ok=True) == 1.0
    assert answer_score("done", "done", "generation", generation_ok=False) == 0.0
    # Step-mode fallback: normalized answer equality.
    assert answer_score("Done ", "done", "generation") == 1.0
    assert answer_score("nope", "done", "generation") == 0.0


def test_extract_first_number():
    assert extract_first_number("Mean distance 2314.59 m") == 2314.59
    assert extract_first_number("-4e-2 rise") == -0.04
    with pytest.raises(NoNumberFound):
        extract_first_number("none")


def test_generation_tools_cover_the_render_surface(registry):
    for name in GENERATION_TOOLS:
        assert name in registry


# error_taxonomy ---------------------------------------------------------------


def test_error_taxonomy_counts_crafted_outputs(registry, fixture_store, tmp_path):
    from geoagent.corpus import TaskInstance
    from geoagent.orchestrator import SessionConfig, run

    class ListPolicy:
        def __init__(self, texts):
            self.texts = list(texts)
            self.i = 0

        def next_action(self, memory):
            text = self.texts[min(self.i, len(self.texts) - 1)]
            self.i += 1
            return text

    def run_with(texts, task_id):
        task = TaskInstance(
            id=task_id, domain="urban", modality="rgb", query="q", inputs=(),
        )
        return run(
            ListPolicy(texts), task, registry, SessionConfig(),
            fixtures=fixture_store, workspace=tmp_path / task_id,
        ).stats

    terminate = '```action\n{"tool": "Terminate", "args": {"answer": "42"}}\n```'
    bad_json = "x\n```action\n{oops}\n```"
    two_calls = terminate + "\n" + terminate

    stats = [
        # 3 NoAction outputs (after the allowance is consumed), then abort.
        run_with(["plan", "prose", "prose", "prose"], "r1"),
        # 3 WrongFormat outputs, then abort.
        run_with([bad_json, bad_json, bad_json], "r2"),
        # 3 MultipleCalls outputs, then abort.
        run_with([two_calls, two_calls, two_calls], "r3"),
        # 3 immediate answers without any prior tool call.
        run_with([terminate], "r4"),
        run_with([terminate], "r5"),
        run_with([terminate], "r6"),
    ]
    counts = error_taxonomy(stats)
    assert counts.to_dict() == {
        "no_action": 3,
        "wrong_format": 3,
        "answer_without_tool": 3,
        "multiple_calls": 3,
    }


def test_error_taxonomy_clean_run_is_all_zero(
    golden_corpus, registry, fixture_store, fixture_tree, tmp_path
):
    from geoagent.orchestrator import SessionConfig, run
    from geoagent.policy import ScriptedPolicy

    record = golden_corpus[0]
    stats = run(
        ScriptedPolicy(record), record.task, registry, SessionConfig(),
        fixtures=fixture_store, workspace=tmp_path, fixtures_root=fixture_tree,
    ).stats
    assert error_taxonomy([stats]).to_dict() == {
        "no_action": 0,
        "wrong_format": 0,
        "answer_without_tool": 0,
        "multiple_calls": 0,
    }


# stepwise ---------------------------------------------------------------------


def test_stepwise_identity_scores_perfect(golden_corpus, registry):
    from geoagent.policy import ScriptedPolicy

    record = golden_corpus[0]
    slice_ = stepwise_eval(ScriptedPolicy(record), record, registry)
    assert all(
        s.inst and s.tool and s.argn and s.argv for s in slice_.scores
    )
    assert slice_.summ == 1.0
    report = aggregate_stepwise([slice_])
    assert (report.inst, report.tool, report.argn, report.argv, report.summ) == (
        100.0, 100.0, 100.0, 100.0, 100.0,
    )


def test_stepwise_single_argv_slip(golden_corpus, registry):
    from geoagent.policy import ScriptedPolicy

    record = golden_corpus[0]

    class SlipPolicy(ScriptedPolicy):
        """Corrupts one argument value at one scored step."""

        def __init__(self, rec, slip_at):
            super().__init__(rec)
            self.slip_at = slip_at
            self.turn = 0

        def next_action(self, memory):
            from geoagent.orchestrator import parse_action, render_action_text

            self.turn += 1
            text = super().next_action(memory)
            if self.turn == self.slip_at:
                action = parse_action(text, self.turn, allowance_used=True)
                args = dict(action.call.args)
                key = sorted(args)[0]
                args[key] = "corrupted_value_xyz"
                from geoagent.orchestrator import Action, ToolCall

                return render_action_text(
                    Action(action.thought, ToolCall(action.call.tool, args))
                )
            return text

    # Slip at step 3 (a scored, non-exempt step with string args).
    slice_ = stepwise_eval(SlipPolicy(record, 3), record, registry)
    n = len(slice_.scores)
    argv_true = sum(1 for s in slice_.scores if s.argv)
    assert argv_true == n - 1
    assert all(s.inst and s.tool for s in slice_.scores)


def test_stepwise_recovers_after_bad_step(golden_corpus, registry):
    from geoagent.policy import ScriptedPolicy

    record = golden_corpus[0]

    class MuteAtThree(ScriptedPolicy):
        def __init__(self, rec):
            super().__init__(rec)
            self.turn = 0

        def next_action(self, memory):
            self.turn += 1
            text = super().next_action(memory)
            if self.turn == 3:
                return ""  # no action at step 3
            return text

    slice_ = stepwise_eval(MuteAtThree(record), record, registry)
    scored = slice_.scores
    # Step 3 is the second scored step (step 1 is thought-only, step 2 first
    # scored): all false there, later steps still perfect.
    assert not scored[1].inst
    assert all(s.argv for i, s in enumerate(scored) if i != 1)


def test_e2e_parallel_workers_match_sequential(
    golden_corpus, registry, fixture_store, fixture_tree, category_map, tmp_path
):
    from geoagent.canonical import canonical_dumps
    from geoagent.evaluator import e2e_eval
    from geoagent.orchestrator import SessionConfig
    from geoagent.policy import ScriptedPolicy

    def report_with(workers, subdir):
        return e2e_eval(
            lambda gold: ScriptedPolicy(gold),
            golden_corpus[:8],
            registry,
            SessionConfig(),
            category_map,
            fixtures=fixture_store,
            workspace=tmp_path / subdir,
            fixtures_root=fixture_tree,
            workers=workers,
        )

    sequential = report_with(1, "seq")
    parallel = report_with(4, "par")
    assert canonical_dumps(sequential.to_dict()) == canonical_dumps(
        parallel.to_dict()
    )


# Property: the ladder holds on random calls -----------------------------------

_names = st.sampled_from(["Calculator", "Terminate", "GetAreaBoundary"])
_args = st.dictionaries(
    st.sampled_from(["expression", "answer", "place", "buffer_m"]),
    st.one_of(st.text(max_size=5), st.integers(-5, 5)),
    max_size=3,
)


_LADDER_REGISTRY = None


def _ladder_registry():
    global _LADDER_REGISTRY
    if _LADDER_REGISTRY is None:
        from geoagent.defaults import default_registry

        _LADDER_REGISTRY = default_registry()
    return _LADDER_REGISTRY


@given(
    pred_name=_names, pred_args=_args, gold_name=_names, gold_args=_args,
    step_index=st.integers(1, 6),
)
def test_step_scores_ladder_property(
    pred_name, pred_args, gold_name, gold_args, step_index
):
    registry = _ladder_registry()
    pred = Action("p", ToolCall(pred_name, pred_args))
    gold = Action("g", ToolCall(gold_name, gold_args))
    scores = score_step(pred, gold, step_index, registry)
    assert not (scores.tool and not scores.inst)
    assert not (scores.argn and not scores.tool)
    assert not (scores.argv and not scores.argn)
    assert scores.exempt == (step_index == 1)

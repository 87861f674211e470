"""Metric suite: step-by-step scoring, end-to-end fidelity, error taxonomy.

Step mode is teacher-forced: at step t the policy sees the gold prefix
and its output is scored against gold step t on a monotone ladder
(Inst >= Tool >= ArgN >= ArgV), with the first step exempt. End-to-end
mode runs tasks live and scores tool-category F1, order fidelity
(Unique / AnyOrder / SameOrder), answer accuracy (+/-10% numeric band,
IoU for boxes, judge for text), and the four-way format-error taxonomy.

Aggregation: micro-average over scored steps for Inst/Tool/ArgN/ArgV;
macro-average over tasks for Summ, F1, order, and accuracies.
"""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .corpus import TrajectoryRecord
from .geotools.perception import FixtureStore
from .judge import AnswerJudge, JudgeUnavailable
from .orchestrator import (
    Action,
    FormatError,
    FormatErrorKind,
    PolicyFailure,
    RunStats,
    RunStatus,
    SessionConfig,
    Turn,
    WorkingMemory,
    parse_action,
    run,
)
from .policy import Policy
from .registry import ToolCategory, ToolRegistry, validate_call

logger = logging.getLogger(__name__)

NUMERIC_REL_TOLERANCE = 0.10
NUMERIC_ZERO_ABS_TOLERANCE = 1e-9
# Float-safe slack so gold*(1.1) lands inside the band and
# gold*(1.1 + 1e-6) stays outside.
_BAND_SLACK = 1e-9
IOU_THRESHOLD = 0.5
ARGV_REL_TOLERANCE = 1e-3

# Tools whose calls count as image generation for Gen. accuracy.
GENERATION_TOOLS = frozenset(
    {"DrawBox", "AddText", "Plot", "DisplayOnMap", "ShowIndexLayer", "DisplayOnGeotiff"}
)

_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


class NoNumberFound(ValueError):
    """An answer supposed to be numeric contains no number."""


# ---------------------------------------------------------------------------
# Step-by-step scoring
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class StepScores:
    """Monotone ladder: argv => argn => tool => inst."""

    inst: bool
    tool: bool
    argn: bool
    argv: bool
    exempt: bool = False

    def __post_init__(self) -> None:
        assert not (self.tool and not self.inst)
        assert not (self.argn and not self.tool)
        assert not (self.argv and not self.argn)


def _normalized_string(value: str) -> str:
    return value.strip().casefold()


def _values_match(pred: Any, gold: Any) -> bool:
    """ArgV normalization: tolerant numbers, loose strings, paths by tail."""
    if isinstance(pred, bool) or isinstance(gold, bool):
        return pred is gold
    if isinstance(pred, (int, float)) and isinstance(gold, (int, float)):
        if pred == gold:
            return True
        denom = max(abs(pred), abs(gold))
        return denom > 0 and abs(pred - gold) / denom <= ARGV_REL_TOLERANCE
    if isinstance(pred, str) and isinstance(gold, str):
        a, b = _normalized_string(pred), _normalized_string(gold)
        if a == b:
            return True
        if "/" in pred or "/" in gold:
            return a.rsplit("/", 1)[-1] == b.rsplit("/", 1)[-1]
        return False
    if isinstance(pred, list) and isinstance(gold, list):
        return len(pred) == len(gold) and all(
            _values_match(p, g) for p, g in zip(pred, gold)
        )
    if isinstance(pred, Mapping) and isinstance(gold, Mapping):
        return set(pred) == set(gold) and all(
            _values_match(pred[k], gold[k]) for k in gold
        )
    return pred == gold


def score_step(
    pred: Action | FormatError,
    gold: Action,
    step_index: int,
    registry: ToolRegistry,
) -> StepScores:
    """Score one predicted step against the gold step.

    inst: the prediction parsed into a schema-valid call; tool: names
    match; argn: every required param of the gold tool and every param
    named in gold is present; argv: all params shared with gold match
    under normalization. Step 1 is exempt from aggregation.
    """
    exempt = step_index == 1
    if isinstance(pred, FormatError) or pred.call is None:
        return StepScores(False, False, False, False, exempt)
    report = validate_call(registry, pred.call.tool, pred.call.args)
    inst = report.ok
    if not inst:
        return StepScores(False, False, False, False, exempt)

    assert gold.call is not None, "gold step must carry a call"
    tool = pred.call.tool == gold.call.tool
    if not tool:
        return StepScores(True, False, False, False, exempt)

    descriptor = registry.get(gold.call.tool)
    required = {p.name for p in descriptor.required_params} if descriptor else set()
    needed = required | set(gold.call.args)
    argn = needed <= set(pred.call.args)
    if not argn:
        return StepScores(True, True, False, False, exempt)

    shared = set(pred.call.args) & set(gold.call.args)
    argv = all(
        _values_match(pred.call.args[name], gold.call.args[name]) for name in shared
    )
    return StepScores(True, True, True, argv, exempt)


@dataclass(slots=True)
class StepwiseSlice:
    """Per-record teacher-forcing result."""

    record_id: str
    scores: list[StepScores] = field(default_factory=list)
    summ: float | None = None  # None when the answer kind needs a judge
    format_errors: list[FormatErrorKind] = field(default_factory=list)


def _memory_from_gold_prefix(
    record: TrajectoryRecord, upto: int
) -> WorkingMemory:
    """Working memory holding gold steps [0, upto), seeded like a live
    session (CRS and GSD metadata)."""
    memory = WorkingMemory(
        instruction=record.task.query,
        inputs=[dict(e) for e in record.task.inputs],
    )
    memory.metadata["crs"] = "EPSG:4326"
    for entry in memory.inputs:
        if entry.get("gsd_m_per_px") is not None:
            memory.metadata["gsd_m_per_px"] = entry["gsd_m_per_px"]
            break
    for step in record.steps[:upto]:
        action = Action(thought=step.thought, call=step.action)
        memory.transcript.append(Turn(action=action, observation=step.observation))
    return memory


def stepwise_eval(
    policy: Policy,
    gold: TrajectoryRecord,
    registry: ToolRegistry,
    *,
    judge: AnswerJudge | None = None,
) -> StepwiseSlice:
    """Teacher-forced scoring of one record; no tools execute.

    At each gold step the policy is conditioned on the gold prefix, so a
    bad step does not poison later ones. Summ scores the final answer the
    policy produces at the Terminate step given the full gold transcript.
    """
    slice_ = StepwiseSlice(record_id=gold.task.id)
    allowance_spent = False
    pred_final_answer: str | None = None

    for index, gold_step in enumerate(gold.steps, start=1):
        memory = _memory_from_gold_prefix(gold, index - 1)
        text = policy.next_action(memory)
        pred = parse_action(text, index, allowance_used=allowance_spent)
        if isinstance(pred, FormatError):
            slice_.format_errors.append(pred.kind)
        elif pred.call is None:
            allowance_spent = True
        if gold_step.action is None:
            # Thought-only gold step (the planning turn): nothing to score.
            continue
        gold_action = Action(thought=gold_step.thought, call=gold_step.action)
        slice_.scores.append(score_step(pred, gold_action, index, registry))
        if (
            index == len(gold.steps)
            and not isinstance(pred, FormatError)
            and pred.call is not None
            and pred.call.tool == "Terminate"
        ):
            answer = pred.call.args.get("answer")
            pred_final_answer = answer if isinstance(answer, str) else ""

    try:
        slice_.summ = answer_score(
            pred_final_answer or "",
            gold.final_answer,
            gold.answer_kind,
            judge=judge,
        )
    except JudgeUnavailable:
        slice_.summ = None
    return slice_


@dataclass(frozen=True, slots=True)
class StepwiseReport:
    inst: float
    tool: float
    argn: float
    argv: float
    summ: float
    n_scored_steps: int
    n_tasks: int
    n_summ_skipped: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "inst": self.inst,
            "tool": self.tool,
            "argn": self.argn,
            "argv": self.argv,
            "summ": self.summ,
            "n_scored_steps": self.n_scored_steps,
            "n_tasks": self.n_tasks,
            "n_summ_skipped": self.n_summ_skipped,
        }


def aggregate_stepwise(slices: Sequence[StepwiseSlice]) -> StepwiseReport:
    """Micro-average the ladder over scored steps; macro-average Summ."""
    scored = [s for slice_ in slices for s in slice_.scores if not s.exempt]
    n = len(scored)

    def pct(selector: Callable[[StepScores], bool]) -> float:
        return 100.0 * sum(1 for s in scored if selector(s)) / n if n else 0.0

    summs = [slice_.summ for slice_ in slices if slice_.summ is not None]
    return StepwiseReport(
        inst=pct(lambda s: s.inst),
        tool=pct(lambda s: s.tool),
        argn=pct(lambda s: s.argn),
        argv=pct(lambda s: s.argv),
        summ=100.0 * sum(summs) / len(summs) if summs else 0.0,
        n_scored_steps=n,
        n_tasks=len(slices),
        n_summ_skipped=sum(1 for slice_ in slices if slice_.summ is None),
    )


# ---------------------------------------------------------------------------
# Tool-order and category metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class OrderVerdict:
    """same_order => any_order => unique."""

    any_order: bool
    same_order: bool
    unique: bool

    def __post_init__(self) -> None:
        assert not (self.same_order and not self.any_order)
        assert not (self.any_order and not self.unique)


def order_metrics(pred_seq: Sequence[str], ref_seq: Sequence[str]) -> OrderVerdict:
    """unique: set match; any_order: multiset match; same_order: exact."""
    unique = set(pred_seq) == set(ref_seq)
    any_order = Counter(pred_seq) == Counter(ref_seq)
    same_order = list(pred_seq) == list(ref_seq)
    return OrderVerdict(any_order=any_order, same_order=same_order, unique=unique)


@dataclass(frozen=True, slots=True)
class CategoryF1:
    """Per-category F1 with applicability (False when both sides empty)."""

    f1: Mapping[str, float]
    applicable: Mapping[str, bool]
    unmapped_pred: int
    unmapped_ref: int


def category_f1(
    pred_tools: Sequence[str],
    ref_tools: Sequence[str],
    mapping: Mapping[str, ToolCategory],
    *,
    set_mode: bool = False,
) -> CategoryF1:
    """Multiset F1 per functional category (set_mode collapses counts).

    tp is the multiset-intersection size; empty-vs-empty scores 1 and is
    flagged inapplicable so task averaging can exclude it; tools missing
    from the mapping land in the unmapped buckets.
    """
    def project(tools: Sequence[str]) -> tuple[dict[ToolCategory, Counter], int]:
        per_category: dict[ToolCategory, Counter] = {c: Counter() for c in ToolCategory}
        unmapped = 0
        source: Iterable[str] = set(tools) if set_mode else tools
        for name in source:
            category = mapping.get(name)
            if category is None:
                unmapped += 1
            else:
                per_category[category][name] += 1
        return per_category, unmapped

    pred_by_cat, unmapped_pred = project(pred_tools)
    ref_by_cat, unmapped_ref = project(ref_tools)

    f1: dict[str, float] = {}
    applicable: dict[str, bool] = {}
    for category in ToolCategory:
        pred_counter = pred_by_cat[category]
        ref_counter = ref_by_cat[category]
        n_pred = sum(pred_counter.values())
        n_ref = sum(ref_counter.values())
        if n_pred == 0 and n_ref == 0:
            f1[category.value] = 1.0
            applicable[category.value] = False
            continue
        applicable[category.value] = True
        tp = sum((pred_counter & ref_counter).values())
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_ref if n_ref else 0.0
        f1[category.value] = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
    return CategoryF1(
        f1=f1,
        applicable=applicable,
        unmapped_pred=unmapped_pred,
        unmapped_ref=unmapped_ref,
    )


# ---------------------------------------------------------------------------
# Answer scoring
# ---------------------------------------------------------------------------


def extract_first_number(text: str) -> float:
    match = _NUMBER_RE.search(text or "")
    if not match:
        raise NoNumberFound(f"no number in {text!r}")
    return float(match.group(0))


def _extract_box(text: str) -> list[float]:
    numbers = _NUMBER_RE.findall(text or "")
    if len(numbers) < 4:
        raise NoNumberFound(f"no box (4 numbers) in {text!r}")
    return [float(v) for v in numbers[:4]]


def box_iou(a: Sequence[float], b: Sequence[float]) -> float:
    ax1, ay1, ax2, ay2 = a
    bx1, by1, bx2, by2 = b
    inter_w = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    inter_h = max(0.0, min(ay2, by2) - max(ay1, by1))
    inter = inter_w * inter_h
    area_a = max(0.0, ax2 - ax1) * max(0.0, ay2 - ay1)
    area_b = max(0.0, bx2 - bx1) * max(0.0, by2 - by1)
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def answer_score(
    pred: str,
    gold: str,
    kind: str,
    *,
    judge: AnswerJudge | None = None,
    generation_ok: bool | None = None,
    iou_threshold: float = IOU_THRESHOLD,
) -> float:
    """Score a final answer in [0, 1] per answer kind.

    numeric: first numbers compared at a boundary-inclusive +/-10% band
    (absolute 1e-9 when gold is 0). bbox: IoU >= threshold. text:
    delegated to the judge. generation: the supplied execution success,
    falling back to normalized answer equality when none is given (step
    mode). Empty predictions score 0.
    """
    if kind == "generation":
        if generation_ok is not None:
            return 1.0 if generation_ok else 0.0
        return 1.0 if _normalized_string(pred) == _normalized_string(gold) else 0.0
    if not pred or not pred.strip():
        return 0.0
    if kind == "numeric":
        try:
            gold_value = extract_first_number(gold)
            pred_value = extract_first_number(pred)
        except NoNumberFound as exc:
            logger.warning("numeric answer without a number: %s", exc)
            return 0.0
        if gold_value == 0.0:
            return 1.0 if abs(pred_value) <= NUMERIC_ZERO_ABS_TOLERANCE else 0.0
        band = NUMERIC_REL_TOLERANCE * abs(gold_value) * (1.0 + _BAND_SLACK)
        return 1.0 if abs(pred_value - gold_value) <= band else 0.0
    if kind == "bbox":
        try:
            gold_box = _extract_box(gold)
            pred_box = _extract_box(pred)
        except NoNumberFound as exc:
            logger.warning("bbox answer without a box: %s", exc)
            return 0.0
        return 1.0 if box_iou(pred_box, gold_box) >= iou_threshold else 0.0
    if kind == "text":
        if judge is None:
            raise JudgeUnavailable("text answers need a configured judge")
        return judge.score(pred, gold, "")
    raise ValueError(f"unknown answer kind {kind!r}")


# ---------------------------------------------------------------------------
# Error taxonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ErrorCounts:
    no_action: int = 0
    wrong_format: int = 0
    answer_without_tool: int = 0
    multiple_calls: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "no_action": self.no_action,
            "wrong_format": self.wrong_format,
            "answer_without_tool": self.answer_without_tool,
            "multiple_calls": self.multiple_calls,
        }


def error_taxonomy(run_stats: Iterable[RunStats]) -> ErrorCounts:
    """Tally the four failure classes across run logs."""
    no_action = wrong_format = multiple_calls = answer_without_tool = 0
    for stats in run_stats:
        for _, kind in stats.format_errors:
            if kind is FormatErrorKind.NO_ACTION:
                no_action += 1
            elif kind is FormatErrorKind.WRONG_FORMAT:
                wrong_format += 1
            elif kind is FormatErrorKind.MULTIPLE_CALLS:
                multiple_calls += 1
        if stats.answer_without_tool:
            answer_without_tool += 1
    return ErrorCounts(
        no_action=no_action,
        wrong_format=wrong_format,
        answer_without_tool=answer_without_tool,
        multiple_calls=multiple_calls,
    )


# ---------------------------------------------------------------------------
# End-to-end evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class E2EReport:
    f1_per: float
    f1_op: float
    f1_logic: float
    f1_gis: float
    any_order: float
    same_order: float
    unique: float
    answer_acc: float
    gen_acc: float
    n_tasks: int
    n_answer_tasks: int
    n_gen_tasks: int
    n_text_skipped: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "f1_per": self.f1_per,
            "f1_op": self.f1_op,
            "f1_logic": self.f1_logic,
            "f1_gis": self.f1_gis,
            "any_order": self.any_order,
            "same_order": self.same_order,
            "unique": self.unique,
            "answer_acc": self.answer_acc,
            "gen_acc": self.gen_acc,
            "n_tasks": self.n_tasks,
            "n_answer_tasks": self.n_answer_tasks,
            "n_gen_tasks": self.n_gen_tasks,
            "n_text_skipped": self.n_text_skipped,
        }


@dataclass(frozen=True, slots=True)
class CallStats:
    total_calls: int
    failed_calls: int
    incomplete_runs: float  # percentage of tasks that did not complete

    def to_dict(self) -> dict[str, Any]:
        return {
            "total_calls": self.total_calls,
            "failed_calls": self.failed_calls,
            "incomplete_runs": self.incomplete_runs,
        }


@dataclass(frozen=True, slots=True)
class EvalReport:
    stepwise: StepwiseReport | None
    e2e: E2EReport | None
    errors: ErrorCounts
    call_stats: CallStats | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "stepwise": self.stepwise.to_dict() if self.stepwise else None,
            "e2e": self.e2e.to_dict() if self.e2e else None,
            "errors": self.errors.to_dict(),
            "call_stats": self.call_stats.to_dict() if self.call_stats else None,
        }


PolicyFactory = Callable[[TrajectoryRecord], Policy]


@dataclass(slots=True)
class _TaskOutcome:
    record_id: str
    f1: CategoryF1 | None = None
    order: OrderVerdict | None = None
    answer: float | None = None
    generation: float | None = None
    text_skipped: bool = False
    incomplete: bool = False
    stats: RunStats | None = None
    policy_failure: str | None = None


def evaluate_run_record(
    pred_record: TrajectoryRecord,
    gold: TrajectoryRecord,
    mapping: Mapping[str, ToolCategory],
    stats: RunStats,
    status: RunStatus,
    *,
    judge: AnswerJudge | None = None,
    set_mode: bool = False,
) -> _TaskOutcome:
    """Score one finished run against its gold record."""
    outcome = _TaskOutcome(record_id=gold.task.id, stats=stats)
    pred_tools = pred_record.tool_sequence()
    ref_tools = gold.tool_sequence()
    outcome.f1 = category_f1(pred_tools, ref_tools, mapping, set_mode=set_mode)
    outcome.order = order_metrics(pred_tools, ref_tools)
    outcome.incomplete = status is not RunStatus.COMPLETED

    if gold.answer_kind == "generation":
        generation_calls = [
            step
            for step in pred_record.steps
            if step.action is not None and step.action.tool in GENERATION_TOOLS
        ]
        generation_ok = bool(generation_calls) and all(
            step.observation is not None and step.observation.ok
            for step in generation_calls
        )
        outcome.generation = answer_score(
            pred_record.final_answer,
            gold.final_answer,
            "generation",
            generation_ok=generation_ok and not outcome.incomplete,
        )
        return outcome

    try:
        outcome.answer = answer_score(
            pred_record.final_answer, gold.final_answer, gold.answer_kind, judge=judge
        )
    except JudgeUnavailable:
        outcome.text_skipped = True
    return outcome


def e2e_eval(
    policy_factory: PolicyFactory,
    golds: Sequence[TrajectoryRecord],
    registry: ToolRegistry,
    config: SessionConfig,
    mapping: Mapping[str, ToolCategory],
    *,
    fixtures: FixtureStore,
    workspace: str | Path,
    fixtures_root: str | Path | None = None,
    judge: AnswerJudge | None = None,
    set_mode: bool = False,
    workers: int = 1,
) -> EvalReport:
    """Run every task live and aggregate the end-to-end metric suite.

    Policy failures are recorded per task, not fatal. Aggregation is a
    deterministic reduction ordered by task id.
    """
    ordered = sorted(golds, key=lambda r: r.task.id)

    def evaluate_one(gold: TrajectoryRecord) -> _TaskOutcome:
        task_workspace = Path(workspace) / gold.task.id
        try:
            result = run(
                policy_factory(gold),
                gold.task,
                registry,
                config,
                fixtures=fixtures,
                workspace=task_workspace,
                fixtures_root=fixtures_root,
            )
        except PolicyFailure as exc:
            logger.warning("task %s: policy failure: %s", gold.task.id, exc)
            outcome = _TaskOutcome(record_id=gold.task.id, policy_failure=str(exc))
            outcome.incomplete = True
            outcome.f1 = category_f1([], gold.tool_sequence(), mapping)
            outcome.order = order_metrics([], gold.tool_sequence())
            if gold.answer_kind == "generation":
                outcome.generation = 0.0
            else:
                outcome.answer = 0.0
            outcome.stats = RunStats()
            return outcome
        return evaluate_run_record(
            result.record,
            gold,
            mapping,
            result.stats,
            result.outcome.status,
            judge=judge,
            set_mode=set_mode,
        )

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(evaluate_one, ordered))
    else:
        outcomes = [evaluate_one(gold) for gold in ordered]

    return _aggregate_e2e(outcomes)


def _mean_pct(values: Sequence[float]) -> float:
    return 100.0 * sum(values) / len(values) if values else 0.0


def _aggregate_e2e(outcomes: Sequence[_TaskOutcome]) -> EvalReport:
    per_category: dict[str, list[float]] = {c.value: [] for c in ToolCategory}
    for outcome in outcomes:
        assert outcome.f1 is not None
        for category, value in outcome.f1.f1.items():
            if outcome.f1.applicable[category]:
                per_category[category].append(value)

    def category_pct(name: str) -> float:
        values = per_category[name]
        # No applicable task: vacuously perfect by the empty/empty rule.
        return _mean_pct(values) if values else 100.0

    orders = [o.order for o in outcomes if o.order is not None]
    answers = [o.answer for o in outcomes if o.answer is not None]
    generations = [o.generation for o in outcomes if o.generation is not None]

    e2e = E2EReport(
        f1_per=category_pct("perception"),
        f1_op=category_pct("operation"),
        f1_logic=category_pct("logic"),
        f1_gis=category_pct("gis"),
        any_order=_mean_pct([1.0 if o.any_order else 0.0 for o in orders]),
        same_order=_mean_pct([1.0 if o.same_order else 0.0 for o in orders]),
        unique=_mean_pct([1.0 if o.unique else 0.0 for o in orders]),
        answer_acc=_mean_pct(answers),
        gen_acc=_mean_pct(generations),
        n_tasks=len(outcomes),
        n_answer_tasks=len(answers),
        n_gen_tasks=len(generations),
        n_text_skipped=sum(1 for o in outcomes if o.text_skipped),
    )
    all_stats = [o.stats for o in outcomes if o.stats is not None]
    call_stats = CallStats(
        total_calls=sum(s.total_calls for s in all_stats),
        failed_calls=sum(s.failed_calls for s in all_stats),
        incomplete_runs=_mean_pct(
            [1.0 if o.incomplete else 0.0 for o in outcomes]
        ),
    )
    return EvalReport(
        stepwise=None,
        e2e=e2e,
        errors=error_taxonomy(all_stats),
        call_stats=call_stats,
    )


def stepwise_corpus_eval(
    policy_factory: PolicyFactory,
    golds: Sequence[TrajectoryRecord],
    registry: ToolRegistry,
    *,
    judge: AnswerJudge | None = None,
) -> EvalReport:
    """Teacher-forced evaluation over a corpus, one policy per record."""
    ordered = sorted(golds, key=lambda r: r.task.id)
    slices = [
        stepwise_eval(policy_factory(gold), gold, registry, judge=judge)
        for gold in ordered
    ]
    counts = Counter(kind for slice_ in slices for kind in slice_.format_errors)
    errors = ErrorCounts(
        no_action=counts.get(FormatErrorKind.NO_ACTION, 0),
        wrong_format=counts.get(FormatErrorKind.WRONG_FORMAT, 0),
        answer_without_tool=0,
        multiple_calls=counts.get(FormatErrorKind.MULTIPLE_CALLS, 0),
    )
    return EvalReport(
        stepwise=aggregate_stepwise(slices),
        e2e=None,
        errors=errors,
        call_stats=None,
    )

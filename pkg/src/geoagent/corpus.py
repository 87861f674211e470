"""Task and trajectory data model with a line-oriented disk format.

A corpus file holds one canonical-JSON record per line, so large corpora
stream and diff cleanly. Loading validates the schema and the structural
invariants; loaded records are immutable values, safe to share across
parallel workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from .canonical import canonical_dumps
from .orchestrator import Observation, ToolCall, Turn
from .registry import ToolRegistry

DOMAINS = frozenset(
    {
        "urban",
        "disaster",
        "environment",
        "transportation",
        "aviation",
        "recreation",
        "industrial",
    }
)
MODALITIES = frozenset({"rgb", "sar", "cd_pair", "gis", "index"})
ANSWER_KINDS = frozenset({"numeric", "bbox", "text", "generation"})
TERMINATE_TOOL = "Terminate"


class CorpusError(Exception):
    pass


class ParseError(CorpusError):
    def __init__(self, line: int, detail: str) -> None:
        super().__init__(f"line {line}: {detail}")
        self.line = line


class SchemaViolation(CorpusError):
    def __init__(self, record_id: str, field_path: str, detail: str) -> None:
        super().__init__(f"record {record_id!r}, field {field_path}: {detail}")
        self.record_id = record_id
        self.field = field_path


@dataclass(frozen=True, slots=True)
class TaskInstance:
    """One benchmark task: a query over image and/or geo-bundle inputs."""

    id: str
    domain: str
    modality: str
    query: str
    inputs: tuple[Mapping[str, Any], ...] = ()

    def __post_init__(self) -> None:
        if self.domain not in DOMAINS:
            raise SchemaViolation(self.id, "domain", f"unknown domain {self.domain!r}")
        if self.modality not in MODALITIES:
            raise SchemaViolation(
                self.id, "modality", f"unknown modality {self.modality!r}"
            )
        for i, entry in enumerate(self.inputs):
            if entry.get("kind") not in ("image", "geo_bundle"):
                raise SchemaViolation(
                    self.id, f"inputs[{i}].kind", f"unknown kind {entry.get('kind')!r}"
                )
            if "path" not in entry:
                raise SchemaViolation(self.id, f"inputs[{i}].path", "missing path")
            gsd = entry.get("gsd_m_per_px")
            if gsd is not None and gsd <= 0:
                raise SchemaViolation(
                    self.id, f"inputs[{i}].gsd_m_per_px", "gsd must be positive"
                )


@dataclass(frozen=True, slots=True)
class RecordStep:
    """One trajectory step; action/observation absent on thought-only steps."""

    thought: str
    action: ToolCall | None = None
    observation: Observation | None = None


@dataclass(frozen=True, slots=True)
class TrajectoryRecord:
    """A task plus its ordered steps and final answer."""

    task: TaskInstance
    steps: tuple[RecordStep, ...]
    final_answer: str
    answer_kind: str

    def __post_init__(self) -> None:
        if self.answer_kind not in ANSWER_KINDS:
            raise SchemaViolation(
                self.task.id, "answer_kind", f"unknown kind {self.answer_kind!r}"
            )
        for i, step in enumerate(self.steps):
            if (step.action is None) != (step.observation is None):
                raise SchemaViolation(
                    self.task.id,
                    f"steps[{i}]",
                    "non-thought-only steps need both action and observation",
                )
        if self.final_answer:
            if not self.steps or self.steps[-1].action is None:
                raise SchemaViolation(
                    self.task.id, "steps", "completed record must end in Terminate"
                )
            if self.steps[-1].action.tool != TERMINATE_TOOL:
                raise SchemaViolation(
                    self.task.id,
                    "steps",
                    f"completed record ends in {self.steps[-1].action.tool!r}, "
                    f"expected {TERMINATE_TOOL}",
                )

    @property
    def completed(self) -> bool:
        return bool(
            self.steps
            and self.steps[-1].action is not None
            and self.steps[-1].action.tool == TERMINATE_TOOL
        )

    def tool_sequence(self) -> list[str]:
        return [s.action.tool for s in self.steps if s.action is not None]


@dataclass(frozen=True, slots=True)
class CorpusStats:
    n_instances: int
    n_steps: int
    avg_steps: float
    by_domain: Mapping[str, int]
    by_modality: Mapping[str, int]
    by_tool: Mapping[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_instances": self.n_instances,
            "n_steps": self.n_steps,
            "avg_steps": self.avg_steps,
            "by_domain": dict(self.by_domain),
            "by_modality": dict(self.by_modality),
            "by_tool": dict(self.by_tool),
        }


def record_to_dict(record: TrajectoryRecord) -> dict[str, Any]:
    steps = []
    for step in record.steps:
        entry: dict[str, Any] = {"thought": step.thought}
        if step.action is not None:
            entry["action"] = step.action.to_dict()
        if step.observation is not None:
            entry["observation"] = step.observation.to_dict()
        steps.append(entry)
    return {
        "id": record.task.id,
        "domain": record.task.domain,
        "modality": record.task.modality,
        "query": record.task.query,
        "inputs": [dict(e) for e in record.task.inputs],
        "steps": steps,
        "final_answer": record.final_answer,
        "answer_kind": record.answer_kind,
    }


def record_from_dict(data: Mapping[str, Any]) -> TrajectoryRecord:
    record_id = str(data.get("id", "?"))
    for key in ("id", "domain", "modality", "query", "steps", "final_answer",
                "answer_kind"):
        if key not in data:
            raise SchemaViolation(record_id, key, "missing required field")
    task = TaskInstance(
        id=data["id"],
        domain=data["domain"],
        modality=data["modality"],
        query=data["query"],
        inputs=tuple(dict(e) for e in data.get("inputs", [])),
    )
    steps = []
    for i, entry in enumerate(data["steps"]):
        if "thought" not in entry:
            raise SchemaViolation(record_id, f"steps[{i}].thought", "missing thought")
        action = None
        if entry.get("action") is not None:
            raw = entry["action"]
            if not isinstance(raw.get("tool"), str) or not isinstance(
                raw.get("args"), dict
            ):
                raise SchemaViolation(
                    record_id, f"steps[{i}].action", "action needs tool and args"
                )
            action = ToolCall(tool=raw["tool"], args=dict(raw["args"]))
        observation = None
        if entry.get("observation") is not None:
            try:
                observation = Observation.from_dict(entry["observation"])
            except (KeyError, AssertionError) as exc:
                raise SchemaViolation(
                    record_id, f"steps[{i}].observation", f"malformed: {exc}"
                ) from None
        steps.append(
            RecordStep(thought=entry["thought"], action=action, observation=observation)
        )
    return TrajectoryRecord(
        task=task,
        steps=tuple(steps),
        final_answer=data["final_answer"],
        answer_kind=data["answer_kind"],
    )


def record_from_transcript(
    task: TaskInstance,
    transcript: Sequence[Turn],
    final_answer: str,
    answer_kind: str | None = None,
) -> TrajectoryRecord:
    """Build a record from a live session transcript."""
    steps = []
    for turn in transcript:
        steps.append(
            RecordStep(
                thought=turn.action.thought,
                action=turn.action.call,
                observation=turn.observation,
            )
        )
    kind = answer_kind or getattr(task, "answer_kind", None) or "text"
    return TrajectoryRecord(
        task=task, steps=tuple(steps), final_answer=final_answer, answer_kind=kind
    )


def load_corpus(path: str | Path) -> list[TrajectoryRecord]:
    """Load a JSONL corpus, validating schema and invariants.

    Raises:
        ParseError: Empty file or a line that is not a JSON object.
        SchemaViolation: A record violating the schema, with id and field.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.split("\n") if line.strip()]
    if not lines:
        raise ParseError(1, "corpus file is empty")
    records: list[TrajectoryRecord] = []
    seen_ids: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ParseError(lineno, "record line must be a JSON object")
        record = record_from_dict(data)
        if record.task.id in seen_ids:
            raise SchemaViolation(record.task.id, "id", "duplicate record id")
        seen_ids.add(record.task.id)
        records.append(record)
    return records


def save_corpus(records: Iterable[TrajectoryRecord], path: str | Path) -> None:
    """Write records as one canonical JSON object per line."""
    lines = [canonical_dumps(record_to_dict(r)) for r in records]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def dumps_corpus(records: Iterable[TrajectoryRecord]) -> str:
    return "\n".join(canonical_dumps(record_to_dict(r)) for r in records) + "\n"


def stats(records: Sequence[TrajectoryRecord]) -> CorpusStats:
    """Exact counts and histograms; avg over an empty corpus is 0."""
    n_instances = len(records)
    n_steps = sum(len(r.steps) for r in records)
    by_domain: dict[str, int] = {}
    by_modality: dict[str, int] = {}
    by_tool: dict[str, int] = {}
    for record in records:
        by_domain[record.task.domain] = by_domain.get(record.task.domain, 0) + 1
        by_modality[record.task.modality] = (
            by_modality.get(record.task.modality, 0) + 1
        )
        for tool in record.tool_sequence():
            by_tool[tool] = by_tool.get(tool, 0) + 1
    return CorpusStats(
        n_instances=n_instances,
        n_steps=n_steps,
        avg_steps=(n_steps / n_instances) if n_instances else 0.0,
        by_domain=dict(sorted(by_domain.items())),
        by_modality=dict(sorted(by_modality.items())),
        by_tool=dict(sorted(by_tool.items())),
    )


def split(
    records: Sequence[TrajectoryRecord],
    predicate: Callable[[TrajectoryRecord], bool],
) -> tuple[list[TrajectoryRecord], list[TrajectoryRecord]]:
    """Order-preserving partition into (kept, dropped)."""
    kept: list[TrajectoryRecord] = []
    dropped: list[TrajectoryRecord] = []
    for record in records:
        (kept if predicate(record) else dropped).append(record)
    return kept, dropped


def unknown_tools(
    records: Sequence[TrajectoryRecord], registry: ToolRegistry
) -> list[str]:
    """Tool names used by records but absent from the registry (warn list)."""
    names = {
        tool for record in records for tool in record.tool_sequence()
        if tool not in registry
    }
    return sorted(names)

"""Perceive-reason-act loop: parse model output, validate, execute, record.

The session owns a working memory (instruction, inputs, transcript,
spatial metadata), an execution cache keyed by canonical call
fingerprints, and a geotools execution context. Tool failures become
error observations fed back to the policy; only repeated format
violations abort a session.
"""

from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping

from .canonical import call_fingerprint, canonical_dumps
from .geotools.executors import ExecutionContext, execute
from .geotools.perception import FixtureStore
from .registry import ToolRegistry, validate_call

if TYPE_CHECKING:  # pragma: no cover
    from .corpus import TaskInstance, TrajectoryRecord
    from .policy import Policy

logger = logging.getLogger(__name__)

OBSERVATION_ECHO_LIMIT = 8192  # bytes echoed back into the prompt
MAX_CONSECUTIVE_FORMAT_ERRORS = 3

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*[ \t]*\n(.*?)```", re.DOTALL)


class PolicyFailure(Exception):
    """The policy could not produce a turn (transport error after retries)."""


@dataclass(frozen=True, slots=True)
class ToolCall:
    tool: str
    args: Mapping[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"tool": self.tool, "args": dict(self.args)}


@dataclass(frozen=True, slots=True)
class Action:
    """One model turn: a thought and at most one tool call."""

    thought: str
    call: ToolCall | None = None


class FormatErrorKind(str, Enum):
    """Model-output failure classes tallied by the error taxonomy."""

    NO_ACTION = "no_action"
    WRONG_FORMAT = "wrong_format"
    MULTIPLE_CALLS = "multiple_calls"


@dataclass(frozen=True, slots=True)
class FormatError:
    kind: FormatErrorKind
    detail: str


@dataclass(frozen=True, slots=True)
class Observation:
    """Structured environment response: exactly one of value/error."""

    ok: bool
    value: Mapping[str, Any] | None = None
    error: Mapping[str, Any] | None = None

    def __post_init__(self) -> None:
        assert (self.value is None) != (self.error is None)
        assert self.ok == (self.error is None)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"ok": self.ok}
        if self.value is not None:
            out["value"] = dict(self.value)
        if self.error is not None:
            out["error"] = dict(self.error)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Observation":
        return cls(
            ok=bool(data["ok"]),
            value=dict(data["value"]) if data.get("value") is not None else None,
            error=dict(data["error"]) if data.get("error") is not None else None,
        )


@dataclass(slots=True)
class Turn:
    """Transcript entry; observation is None only for thought-only turns."""

    action: Action
    observation: Observation | None


@dataclass(slots=True)
class WorkingMemory:
    """Per-session transcript plus instruction, inputs, and metadata."""

    instruction: str
    inputs: list[dict[str, Any]] = field(default_factory=list)
    transcript: list[Turn] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class SessionConfig:
    max_steps: int = 20
    thought_only_allowance: int = 1
    strict_validation: bool = True
    cache_enabled: bool = True

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(slots=True)
class ExecutionCache:
    """Fingerprint -> observation memo plus derived-artifact locations."""

    entries: dict[str, Observation] = field(default_factory=dict)
    derived_artifacts: dict[str, str] = field(default_factory=dict)


class RunStatus(str, Enum):
    COMPLETED = "completed"
    STEP_EXHAUSTED = "step_exhausted"
    ABORTED = "aborted"


@dataclass(frozen=True, slots=True)
class RunOutcome:
    status: RunStatus
    format_error_count: int = 0


@dataclass(slots=True)
class RunStats:
    """Per-run tallies consumed by the error taxonomy and call stats."""

    total_calls: int = 0
    failed_calls: int = 0
    successful_calls: int = 0
    executor_invocations: int = 0
    format_errors: list[tuple[int, FormatErrorKind]] = field(default_factory=list)
    answer_without_tool: bool = False
    terminated: bool = False


@dataclass(frozen=True, slots=True)
class RunResult:
    record: "TrajectoryRecord"
    outcome: RunOutcome
    stats: RunStats


def cache_fingerprint(tool: str, args: Mapping[str, Any]) -> str:
    """Digest of the tool name and canonicalized args (sorted keys,
    shortest round-trip numbers, UTF-8)."""
    return call_fingerprint(tool, dict(args))


def parse_action(
    model_text: str, step_index: int, allowance_used: bool
) -> Action | FormatError:
    """Extract the thought and the single fenced action object.

    A turn without an action block is a thought-only turn while the
    allowance is unused, and a NoAction failure afterwards. Two or more
    fenced blocks are MultipleCalls; one malformed block is WrongFormat.
    """
    text = model_text or ""
    blocks = _FENCE_RE.findall(text)
    if len(blocks) == 0:
        thought = text.strip()
        if not thought:
            return FormatError(FormatErrorKind.NO_ACTION, "empty model output")
        if allowance_used:
            return FormatError(
                FormatErrorKind.NO_ACTION,
                f"no action block at step {step_index} and the thought-only "
                "allowance is exhausted",
            )
        return Action(thought=thought, call=None)
    if len(blocks) > 1:
        return FormatError(
            FormatErrorKind.MULTIPLE_CALLS,
            f"{len(blocks)} action blocks in a single turn",
        )

    thought = text[: text.index("```")].strip()
    try:
        payload = json.loads(blocks[0])
    except json.JSONDecodeError as exc:
        return FormatError(FormatErrorKind.WRONG_FORMAT, f"action is not JSON: {exc}")
    if not isinstance(payload, dict):
        return FormatError(FormatErrorKind.WRONG_FORMAT, "action must be an object")
    extra = set(payload) - {"tool", "args"}
    if extra:
        return FormatError(
            FormatErrorKind.WRONG_FORMAT, f"unexpected action keys {sorted(extra)}"
        )
    tool = payload.get("tool")
    if not isinstance(tool, str) or not tool:
        return FormatError(FormatErrorKind.WRONG_FORMAT, "action lacks a tool name")
    args = payload.get("args", {})
    if not isinstance(args, dict):
        return FormatError(FormatErrorKind.WRONG_FORMAT, "args must be an object")
    return Action(thought=thought, call=ToolCall(tool=tool, args=args))


def render_action_text(action: Action) -> str:
    """Render an action back into the wire format the parser accepts."""
    if action.call is None:
        return action.thought
    block = canonical_dumps(action.call.to_dict())
    if action.thought:
        return f"{action.thought}\n\n```action\n{block}\n```"
    return f"```action\n{block}\n```"


def render_system_prompt(registry: ToolRegistry) -> str:
    """Fill the versioned prompt template with the registry tool list."""
    template = string.Template(
        resources.files("geoagent").joinpath("data/system_prompt.txt").read_text()
    )
    lines = []
    for desc in registry.descriptors():
        params = ", ".join(
            f"{p.name}{'' if p.required else '?'}: {p.kind}" for p in desc.params
        )
        lines.append(f"- {desc.name}({params}): {desc.description}")
    return template.substitute(tools="\n".join(lines))


def render_observation(observation: Observation, limit: int = OBSERVATION_ECHO_LIMIT) -> str:
    """Observation JSON as echoed to the policy, truncated to `limit` bytes.

    The stored trajectory keeps the full value; truncation only affects
    the prompt side.
    """
    text = canonical_dumps(observation.to_dict())
    encoded = text.encode("utf-8")
    if len(encoded) <= limit:
        return text
    return encoded[:limit].decode("utf-8", errors="ignore") + "...[truncated]"


def render_transcript(memory: WorkingMemory) -> str:
    """User-message rendering of the working memory for remote policies."""
    parts = [f"Task: {memory.instruction}"]
    if memory.inputs:
        parts.append("Inputs: " + canonical_dumps(memory.inputs))
    if memory.metadata:
        parts.append("Metadata: " + canonical_dumps(memory.metadata))
    for i, turn in enumerate(memory.transcript, start=1):
        parts.append(f"--- Step {i} ---")
        if turn.action.thought:
            parts.append(f"Thought: {turn.action.thought}")
        if turn.action.call is not None:
            parts.append("Action: " + canonical_dumps(turn.action.call.to_dict()))
        if turn.observation is not None:
            parts.append("Observation: " + render_observation(turn.observation))
    parts.append("Continue with the next step.")
    return "\n".join(parts)


class Session:
    """One running task: memory, cache, executors, and the step loop."""

    def __init__(
        self,
        registry: ToolRegistry,
        config: SessionConfig,
        fixtures: FixtureStore,
        workspace: str | Path,
        *,
        fixtures_root: str | Path | None = None,
        instruction: str = "",
        inputs: list[dict[str, Any]] | None = None,
    ) -> None:
        self.registry = registry
        self.config = config
        self.memory = WorkingMemory(instruction=instruction, inputs=list(inputs or []))
        self.cache = ExecutionCache()
        self.context = ExecutionContext(
            fixtures=fixtures,
            workspace=Path(workspace),
            fixtures_root=Path(fixtures_root) if fixtures_root else None,
        )
        self.stats = RunStats()
        self._seed_metadata()

    def _seed_metadata(self) -> None:
        self.memory.metadata["crs"] = "EPSG:4326"
        for entry in self.memory.inputs:
            if entry.get("gsd_m_per_px") is not None:
                self.memory.metadata["gsd_m_per_px"] = entry["gsd_m_per_px"]
                break

    def record_thought(self, action: Action) -> None:
        assert action.call is None
        self.memory.transcript.append(Turn(action=action, observation=None))

    def step(self, action: Action) -> Observation:
        """Validate and execute one call; append the turn to the transcript.

        Failures never raise: the observation carries a ValidationFailed
        or ExecutorError payload and the session continues.
        """
        assert action.call is not None, "step requires an action with a call"
        call = action.call
        self.stats.total_calls += 1

        report = validate_call(
            self.registry, call.tool, call.args, strict=self.config.strict_validation
        )
        if not report.ok:
            detail = "; ".join(issue.detail for issue in report.issues)
            observation = Observation(
                ok=False, error={"code": "ValidationFailed", "detail": detail}
            )
        else:
            fingerprint = cache_fingerprint(call.tool, call.args)
            cached = (
                self.cache.entries.get(fingerprint)
                if self.config.cache_enabled
                else None
            )
            if cached is not None:
                observation = cached
            else:
                observation = self._execute(call, fingerprint)
                if observation.ok and self.config.cache_enabled:
                    self.cache.entries[fingerprint] = observation

        self.stats.executor_invocations = self.context.invocations
        if observation.ok:
            self.stats.successful_calls += 1
        else:
            self.stats.failed_calls += 1
        self.memory.transcript.append(Turn(action=action, observation=observation))
        return observation

    def _execute(self, call: ToolCall, fingerprint: str) -> Observation:
        descriptor = self.registry[call.tool]
        try:
            value = execute(self.context, descriptor.executor_id, call.tool, call.args)
        except Exception as exc:  # executor failures become feedback
            code = getattr(exc, "code", type(exc).__name__)
            return Observation(
                ok=False,
                error={"code": "ExecutorError", "detail": f"{code}: {exc}"},
            )
        self._register_artifacts(call, value)
        return Observation(ok=True, value=value)

    def _register_artifacts(self, call: ToolCall, value: Mapping[str, Any]) -> None:
        bundle_ref = value.get("geopackage") or call.args.get("geopackage")
        if not isinstance(bundle_ref, str):
            return
        for key in ("layer", "change_layer", "links_layer"):
            layer = value.get(key)
            if isinstance(layer, str):
                self.cache.derived_artifacts[layer] = bundle_ref


def run(
    policy: "Policy",
    task: "TaskInstance",
    registry: ToolRegistry,
    config: SessionConfig,
    *,
    fixtures: FixtureStore,
    workspace: str | Path,
    fixtures_root: str | Path | None = None,
) -> RunResult:
    """Drive policy -> parse -> step until Terminate or exhaustion.

    Raises:
        ValueError: Registry lacks the Terminate tool.
        PolicyFailure: The policy raised (transport error, script bug).
    """
    from .corpus import record_from_transcript

    if not registry.has_terminate():
        raise ValueError("registry lacks the Terminate tool; refusing to run")

    session = Session(
        registry,
        config,
        fixtures,
        workspace,
        fixtures_root=fixtures_root,
        instruction=task.query,
        inputs=[dict(entry) for entry in task.inputs],
    )
    memory = session.memory
    stats = session.stats

    thought_only_used = 0
    consecutive_format_errors = 0
    final_answer = ""
    status: RunStatus | None = None
    tool_steps = 0

    while tool_steps < config.max_steps:
        step_index = len(memory.transcript) + 1
        try:
            text = policy.next_action(memory)
        except Exception as exc:
            raise PolicyFailure(f"policy failed at step {step_index}: {exc}") from exc

        parsed = parse_action(
            text,
            step_index,
            allowance_used=thought_only_used >= config.thought_only_allowance,
        )
        if isinstance(parsed, FormatError):
            stats.format_errors.append((step_index, parsed.kind))
            consecutive_format_errors += 1
            memory.metadata.setdefault("notices", []).append(
                f"step {step_index}: {parsed.kind.value}: {parsed.detail}"
            )
            if consecutive_format_errors >= MAX_CONSECUTIVE_FORMAT_ERRORS:
                logger.debug(
                    "task %s aborted after %d consecutive format errors",
                    task.id, consecutive_format_errors,
                )
                status = RunStatus.ABORTED
                break
            continue

        consecutive_format_errors = 0
        if parsed.call is None:
            thought_only_used += 1
            session.record_thought(parsed)
            continue

        observation = session.step(parsed)
        tool_steps += 1
        if parsed.call.tool == "Terminate" and observation.ok:
            stats.terminated = True
            answer = parsed.call.args.get("answer")
            final_answer = answer if isinstance(answer, str) else ""
            # A terminate with no successful tool call before it is the
            # "answer reached without a single tool call" failure class.
            stats.answer_without_tool = stats.successful_calls <= 1
            status = RunStatus.COMPLETED
            break

    if status is None:
        status = RunStatus.STEP_EXHAUSTED

    record = record_from_transcript(
        task=task,
        transcript=memory.transcript,
        final_answer=final_answer,
    )
    outcome = RunOutcome(
        status=status, format_error_count=len(stats.format_errors)
    )
    return RunResult(record=record, outcome=outcome, stats=stats)

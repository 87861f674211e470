"""Agent-side interface: produce the next model text for a session.

Three implementations ship: a scripted policy that replays a stored
trajectory (rendered through the wire format so the parser is exercised
on every test), a rule-based smoke policy, and a remote
chat-completions client with exponential backoff. The environment never
sees anything but text, preserving the environment-policy separation.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Protocol

from .orchestrator import (
    Action,
    ToolCall,
    WorkingMemory,
    render_action_text,
    render_system_prompt,
    render_transcript,
)
from .registry import ToolRegistry

logger = logging.getLogger(__name__)


class ScriptExhausted(Exception):
    """A scripted policy was asked for more turns than its source has."""


class TransportError(Exception):
    """Remote endpoint unreachable or invalid after all retries."""


class Policy(Protocol):
    def next_action(self, memory: WorkingMemory) -> str: ...


class ScriptedPolicy:
    """Pure index playback of a stored trajectory.

    Each call emits the stored thought plus the fenced action block for
    the next step, regardless of the transcript content (deterministic
    and transcript-independent).
    """

    def __init__(self, record: Any) -> None:
        # `record` is a corpus.TrajectoryRecord; typed loosely to keep
        # this module import-light.
        self._steps = list(record.steps)
        self._index = 0

    def next_action(self, memory: WorkingMemory) -> str:
        if self._index >= len(self._steps):
            raise ScriptExhausted(
                f"script has {len(self._steps)} steps, asked for step "
                f"{self._index + 1}"
            )
        step = self._steps[self._index]
        self._index += 1
        action = Action(thought=step.thought, call=step.action)
        return render_action_text(action)


class RuleBasedPolicy:
    """Smoke-coverage policy: one Calculator call, then Terminate."""

    def __init__(self, expression: str = "1+1") -> None:
        self.expression = expression
        self._turn = 0

    def next_action(self, memory: WorkingMemory) -> str:
        self._turn += 1
        if self._turn == 1:
            action = Action(
                thought="Evaluate the expression, then report it.",
                call=ToolCall("Calculator", {"expression": self.expression}),
            )
            return render_action_text(action)
        answer = ""
        for turn in memory.transcript:
            if turn.observation is not None and turn.observation.ok:
                value = (turn.observation.value or {}).get("text")
                if value is not None:
                    answer = str(value)
        action = Action(
            thought="Report the computed value.",
            call=ToolCall("Terminate", {"answer": answer}),
        )
        return render_action_text(action)


@dataclass(frozen=True, slots=True)
class RemoteConfig:
    """Chat-completions endpoint settings; the key comes from the
    environment variable named by `api_key_env`, never from files or
    flags."""

    base_url: str
    model: str
    api_key_env: str = "GEOAGENT_API_KEY"
    temperature: float = 0.0
    timeout_s: int = 60
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class RemotePolicy:
    """Chat-completions client rendering the session into messages."""

    def __init__(
        self,
        config: RemoteConfig,
        registry: ToolRegistry,
        *,
        transport: Any | None = None,
        backoff_s: float = 0.5,
    ) -> None:
        self.config = config
        self.registry = registry
        self.backoff_s = backoff_s
        if transport is None:
            import requests

            transport = requests
        self._transport = transport
        self._system_prompt = render_system_prompt(registry)

    def build_request(self, memory: WorkingMemory) -> dict[str, Any]:
        """Deterministic request payload for the current memory view."""
        return {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": self._system_prompt},
                {"role": "user", "content": render_transcript(memory)},
            ],
            "temperature": self.config.temperature,
        }

    def request_digest(self, memory: WorkingMemory) -> str:
        from .canonical import digest

        return digest(self.build_request(memory))

    def next_action(self, memory: WorkingMemory) -> str:
        payload = self.build_request(memory)
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        url = self.config.base_url.rstrip("/") + "/chat/completions"
        attempts = self.config.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                response = self._transport.post(
                    url,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout_s,
                )
                response.raise_for_status()
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except Exception as exc:
                last_error = exc
                logger.warning(
                    "remote policy attempt %d/%d failed: %s", attempt + 1, attempts, exc
                )
        raise TransportError(
            f"remote policy failed after {attempts} attempts: {last_error}"
        ) from last_error


@dataclass(frozen=True, slots=True)
class PolicyHandle:
    """Declarative policy selection used by the CLI.

    kind "scripted" requires a source trajectory per task; "remote"
    requires endpoint configuration.
    """

    kind: str  # scripted | rule_based | remote
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("scripted", "rule_based", "remote"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "remote" and "base_url" not in self.config:
            raise ValueError("remote policy needs endpoint config (base_url)")


def make_policy(
    handle: PolicyHandle,
    registry: ToolRegistry,
    *,
    record: Any | None = None,
) -> Policy:
    """Instantiate a policy for one session."""
    if handle.kind == "scripted":
        if record is None:
            raise ValueError("scripted policy requires a source trajectory")
        return ScriptedPolicy(record)
    if handle.kind == "rule_based":
        return RuleBasedPolicy(**handle.config)
    remote_cfg = RemoteConfig(
        base_url=handle.config["base_url"],
        model=handle.config.get("model", "default"),
        api_key_env=handle.config.get("api_key_env", "GEOAGENT_API_KEY"),
        temperature=handle.config.get("temperature", 0.0),
        timeout_s=handle.config.get("timeout_s", 60),
        max_retries=handle.config.get("max_retries", 2),
    )
    return RemotePolicy(remote_cfg, registry)

"""Text-answer judging for descriptive answers.

Two implementations: a remote chat-model judge prompted to emit a
normalized 0-1 score as constrained JSON, and an offline token-overlap
fallback that is NOT the benchmark protocol (flag it in any report).
Tests run with no judge configured: text items are skipped and counted.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Protocol


class JudgeUnavailable(Exception):
    """A text answer needs a judge and none is configured."""


@dataclass(frozen=True, slots=True)
class JudgeConfig:
    base_url: str
    model: str
    api_key_env: str = "GEOAGENT_JUDGE_API_KEY"
    prompt_template_path: str | None = None
    timeout_s: int = 60


class AnswerJudge(Protocol):
    def score(self, pred: str, gold: str, query: str) -> float: ...


_DEFAULT_PROMPT = """You are grading a geospatial agent's answer against a reference.

Score the prediction from 0 to 1:
- Numerical answers: full credit within a +/-10% tolerance of the
  reference value, zero otherwise.
- Spatial answers (boxes, coordinates): full credit when the prediction
  overlaps the reference meaningfully (IoU at or above threshold).
- Descriptive answers: judge semantic equivalence; allow paraphrase,
  grant partial credit for partially correct content, and score
  contradictions as 0.
- Missing, fabricated, or non-responsive answers score 0.

Task: $query
Reference answer: $gold
Predicted answer: $pred

Reply with JSON only: {"score": <number 0..1>, "justification": "<one sentence>"}
"""


class RemoteJudge:
    """Chat-completions judge returning the structured score."""

    def __init__(self, config: JudgeConfig, *, transport: Any | None = None) -> None:
        self.config = config
        if transport is None:
            import requests

            transport = requests
        self._transport = transport
        if config.prompt_template_path:
            self._template = Path(config.prompt_template_path).read_text(
                encoding="utf-8"
            )
        else:
            self._template = _DEFAULT_PROMPT

    def render_prompt(self, pred: str, gold: str, query: str) -> str:
        import string

        return string.Template(self._template).substitute(
            pred=pred, gold=gold, query=query
        )

    def score(self, pred: str, gold: str, query: str) -> float:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        response = self._transport.post(
            self.config.base_url.rstrip("/") + "/chat/completions",
            json={
                "model": self.config.model,
                "messages": [
                    {"role": "user", "content": self.render_prompt(pred, gold, query)}
                ],
                "temperature": 0.0,
            },
            headers=headers,
            timeout=self.config.timeout_s,
        )
        response.raise_for_status()
        content = response.json()["choices"][0]["message"]["content"]
        match = re.search(r"\{.*\}", content, re.DOTALL)
        if not match:
            raise JudgeUnavailable(f"judge returned no JSON: {content[:200]}")
        score = float(json.loads(match.group(0))["score"])
        return min(1.0, max(0.0, score))


class TokenOverlapJudge:
    """Offline fallback: token-level F1 between prediction and reference.

    Not the benchmark protocol; only for judge-less smoke runs.
    """

    benchmark_protocol = False

    def score(self, pred: str, gold: str, query: str) -> float:
        pred_tokens = pred.lower().split()
        gold_tokens = gold.lower().split()
        if not pred_tokens or not gold_tokens:
            return 0.0
        overlap = 0
        remaining = list(gold_tokens)
        for token in pred_tokens:
            if token in remaining:
                remaining.remove(token)
                overlap += 1
        precision = overlap / len(pred_tokens)
        recall = overlap / len(gold_tokens)
        if precision + recall == 0:
            return 0.0
        return 2 * precision * recall / (precision + recall)

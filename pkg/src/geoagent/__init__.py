"""Runtime, replay validator, and evaluation harness for tool-augmented
geospatial agents."""

from .corpus import TaskInstance, TrajectoryRecord, load_corpus, save_corpus
from .defaults import default_registry, load_category_map
from .evaluator import (
    EvalReport,
    answer_score,
    category_f1,
    e2e_eval,
    error_taxonomy,
    order_metrics,
    score_step,
    stepwise_corpus_eval,
    stepwise_eval,
)
from .orchestrator import (
    Action,
    Observation,
    SessionConfig,
    cache_fingerprint,
    parse_action,
    run,
)
from .policy import PolicyHandle, RemoteConfig, ScriptedPolicy, make_policy
from .registry import (
    ParamSpec,
    ToolCategory,
    ToolDescriptor,
    ToolRegistry,
    build_registry,
    list_by_category,
    validate_call,
)
from .replay import corpus_gate, replay

__version__ = "0.1.0"

__all__ = [
    "Action",
    "EvalReport",
    "Observation",
    "ParamSpec",
    "PolicyHandle",
    "RemoteConfig",
    "ScriptedPolicy",
    "SessionConfig",
    "TaskInstance",
    "ToolCategory",
    "ToolDescriptor",
    "ToolRegistry",
    "TrajectoryRecord",
    "answer_score",
    "build_registry",
    "cache_fingerprint",
    "category_f1",
    "corpus_gate",
    "default_registry",
    "e2e_eval",
    "error_taxonomy",
    "list_by_category",
    "load_category_map",
    "load_corpus",
    "make_policy",
    "order_metrics",
    "parse_action",
    "replay",
    "run",
    "save_corpus",
    "score_step",
    "stepwise_corpus_eval",
    "stepwise_eval",
    "validate_call",
]

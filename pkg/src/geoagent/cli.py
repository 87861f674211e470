"""Command-line entry point: validate, eval, run, stats, tools.

Exit codes follow one contract everywhere: 0 success, 1 validation
rejections present, 2 usage or configuration error. Output files are
written atomically (temp file + rename) and every report carries a
digest of the effective configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

from .canonical import canonical_pretty, digest
from .corpus import TrajectoryRecord, load_corpus, record_to_dict, stats as corpus_stats
from .corpus import unknown_tools
from .defaults import default_registry, load_category_map
from .evaluator import EvalReport, e2e_eval, stepwise_corpus_eval
from .fixtures import write_fixture_tree
from .geotools.perception import FixtureStore, load_fixture_store
from .judge import JudgeConfig, RemoteJudge
from .orchestrator import SessionConfig, render_observation
from .policy import PolicyHandle, make_policy
from .registry import ToolRegistry, load_registry_file
from .replay import corpus_gate, reports_to_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTIONS = 1
EXIT_CONFIG = 2

STEP_COLUMNS = ["Inst.", "Tool.", "ArgN.", "ArgV.", "Summ."]
E2E_COLUMNS = [
    "Per.", "Op.", "Logic.", "GIS.",
    "AnyOrder", "SameOrder", "Unique", "Ans.", "Gen.",
]


class CliError(Exception):
    """Configuration or I/O problem; maps to exit code 2."""


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _load_registry(args: argparse.Namespace) -> ToolRegistry:
    if getattr(args, "registry", None):
        path = Path(args.registry)
        if not path.is_file():
            raise CliError(f"registry file not found: {path}")
        return load_registry_file(path)
    category_map = getattr(args, "category_map", None)
    return default_registry(category_map)


def _load_fixtures(args: argparse.Namespace) -> tuple[FixtureStore, Path]:
    root = Path(args.fixtures)
    store_dir = root / "store"
    if not store_dir.is_dir():
        raise CliError(f"no fixture store at {store_dir}")
    return load_fixture_store(store_dir), root


def _load_records(args: argparse.Namespace) -> list[TrajectoryRecord]:
    path = Path(args.corpus)
    if not path.is_file():
        raise CliError(f"corpus file not found: {path}")
    return load_corpus(path)


def _config_digest(args: argparse.Namespace) -> str:
    payload = {
        key: str(value)
        for key, value in sorted(vars(args).items())
        if key != "func" and value is not None
    }
    return digest(payload)


def _policy_handle(args: argparse.Namespace) -> PolicyHandle:
    kind = {"scripted": "scripted", "rule": "rule_based", "remote": "remote"}[
        args.policy
    ]
    config: dict[str, Any] = {}
    if kind == "remote":
        if not args.endpoint:
            raise CliError("remote policy requires --endpoint")
        config["base_url"] = args.endpoint
        if args.model:
            config["model"] = args.model
    return PolicyHandle(kind=kind, config=config)


def _make_judge(args: argparse.Namespace) -> RemoteJudge | None:
    if getattr(args, "judge", "none") != "remote":
        return None
    if not args.judge_endpoint:
        raise CliError("--judge remote requires --judge-endpoint")
    return RemoteJudge(
        JudgeConfig(base_url=args.judge_endpoint, model=args.judge_model or "default")
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    fixtures, fixtures_root = _load_fixtures(args)
    records = _load_records(args)

    warn = unknown_tools(records, registry)
    if warn:
        logger.warning("corpus uses tools missing from the registry: %s", warn)

    result = corpus_gate(
        records, registry, fixtures, fixtures_root=fixtures_root,
        workers=args.workers,
    )
    report = {
        "config_digest": _config_digest(args),
        "n_records": len(records),
        "n_accepted": len(result.accepted),
        "accepted_ids": sorted(r.task.id for r in result.accepted),
        "rejected": reports_to_json(report for _, report in result.rejected),
        "reports": reports_to_json(result.reports),
        "unknown_tools": warn,
    }
    out_dir = Path(args.out)
    _atomic_write(out_dir / "validate_report.json", canonical_pretty(report))
    print(
        f"validated {len(records)} records: {len(result.accepted)} accepted, "
        f"{len(result.rejected)} rejected"
    )
    for record_id, rejected in result.rejected:
        reasons = ", ".join(sorted({f.code for f in rejected.failures}))
        print(f"  rejected {record_id}: {reasons}")
    return EXIT_OK if not result.rejected else EXIT_REJECTIONS


def _csv_text(columns: Sequence[str], row: Sequence[float]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerow([f"{value:.2f}" for value in row])
    return buffer.getvalue()


def _write_eval_outputs(
    args: argparse.Namespace, report: EvalReport, mode: str
) -> None:
    out_dir = Path(args.out)
    payload = {"config_digest": _config_digest(args), "mode": mode}
    payload.update(report.to_dict())
    _atomic_write(out_dir / f"eval_{mode}.json", canonical_pretty(payload))

    if mode == "step" and report.stepwise is not None:
        s = report.stepwise
        csv_text = _csv_text(STEP_COLUMNS, [s.inst, s.tool, s.argn, s.argv, s.summ])
    elif report.e2e is not None:
        e = report.e2e
        csv_text = _csv_text(
            E2E_COLUMNS,
            [
                e.f1_per, e.f1_op, e.f1_logic, e.f1_gis,
                e.any_order, e.same_order, e.unique, e.answer_acc, e.gen_acc,
            ],
        )
    else:
        csv_text = ""
    _atomic_write(out_dir / f"eval_{mode}.csv", csv_text)


def cmd_eval(args: argparse.Namespace) -> int:
    if args.mode not in ("step", "e2e"):
        raise CliError(f"unknown eval mode {args.mode!r}")
    registry = _load_registry(args)
    fixtures, fixtures_root = _load_fixtures(args)
    golds = _load_records(args)
    handle = _policy_handle(args)
    judge = _make_judge(args)
    mapping = load_category_map(args.category_map)

    def policy_factory(gold: TrajectoryRecord):
        return make_policy(handle, registry, record=gold)

    if args.mode == "step":
        report = stepwise_corpus_eval(policy_factory, golds, registry, judge=judge)
    else:
        config = SessionConfig(max_steps=args.max_steps)
        with tempfile.TemporaryDirectory(prefix="geoagent-e2e-") as workspace:
            report = e2e_eval(
                policy_factory,
                golds,
                registry,
                config,
                mapping,
                fixtures=fixtures,
                workspace=workspace,
                fixtures_root=fixtures_root,
                judge=judge,
                set_mode=args.f1_set_mode,
                workers=args.workers,
            )
    _write_eval_outputs(args, report, args.mode)
    if report.stepwise is not None:
        s = report.stepwise
        print(
            f"step: Inst {s.inst:.2f}  Tool {s.tool:.2f}  ArgN {s.argn:.2f}  "
            f"ArgV {s.argv:.2f}  Summ {s.summ:.2f}"
        )
    if report.e2e is not None:
        e = report.e2e
        print(
            f"e2e: Per {e.f1_per:.2f}  Op {e.f1_op:.2f}  Logic {e.f1_logic:.2f}  "
            f"GIS {e.f1_gis:.2f}  AnyOrder {e.any_order:.2f}  "
            f"SameOrder {e.same_order:.2f}  Unique {e.unique:.2f}  "
            f"Ans {e.answer_acc:.2f}  Gen {e.gen_acc:.2f}"
        )
    print(f"errors: {report.errors.to_dict()}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    from .orchestrator import run as run_session

    registry = _load_registry(args)
    fixtures, fixtures_root = _load_fixtures(args)
    handle = _policy_handle(args)

    gold: TrajectoryRecord | None = None
    if handle.kind == "scripted":
        if not args.corpus or not args.task_id:
            raise CliError("scripted run requires --corpus and --task-id")
        records = {r.task.id: r for r in _load_records(args)}
        gold = records.get(args.task_id)
        if gold is None:
            raise CliError(f"task {args.task_id!r} not in corpus")
        task = gold.task
    else:
        if not args.query or not args.query.strip():
            raise CliError("run requires a nonempty --query")
        inputs = []
        for entry in args.input or []:
            kind, _, path = entry.partition(":")
            if kind not in ("image", "geo_bundle") or not path:
                raise CliError(f"--input must be kind:path, got {entry!r}")
            inputs.append({"kind": kind, "path": path})
        from .corpus import TaskInstance

        task = TaskInstance(
            id=args.task_id or "cli_task",
            domain=args.domain,
            modality=args.modality,
            query=args.query,
            inputs=tuple(inputs),
        )

    policy = make_policy(handle, registry, record=gold)
    config = SessionConfig(max_steps=args.max_steps)
    out_dir = Path(args.out)
    result = run_session(
        policy,
        task,
        registry,
        config,
        fixtures=fixtures,
        workspace=out_dir / "workspace",
        fixtures_root=fixtures_root,
    )

    for i, step in enumerate(result.record.steps, start=1):
        print(f"[{i}] {step.thought}")
        if step.action is not None:
            print(f"    action: {step.action.tool} {json.dumps(dict(step.action.args))}")
        if step.observation is not None:
            print(f"    observation: {render_observation(step.observation, 512)}")
    print(f"outcome: {result.outcome.status.value}")
    print(f"final answer: {result.record.final_answer}")

    _atomic_write(
        out_dir / "trajectory.json",
        canonical_pretty(record_to_dict(result.record)),
    )
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    records = _load_records(args)
    result = corpus_stats(records)
    print(f"instances: {result.n_instances}")
    print(f"steps: {result.n_steps}")
    print(f"avg steps: {result.avg_steps:.2f}")
    for name, histogram in (
        ("domain", result.by_domain),
        ("modality", result.by_modality),
        ("tool", result.by_tool),
    ):
        print(f"by {name}:")
        for key, count in histogram.items():
            print(f"  {key}: {count}")
    if args.out:
        _atomic_write(
            Path(args.out) / "corpus_stats.json",
            canonical_pretty(result.to_dict()),
        )
    return EXIT_OK


def cmd_tools(args: argparse.Namespace) -> int:
    registry = _load_registry(args)
    for descriptor in registry.descriptors():
        params = ", ".join(
            f"{p.name}{'' if p.required else '?'}" for p in descriptor.params
        )
        print(
            f"{descriptor.name:28s} {descriptor.category.value:10s} "
            f"({params}) -> {descriptor.output}"
        )
    print(f"{len(registry)} tools")
    return EXIT_OK


def cmd_make_fixtures(args: argparse.Namespace) -> int:
    write_fixture_tree(args.out)
    print(f"wrote fixture tree to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoagent",
        description="Geospatial agent runtime, replay validator, and evaluator.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_io(p: argparse.ArgumentParser, *, corpus: bool = True) -> None:
        p.add_argument("--registry", help="registry definition JSON")
        p.add_argument("--category-map", help="category override JSON")
        p.add_argument("--fixtures", required=True, help="fixture tree root")
        if corpus:
            p.add_argument("--corpus", required=True, help="corpus JSONL")
        p.add_argument("--out", required=True, help="output directory")

    p_validate = sub.add_parser("validate", help="replay-gate a corpus")
    common_io(p_validate)
    p_validate.add_argument("--workers", type=int, default=1)
    p_validate.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("eval", help="score a policy on a corpus")
    common_io(p_eval)
    p_eval.add_argument("--mode", choices=["step", "e2e"], required=True)
    p_eval.add_argument(
        "--policy", choices=["scripted", "rule", "remote"], default="scripted"
    )
    p_eval.add_argument("--endpoint", help="chat-completions base URL")
    p_eval.add_argument("--model", help="remote model identifier")
    p_eval.add_argument("--max-steps", type=int, default=20)
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.add_argument("--judge", choices=["none", "remote"], default="none")
    p_eval.add_argument("--judge-endpoint")
    p_eval.add_argument("--judge-model")
    p_eval.add_argument(
        "--f1-set-mode", action="store_true",
        help="category F1 on tool sets instead of multisets",
    )
    p_eval.set_defaults(func=cmd_eval)

    p_run = sub.add_parser("run", help="run one live session")
    p_run.add_argument("--registry")
    p_run.add_argument("--category-map")
    p_run.add_argument("--fixtures", required=True)
    p_run.add_argument("--corpus", help="corpus JSONL (for scripted policy)")
    p_run.add_argument("--task-id", help="task id (for scripted policy)")
    p_run.add_argument("--query", help="task query (for live policies)")
    p_run.add_argument(
        "--input", action="append", help="task input as kind:path (repeatable)"
    )
    p_run.add_argument("--domain", default="urban")
    p_run.add_argument("--modality", default="rgb")
    p_run.add_argument(
        "--policy", choices=["scripted", "rule", "remote"], default="scripted"
    )
    p_run.add_argument("--endpoint")
    p_run.add_argument("--model")
    p_run.add_argument("--max-steps", type=int, default=20)
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(func=cmd_run)

    p_stats = sub.add_parser("stats", help="corpus statistics")
    p_stats.add_argument("--corpus", required=True)
    p_stats.add_argument("--out")
    p_stats.set_defaults(func=cmd_stats)

    p_tools = sub.add_parser("tools", help="list registry tools")
    p_tools.add_argument("--registry")
    p_tools.add_argument("--category-map")
    p_tools.set_defaults(func=cmd_tools)

    p_fixtures = sub.add_parser("make-fixtures", help="write the fixture tree")
    p_fixtures.add_argument("--out", required=True)
    p_fixtures.set_defaults(func=cmd_make_fixtures)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:
        from .corpus import CorpusError
        from .registry import RegistrySchemaError

        if isinstance(exc, (CliError, CorpusError, RegistrySchemaError, OSError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())

"""Deterministic replay validation: the corpus quality gate.

Every stored tool call is re-validated and re-executed in order against
the same fixtures, and the fresh observations are compared to the stored
ones: numbers at relative tolerance 1e-9 (a 1e-9..1e-6 band counts as
tolerant), strings exactly after trailing-whitespace strip, rendered
images by file existence only. Argument coordinates must lie within CRS
bounds and input-bundle geometry must be valid. Records whose full chain
re-executes and matches pass the gate; everything else is rejected with
reasons.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import TrajectoryRecord
from .geotools.bundle import load_bundle
from .geotools.perception import FixtureStore
from .orchestrator import Action, Observation, Session, SessionConfig
from .registry import ToolRegistry, validate_call

_REL_EXACT = 1e-9
_REL_TOLERANT = 1e-6

MATCH_EXACT = "exact"
MATCH_TOLERANT = "tolerant"
MATCH_MISMATCH = "mismatch"
MATCH_SKIPPED = "skipped"

_MATCH_RANK = {MATCH_EXACT: 0, MATCH_TOLERANT: 1, MATCH_MISMATCH: 2}


@dataclass(frozen=True, slots=True)
class StepReplay:
    step: int  # 1-based step index in the record
    arg_format_ok: bool
    validation_ok: bool
    execution_ok: bool
    observation_match: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "arg_format_ok": self.arg_format_ok,
            "validation_ok": self.validation_ok,
            "execution_ok": self.execution_ok,
            "observation_match": self.observation_match,
        }


@dataclass(frozen=True, slots=True)
class Failure:
    step: int
    code: str
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"step": self.step, "code": self.code, "detail": self.detail}


@dataclass(frozen=True, slots=True)
class ReplayReport:
    record_id: str
    per_step: tuple[StepReplay, ...]
    full_chain_executable: bool
    failures: tuple[Failure, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "record_id": self.record_id,
            "per_step": [s.to_dict() for s in self.per_step],
            "full_chain_executable": self.full_chain_executable,
            "failures": [f.to_dict() for f in self.failures],
        }


@dataclass(frozen=True, slots=True)
class GateResult:
    accepted: tuple[TrajectoryRecord, ...]
    rejected: tuple[tuple[str, ReplayReport], ...]
    reports: tuple[ReplayReport, ...] = ()  # every record, input order


def _worst(a: str, b: str) -> str:
    return a if _MATCH_RANK[a] >= _MATCH_RANK[b] else b


def match_values(stored: Any, fresh: Any) -> str:
    """Structural comparison verdict: exact, tolerant, or mismatch."""
    if isinstance(stored, bool) or isinstance(fresh, bool):
        return MATCH_EXACT if stored is fresh else MATCH_MISMATCH
    if isinstance(stored, (int, float)) and isinstance(fresh, (int, float)):
        if stored == fresh:
            return MATCH_EXACT
        denom = max(abs(stored), abs(fresh))
        rel = abs(stored - fresh) / denom if denom else 0.0
        if rel <= _REL_EXACT:
            return MATCH_EXACT
        if rel <= _REL_TOLERANT:
            return MATCH_TOLERANT
        return MATCH_MISMATCH
    if isinstance(stored, str) and isinstance(fresh, str):
        return MATCH_EXACT if stored.rstrip() == fresh.rstrip() else MATCH_MISMATCH
    if stored is None or fresh is None:
        return MATCH_EXACT if stored is fresh else MATCH_MISMATCH
    if isinstance(stored, list) and isinstance(fresh, list):
        if len(stored) != len(fresh):
            return MATCH_MISMATCH
        verdict = MATCH_EXACT
        for a, b in zip(stored, fresh):
            verdict = _worst(verdict, match_values(a, b))
        return verdict
    if isinstance(stored, Mapping) and isinstance(fresh, Mapping):
        if set(stored) != set(fresh):
            return MATCH_MISMATCH
        verdict = MATCH_EXACT
        for key in stored:
            verdict = _worst(verdict, match_values(stored[key], fresh[key]))
        return verdict
    return MATCH_MISMATCH


def _is_render_observation(observation: Observation) -> bool:
    return observation.value is not None and "image_path" in observation.value


def match_observations(
    stored: Observation, fresh: Observation, workspace: Path
) -> tuple[str, str]:
    """(verdict, detail). Rendered-image observations are existence-checked."""
    if stored.ok != fresh.ok:
        return MATCH_MISMATCH, (
            f"stored ok={stored.ok} but re-execution ok={fresh.ok}"
        )
    if _is_render_observation(stored) or _is_render_observation(fresh):
        rel = (fresh.value or {}).get("image_path")
        if rel and not (workspace / rel).is_file():
            return MATCH_MISMATCH, f"re-rendered image missing: {rel}"
        return MATCH_SKIPPED, ""
    if stored.ok:
        verdict = match_values(dict(stored.value or {}), dict(fresh.value or {}))
    else:
        verdict = match_values(dict(stored.error or {}), dict(fresh.error or {}))
    detail = "" if verdict != MATCH_MISMATCH else "stored observation differs"
    return verdict, detail


def _coordinate_kinds(kind: str) -> bool:
    return kind in ("coordinate-lonlat", "bbox-wsen") or (
        kind.startswith("array-of(") and _coordinate_kinds(kind[9:-1])
    )


def _check_coordinates(kind: str, value: Any, param: str) -> list[str]:
    """CRS-bound violations for coordinate-typed argument values."""
    problems: list[str] = []
    if kind.startswith("array-of("):
        inner = kind[9:-1]
        if isinstance(value, list):
            for i, item in enumerate(value):
                problems += _check_coordinates(inner, item, f"{param}[{i}]")
        return problems
    if kind == "coordinate-lonlat" and isinstance(value, list) and len(value) == 2:
        lon, lat = value
        if not -180.0 <= lon <= 180.0:
            problems.append(f"{param}: longitude {lon} outside [-180, 180]")
        if not -90.0 <= lat <= 90.0:
            problems.append(f"{param}: latitude {lat} outside [-90, 90]")
    if kind == "bbox-wsen" and isinstance(value, list) and len(value) == 4:
        w, s, e, n = value
        for name, lon in (("west", w), ("east", e)):
            if not -180.0 <= lon <= 180.0:
                problems.append(f"{param}: {name} {lon} outside [-180, 180]")
        for name, lat in (("south", s), ("north", n)):
            if not -90.0 <= lat <= 90.0:
                problems.append(f"{param}: {name} {lat} outside [-90, 90]")
    return problems


def _coordinate_integrity(
    registry: ToolRegistry, tool: str, args: Mapping[str, Any]
) -> list[str]:
    descriptor = registry.get(tool)
    if descriptor is None:
        return []
    problems: list[str] = []
    for spec in descriptor.params:
        if spec.name in args and _coordinate_kinds(spec.kind):
            problems += _check_coordinates(spec.kind, args[spec.name], spec.name)
    return problems


def _check_input_geometry(
    record: TrajectoryRecord, fixtures_root: Path | None
) -> list[Failure]:
    """Load geo-bundle inputs and surface invalid geometry as failures."""
    failures: list[Failure] = []
    for entry in record.task.inputs:
        if entry.get("kind") != "geo_bundle":
            continue
        path = Path(entry["path"])
        if fixtures_root is not None and not path.is_absolute():
            path = fixtures_root / path
        try:
            load_bundle(path)
        except Exception as exc:
            failures.append(
                Failure(
                    step=0,
                    code="GeometryValidity",
                    detail=f"input bundle {entry['path']}: {exc}",
                )
            )
    return failures


def replay(
    record: TrajectoryRecord,
    registry: ToolRegistry,
    fixtures: FixtureStore,
    *,
    fixtures_root: str | Path | None = None,
    workspace: str | Path | None = None,
) -> ReplayReport:
    """Re-validate and re-execute a record; never raises, only reports."""
    own_workspace: tempfile.TemporaryDirectory | None = None
    if workspace is None:
        own_workspace = tempfile.TemporaryDirectory(prefix="geoagent-replay-")
        workspace = own_workspace.name
    workspace_path = Path(workspace)

    failures: list[Failure] = []
    per_step: list[StepReplay] = []

    # Preflight: invalid geometry in task inputs fails the chain up front,
    # reported as a step-0 row.
    geometry_failures = _check_input_geometry(
        record, Path(fixtures_root) if fixtures_root else None
    )
    if geometry_failures:
        failures.extend(geometry_failures)
        per_step.append(StepReplay(0, True, False, False, MATCH_SKIPPED))

    session = Session(
        registry,
        SessionConfig(max_steps=max(1, len(record.steps))),
        fixtures,
        workspace_path,
        fixtures_root=fixtures_root,
        instruction=record.task.query,
        inputs=[dict(e) for e in record.task.inputs],
    )

    try:
        for index, step in enumerate(record.steps, start=1):
            if step.action is None:
                per_step.append(
                    StepReplay(index, True, True, True, MATCH_SKIPPED)
                )
                continue

            call = step.action
            arg_format_ok = isinstance(call.tool, str) and isinstance(
                dict(call.args), dict
            )
            report = validate_call(registry, call.tool, call.args)
            coordinate_problems = _coordinate_integrity(registry, call.tool, call.args)
            validation_ok = report.ok and not coordinate_problems

            if not report.ok:
                failures.append(
                    Failure(
                        step=index,
                        code="ValidationFailed",
                        detail="; ".join(i.detail for i in report.issues),
                    )
                )
            for problem in coordinate_problems:
                failures.append(
                    Failure(step=index, code="CoordinateIntegrity", detail=problem)
                )

            if not validation_ok:
                # A call that fails validation or coordinate integrity is
                # not executable; nothing to compare.
                per_step.append(
                    StepReplay(index, arg_format_ok, False, False, MATCH_SKIPPED)
                )
                continue

            observation = session.step(Action(thought=step.thought, call=call))
            execution_ok = observation.ok
            if not execution_ok:
                failures.append(
                    Failure(
                        step=index,
                        code="ExecutionFailed",
                        detail=(observation.error or {}).get("detail", ""),
                    )
                )

            if step.observation is None:
                match = MATCH_SKIPPED
            else:
                match, detail = match_observations(
                    step.observation, observation, workspace_path
                )
                if match == MATCH_MISMATCH:
                    failures.append(
                        Failure(step=index, code="ObservationMismatch", detail=detail)
                    )

            per_step.append(
                StepReplay(index, arg_format_ok, validation_ok, execution_ok, match)
            )
    finally:
        if own_workspace is not None:
            own_workspace.cleanup()

    chain_ok = all(
        s.execution_ok and s.observation_match != MATCH_MISMATCH for s in per_step
    )
    return ReplayReport(
        record_id=record.task.id,
        per_step=tuple(per_step),
        full_chain_executable=chain_ok,
        failures=tuple(failures),
    )


def corpus_gate(
    records: Sequence[TrajectoryRecord],
    registry: ToolRegistry,
    fixtures: FixtureStore,
    *,
    fixtures_root: str | Path | None = None,
    workers: int = 1,
) -> GateResult:
    """Partition records into replay-valid and rejected-with-reasons.

    Records replay independently; with workers > 1 they run in a thread
    pool, each replay owning its own cache and bundle copies. Results
    keep the input order either way.
    """

    def replay_one(record: TrajectoryRecord) -> ReplayReport:
        return replay(record, registry, fixtures, fixtures_root=fixtures_root)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(replay_one, records))
    else:
        reports = [replay_one(record) for record in records]

    accepted: list[TrajectoryRecord] = []
    rejected: list[tuple[str, ReplayReport]] = []
    for record, report in zip(records, reports):
        if report.full_chain_executable:
            accepted.append(record)
        else:
            rejected.append((record.task.id, report))
    return GateResult(
        accepted=tuple(accepted),
        rejected=tuple(rejected),
        reports=tuple(reports),
    )


def reports_to_json(reports: Iterable[ReplayReport]) -> dict[str, Any]:
    """Canonical report payload keyed by record id."""
    return {report.record_id: report.to_dict() for report in reports}

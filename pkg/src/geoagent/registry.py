"""Unified tool registry: one callable schema for every tool.

A tool is described by its name, functional category, parameter specs, and
an output contract, independent of the executor that implements it. The
registry is immutable after construction and validates calls purely from
the declared schema, so it can be shared across concurrent sessions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Iterator, Mapping

from .canonical import canonical_pretty

# Closed set of scalar/base parameter kinds. Array kinds are spelled
# "array-of(<kind>)" and validated recursively.
BASE_KINDS = frozenset(
    {
        "string",
        "number",
        "integer",
        "boolean",
        "image-ref",
        "geo-bundle-ref",
        "layer-name",
        "bbox-wsen",
        "coordinate-lonlat",
        "structured-object",
    }
)

_ARRAY_RE = re.compile(r"^array-of\((.+)\)$")


class ToolCategory(str, Enum):
    """Four-way functional grouping used by the category-F1 metric."""

    PERCEPTION = "perception"
    OPERATION = "operation"
    LOGIC = "logic"
    GIS = "gis"


class IssueCode(str, Enum):
    """Validation failure codes reported by :func:`validate_call`."""

    UNKNOWN_TOOL = "UnknownTool"
    MISSING_REQUIRED = "MissingRequired"
    UNKNOWN_ARG = "UnknownArg"
    TYPE_MISMATCH = "TypeMismatch"


class DuplicateName(ValueError):
    """Two descriptors share a name within one registry."""

    def __init__(self, name: str) -> None:
        super().__init__(f"duplicate tool name: {name!r}")
        self.name = name


class RegistrySchemaError(ValueError):
    """A descriptor or registry file violates the schema."""


def _check_kind(kind: str) -> None:
    inner = kind
    match = _ARRAY_RE.match(inner)
    while match:
        inner = match.group(1)
        match = _ARRAY_RE.match(inner)
    if inner not in BASE_KINDS:
        raise RegistrySchemaError(f"unknown parameter kind: {kind!r}")


@dataclass(frozen=True, slots=True)
class ParamSpec:
    """Schema for a single tool parameter.

    Attributes:
        name: Parameter identifier, unique within the tool.
        kind: One of :data:`BASE_KINDS` or "array-of(<kind>)".
        required: Whether a call must supply the parameter.
        description: Human-readable description shown in prompts.
    """

    name: str
    kind: str
    required: bool = True
    description: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise RegistrySchemaError("parameter name must be nonempty")
        _check_kind(self.kind)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "required": self.required,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ParamSpec":
        return cls(
            name=data["name"],
            kind=data["kind"],
            required=bool(data.get("required", True)),
            description=data.get("description", ""),
        )


@dataclass(frozen=True, slots=True)
class ToolDescriptor:
    """One registry entry: schema plus executor binding.

    Attributes:
        name: Tool identifier, unique within a registry.
        category: Functional category of the tool.
        description: What the tool does, shown to the model.
        params: Ordered parameter specs (required params listed first
            by convention in the shipped registry).
        output: Nonempty text contract describing the structured output.
        executor_id: Key resolved to an executable by the geotools module.
    """

    name: str
    category: ToolCategory
    description: str
    params: tuple[ParamSpec, ...]
    output: str
    executor_id: str

    def __post_init__(self) -> None:
        if not self.name:
            raise RegistrySchemaError("tool name must be nonempty")
        if not self.output:
            raise RegistrySchemaError(f"{self.name}: output contract must be nonempty")
        seen: set[str] = set()
        for spec in self.params:
            if spec.name in seen:
                raise RegistrySchemaError(
                    f"{self.name}: duplicate parameter {spec.name!r}"
                )
            seen.add(spec.name)

    @property
    def required_params(self) -> tuple[ParamSpec, ...]:
        return tuple(p for p in self.params if p.required)

    def param(self, name: str) -> ParamSpec | None:
        for spec in self.params:
            if spec.name == name:
                return spec
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "category": self.category.value,
            "description": self.description,
            "params": [p.to_dict() for p in self.params],
            "output": self.output,
            "executor_id": self.executor_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ToolDescriptor":
        try:
            category = ToolCategory(data["category"])
        except ValueError as exc:
            raise RegistrySchemaError(
                f"{data.get('name', '?')}: unknown category {data.get('category')!r}"
            ) from exc
        return cls(
            name=data["name"],
            category=category,
            description=data.get("description", ""),
            params=tuple(ParamSpec.from_dict(p) for p in data.get("params", [])),
            output=data["output"],
            executor_id=data["executor_id"],
        )


@dataclass(frozen=True, slots=True)
class Issue:
    """One validation failure (or lenient-mode warning)."""

    code: IssueCode
    param: str | None
    detail: str

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code.value, "param": self.param, "detail": self.detail}


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """Outcome of validating one call against the registry.

    ``ok`` holds iff ``issues`` is empty. ``warnings`` carries unknown-arg
    notices downgraded by lenient mode and never affects ``ok``.
    """

    ok: bool
    issues: tuple[Issue, ...] = ()
    warnings: tuple[Issue, ...] = ()

    def __post_init__(self) -> None:
        assert self.ok == (len(self.issues) == 0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "issues": [i.to_dict() for i in self.issues],
            "warnings": [w.to_dict() for w in self.warnings],
        }


class ToolRegistry:
    """Immutable name -> descriptor map.

    Construct with :func:`build_registry`; instances never mutate and are
    safe to share across threads and evaluation workers.
    """

    __slots__ = ("_tools",)

    def __init__(self, tools: Mapping[str, ToolDescriptor]) -> None:
        object.__setattr__(self, "_tools", dict(tools))

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("ToolRegistry is immutable")

    def __len__(self) -> int:
        return len(self._tools)

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def __iter__(self) -> Iterator[str]:
        return iter(self._tools)

    def get(self, name: str) -> ToolDescriptor | None:
        return self._tools.get(name)

    def __getitem__(self, name: str) -> ToolDescriptor:
        return self._tools[name]

    def names(self) -> list[str]:
        return sorted(self._tools)

    def descriptors(self) -> list[ToolDescriptor]:
        return [self._tools[name] for name in self.names()]

    def has_terminate(self) -> bool:
        return "Terminate" in self._tools


def build_registry(descriptors: Iterable[ToolDescriptor]) -> ToolRegistry:
    """Build an immutable registry from descriptors.

    Raises:
        DuplicateName: If two descriptors share a name.
    """
    tools: dict[str, ToolDescriptor] = {}
    for desc in descriptors:
        if desc.name in tools:
            raise DuplicateName(desc.name)
        tools[desc.name] = desc
    return ToolRegistry(tools)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _conforms(value: Any, kind: str) -> str | None:
    """Return None when `value` conforms to `kind`, else a failure detail."""
    match = _ARRAY_RE.match(kind)
    if match:
        if not isinstance(value, list):
            return f"expected array of {match.group(1)}, got {type(value).__name__}"
        inner = match.group(1)
        for i, item in enumerate(value):
            detail = _conforms(item, inner)
            if detail is not None:
                return f"element {i}: {detail}"
        return None

    if kind in ("string", "image-ref", "geo-bundle-ref", "layer-name"):
        if not isinstance(value, str):
            return f"expected {kind}, got {type(value).__name__}"
        return None
    if kind == "number":
        # Integer literals are acceptable numbers.
        if not _is_number(value):
            return f"expected number, got {type(value).__name__}"
        return None
    if kind == "integer":
        if not isinstance(value, int) or isinstance(value, bool):
            return f"expected integer, got {type(value).__name__}"
        return None
    if kind == "boolean":
        if not isinstance(value, bool):
            return f"expected boolean, got {type(value).__name__}"
        return None
    if kind == "structured-object":
        if not isinstance(value, dict):
            return f"expected object, got {type(value).__name__}"
        return None
    if kind == "bbox-wsen":
        if (
            not isinstance(value, list)
            or len(value) != 4
            or not all(_is_number(v) for v in value)
        ):
            return "expected [W, S, E, N] array of 4 numbers"
        w, s, e, n = value
        if w > e:
            return f"west {w} exceeds east {e}"
        if s > n:
            return f"south {s} exceeds north {n}"
        return None
    if kind == "coordinate-lonlat":
        if (
            not isinstance(value, list)
            or len(value) != 2
            or not all(_is_number(v) for v in value)
        ):
            return "expected [lon, lat] array of 2 numbers"
        lon, lat = value
        if not -180.0 <= lon <= 180.0:
            return f"longitude {lon} outside [-180, 180]"
        if not -90.0 <= lat <= 90.0:
            return f"latitude {lat} outside [-90, 90]"
        return None
    raise RegistrySchemaError(f"unknown parameter kind: {kind!r}")


def validate_call(
    registry: ToolRegistry,
    name: str,
    args: Mapping[str, Any],
    *,
    strict: bool = True,
) -> ValidationReport:
    """Validate a tool call against the registry schema.

    Pure function of its inputs: a call is ok iff the tool is registered,
    all required params are present, no unknown params appear (strict
    mode), and every supplied value conforms to its declared kind. In
    lenient mode unknown args are downgraded to warnings.
    """
    desc = registry.get(name)
    if desc is None:
        issue = Issue(IssueCode.UNKNOWN_TOOL, None, f"tool {name!r} is not registered")
        return ValidationReport(ok=False, issues=(issue,))

    issues: list[Issue] = []
    warnings: list[Issue] = []

    for spec in desc.params:
        if spec.required and spec.name not in args:
            issues.append(
                Issue(
                    IssueCode.MISSING_REQUIRED,
                    spec.name,
                    f"required parameter {spec.name!r} missing",
                )
            )

    known = {p.name for p in desc.params}
    for arg_name in args:
        if arg_name not in known:
            issue = Issue(
                IssueCode.UNKNOWN_ARG,
                arg_name,
                f"{name} does not accept parameter {arg_name!r}",
            )
            if strict:
                issues.append(issue)
            else:
                warnings.append(issue)

    for arg_name, value in args.items():
        spec = desc.param(arg_name)
        if spec is None:
            continue
        detail = _conforms(value, spec.kind)
        if detail is not None:
            issues.append(Issue(IssueCode.TYPE_MISMATCH, arg_name, detail))

    return ValidationReport(
        ok=not issues, issues=tuple(issues), warnings=tuple(warnings)
    )


def list_by_category(
    registry: ToolRegistry, category: ToolCategory | str
) -> list[str]:
    """Names of tools in `category`, sorted lexicographically."""
    category = ToolCategory(category)
    return sorted(
        name for name in registry if registry[name].category is category
    )


def serialize_registry(registry: ToolRegistry) -> str:
    """Canonical registry file text: array of tool objects sorted by name."""
    return canonical_pretty([d.to_dict() for d in registry.descriptors()])


def parse_registry(text: str) -> ToolRegistry:
    """Parse registry file text produced by :func:`serialize_registry`."""
    import json

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegistrySchemaError(f"registry file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise RegistrySchemaError("registry file must be a JSON array of tools")
    return build_registry(ToolDescriptor.from_dict(entry) for entry in data)


def load_registry_file(path: Any) -> ToolRegistry:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_registry(fh.read())


def save_registry_file(registry: ToolRegistry, path: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_registry(registry))

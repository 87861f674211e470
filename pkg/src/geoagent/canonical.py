"""Canonical JSON serialization and content digests.

Every artifact this package writes (registry files, trajectory records,
replay reports, cache keys) goes through one serializer so that equal
values always produce equal bytes: keys sorted, UTF-8, LF line endings,
floats in their shortest round-trip form, no NaN/Infinity.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_dumps(value: Any) -> str:
    """Serialize a JSON-compatible value to its canonical text form."""
    return json.dumps(
        value,
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
        allow_nan=False,
    )


def canonical_pretty(value: Any) -> str:
    """Human-facing canonical form: sorted keys, 2-space indent, trailing LF."""
    text = json.dumps(
        value,
        sort_keys=True,
        ensure_ascii=False,
        indent=2,
        allow_nan=False,
    )
    return text + "\n"


def digest(value: Any) -> str:
    """SHA-256 hex digest of a value's canonical serialization."""
    return hashlib.sha256(canonical_dumps(value).encode("utf-8")).hexdigest()


def digest_text(text: str) -> str:
    """SHA-256 hex digest of raw text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def digest_file(path: Any) -> str:
    """SHA-256 hex digest of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def call_fingerprint(tool: str, args: Any) -> str:
    """Cache key for a tool call: digest over name + canonical args.

    Key ordering and float formatting are canonicalized, so equal calls
    always collide; values differing at the last bit never do.
    """
    return digest_text(tool + "\n" + canonical_dumps(args))

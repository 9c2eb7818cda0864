"""Canonical, versioned JSON documents written atomically."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .embedding import STORE_VERSION, EmbeddingStore
from .exceptions import DocumentError, VersionError
from .hierarchy import HIERARCHY_VERSION, Hierarchy


def dumps(doc) -> str:
    """Canonical form: sorted keys, compact separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write(path, data: str) -> None:
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _load(path, kind: str, version: int) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path}: malformed {kind} document at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict) or "version" not in doc:
        raise DocumentError(f"{path}: not a {kind} document (missing version)")
    if doc["version"] != version:
        raise VersionError(f"{path}: {kind} document version {doc['version']!r} is not supported (expected {version})")
    return doc


def save_hierarchy(h: Hierarchy, path) -> None:
    atomic_write(path, dumps(h.to_document()))


def load_hierarchy(path) -> Hierarchy:
    doc = _load(path, "hierarchy", HIERARCHY_VERSION)
    try:
        return Hierarchy.from_document(doc)
    except (KeyError, TypeError) as e:
        raise DocumentError(f"{path}: hierarchy document is missing field {e}") from None


def save_store(store: EmbeddingStore, path) -> None:
    atomic_write(path, dumps(store.to_document()))


def load_store(path) -> EmbeddingStore:
    doc = _load(path, "embedding store", STORE_VERSION)
    try:
        return EmbeddingStore.from_document(doc)
    except (KeyError, TypeError) as e:
        raise DocumentError(f"{path}: embedding store document is missing field {e}") from None

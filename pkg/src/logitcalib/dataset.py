"""Logit-score datasets with train/validation/test/unseen splits.

A record is one classifier forward pass: the raw logit vector, the true
class label (absent for records drawn from classes the classifier was
never trained on, kept in the ``unseen`` split), the split name, and an
optional free-form tag for per-group reporting.

File formats
------------
JSONL (canonical)
    One object per line: ``{"logits": [...], "label": "car" | null,
    "split": "test", "tag": "..."}``. ``save_dataset`` always writes a
    first line ``{"classes": ["a", "b", ...]}`` pinning the class
    registry (the class name to logit dimension mapping). Files from
    other producers may omit that header, in which case the registry is
    taken from the ``registry`` argument or inferred from labels in
    first-seen order.
CSV (convenience mirror)
    Header ``logit_0,...,logit_{K-1},label,split`` plus an optional
    trailing ``tag`` column, optionally preceded by a ``# classes: a,b,c``
    comment line. An empty label cell means the record is unlabeled.

Floats are written with 17 significant digits in both formats, so a
save/load round trip reproduces every logit bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from . import jsonio

SPLITS = ("train", "validation", "test", "unseen")
LABELED_SPLITS = ("train", "validation", "test")

_RECORD_KEYS = {"logits", "label", "split", "tag"}


@dataclass(frozen=True)
class ClassRegistry:
    """Ordered class names; position in the tuple is the logit dimension."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if len(self.names) < 2:
            raise DataError("a class registry needs at least 2 classes")
        if len(set(self.names)) != len(self.names):
            raise DataError(f"duplicate class names in registry: {self.names!r}")
        for name in self.names:
            if not name:
                raise DataError("class names must be non-empty")

    @property
    def k(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown class name {name!r}; registry has {self.names!r}") from None


@dataclass(frozen=True)
class LogitRecord:
    """One forward pass: logit vector, optional label index, split, tag."""

    logits: tuple[float, ...]
    label: int | None
    split: str
    tag: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "logits", tuple(float(v) for v in self.logits))
        if not self.logits:
            raise DataError("a record needs at least one logit component")
        for v in self.logits:
            if not math.isfinite(v):
                raise DataError(f"logit components must be finite, got {v!r}")
        if self.split not in SPLITS:
            raise DataError(f"unknown split {self.split!r}; expected one of {SPLITS}")
        if self.split == "unseen":
            if self.label is not None:
                raise DataError("unseen records must not carry a label")
        else:
            if self.label is None:
                raise DataError(f"{self.split!r} records must carry a label")
        if self.label is not None:
            object.__setattr__(self, "label", int(self.label))
            if not 0 <= self.label < len(self.logits):
                raise DataError(
                    f"label index {self.label} out of range for a "
                    f"{len(self.logits)}-dimensional logit vector"
                )
        if self.tag is not None:
            object.__setattr__(self, "tag", str(self.tag))


@dataclass(frozen=True)
class SplitDataset:
    """A class registry plus records; validated as a whole at construction."""

    registry: ClassRegistry
    records: tuple[LogitRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        k = self.registry.k
        train_seen = set()
        for i, rec in enumerate(self.records):
            if not isinstance(rec, LogitRecord):
                raise DataError(f"record {i} is not a LogitRecord")
            if len(rec.logits) != k:
                raise DataError(
                    f"record {i} has {len(rec.logits)} logits, registry has {k} classes"
                )
            if rec.label is not None and rec.label >= k:
                raise DataError(f"record {i} label index {rec.label} out of range for K={k}")
            if rec.split == "train":
                train_seen.add(rec.label)
        if train_seen:
            missing = [name for c, name in enumerate(self.registry.names) if c not in train_seen]
            if missing:
                raise DataError(
                    f"non-empty train split is missing classes: {', '.join(missing)}"
                )

    @property
    def k(self) -> int:
        return self.registry.k

    def split(self, name: str) -> tuple[LogitRecord, ...]:
        if name not in SPLITS:
            raise DataError(f"unknown split {name!r}; expected one of {SPLITS}")
        return tuple(r for r in self.records if r.split == name)

    def logit_matrix(self, split: str) -> np.ndarray:
        """Logits of one split as an (N, K) float64 matrix, file order."""
        recs = self.split(split)
        if not recs:
            return np.zeros((0, self.k), dtype=np.float64)
        return np.array([r.logits for r in recs], dtype=np.float64)

    def labels(self, split: str) -> np.ndarray:
        """Label indices of one split; raises if any record is unlabeled."""
        recs = self.split(split)
        out = np.zeros(len(recs), dtype=np.int64)
        for i, r in enumerate(recs):
            if r.label is None:
                raise DataError(f"split {split!r} contains unlabeled records")
            out[i] = r.label
        return out

    def counts(self) -> dict[str, int]:
        out = {s: 0 for s in SPLITS}
        for r in self.records:
            out[r.split] += 1
        return out

    def class_counts(self, split: str) -> list[int]:
        """Per-class record counts in one labeled split, registry order."""
        out = [0] * self.k
        for r in self.split(split):
            if r.label is not None:
                out[r.label] += 1
        return out


def _infer_format(path: str | os.PathLike, format: str | None) -> str:
    if format is not None:
        if format not in ("jsonl", "csv"):
            raise DataError(f"unknown dataset format {format!r}; expected 'jsonl' or 'csv'")
        return format
    suffix = os.path.splitext(str(path))[1].lower()
    if suffix in (".jsonl", ".json"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise DataError(f"cannot infer dataset format from path {path!r}; pass format=")


def _resolve_registry(
    explicit: ClassRegistry | None,
    embedded: tuple[str, ...] | None,
    label_order: Sequence[str],
    k: int,
    path: str | os.PathLike,
) -> ClassRegistry:
    if explicit is not None:
        if embedded is not None and tuple(embedded) != explicit.names:
            raise DataError(
                f"{path}: classes header {list(embedded)!r} disagrees with the "
                f"supplied registry {list(explicit.names)!r}"
            )
        return explicit
    if embedded is not None:
        return ClassRegistry(embedded)
    distinct = list(dict.fromkeys(label_order))
    if len(distinct) != k:
        raise DataError(
            f"{path}: cannot infer the class registry ({len(distinct)} distinct "
            f"labels for {k}-dimensional logits); pass registry= or add a classes header"
        )
    return ClassRegistry(tuple(distinct))


def _check_label_type(value, path, lineno) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise DataError(f"{path}:{lineno}: label must be a string or null, got {value!r}")
    return value


def _load_jsonl(path: str | os.PathLike, registry: ClassRegistry | None) -> SplitDataset:
    rows: list[tuple[int, list[float], str | None, str, str | None]] = []
    embedded: tuple[str, ...] | None = None
    k: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            if "classes" in obj:
                if rows or embedded is not None:
                    raise DataError(
                        f"{path}:{lineno}: the classes header must be the first line"
                    )
                if set(obj) != {"classes"}:
                    raise DataError(f"{path}:{lineno}: classes header has extra keys")
                names = obj["classes"]
                if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
                    raise DataError(f"{path}:{lineno}: classes must be a list of strings")
                embedded = tuple(names)
                continue
            unknown = set(obj) - _RECORD_KEYS
            if unknown:
                raise DataError(f"{path}:{lineno}: unknown keys {sorted(unknown)!r}")
            if "logits" not in obj or "split" not in obj:
                raise DataError(f"{path}:{lineno}: record needs 'logits' and 'split'")
            logits = obj["logits"]
            if not isinstance(logits, list) or not logits:
                raise DataError(f"{path}:{lineno}: logits must be a non-empty list")
            vals: list[float] = []
            for v in logits:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise DataError(f"{path}:{lineno}: logits must be numbers, got {v!r}")
                vals.append(float(v))
            label = _check_label_type(obj.get("label"), path, lineno)
            split = obj["split"]
            if not isinstance(split, str):
                raise DataError(f"{path}:{lineno}: split must be a string")
            tag = obj.get("tag")
            if tag is not None and not isinstance(tag, str):
                raise DataError(f"{path}:{lineno}: tag must be a string or null")
            if k is None:
                k = len(vals)
            elif len(vals) != k:
                raise DataError(
                    f"{path}:{lineno}: logit vector has length {len(vals)}, "
                    f"earlier records have length {k}"
                )
            rows.append((lineno, vals, label, split, tag))
    return _build_dataset(path, rows, embedded, k, registry)


def _load_csv(path: str | os.PathLike, registry: ClassRegistry | None) -> SplitDataset:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text_lines = fh.read().split("\n")
    if text_lines and text_lines[-1] == "":
        text_lines.pop()
    embedded: tuple[str, ...] | None = None
    start = 0
    lineno_base = 1
    if text_lines and text_lines[0].startswith("#"):
        comment = text_lines[0][1:].strip()
        if not comment.startswith("classes:"):
            raise DataError(f"{path}:1: unrecognized comment line {text_lines[0]!r}")
        names = [n.strip() for n in comment[len("classes:"):].split(",")]
        if not all(names):
            raise DataError(f"{path}:1: empty class name in classes comment")
        embedded = tuple(names)
        start = 1
        lineno_base = 2
    if start >= len(text_lines):
        raise DataError(f"{path}: missing CSV header row")
    reader = csv.reader(text_lines[start:])
    rows_iter = iter(reader)
    header = next(rows_iter)
    k = len(header) - 2
    has_tag = bool(header) and header[-1] == "tag"
    if has_tag:
        k -= 1
    expected = [f"logit_{i}" for i in range(max(k, 0))] + ["label", "split"]
    if has_tag:
        expected.append("tag")
    if k < 1 or header != expected:
        raise DataError(
            f"{path}:{lineno_base}: bad CSV header {header!r}; expected "
            f"logit_0..logit_{{K-1}},label,split and an optional trailing tag column"
        )
    rows: list[tuple[int, list[float], str | None, str, str | None]] = []
    for offset, cells in enumerate(rows_iter, start=1):
        lineno = lineno_base + offset
        if not cells:
            continue
        if len(cells) != len(expected):
            raise DataError(
                f"{path}:{lineno}: expected {len(expected)} cells, got {len(cells)}"
            )
        vals: list[float] = []
        for i in range(k):
            try:
                vals.append(float(cells[i]))
            except ValueError as exc:
                raise DataError(
                    f"{path}:{lineno}: bad float {cells[i]!r} in column logit_{i}"
                ) from exc
        label = cells[k] or None
        split = cells[k + 1]
        tag = (cells[k + 2] or None) if has_tag else None
        rows.append((lineno, vals, label, split, tag))
    return _build_dataset(path, rows, embedded, k, registry)


def _build_dataset(
    path: str | os.PathLike,
    rows: list[tuple[int, list[float], str | None, str, str | None]],
    embedded: tuple[str, ...] | None,
    k: int | None,
    registry: ClassRegistry | None,
) -> SplitDataset:
    if k is None:
        if embedded is not None:
            k = len(embedded)
        elif registry is not None:
            k = registry.k
        else:
            raise DataError(f"{path}: empty dataset with no class registry available")
    label_order = [label for _, _, label, _, _ in rows if label is not None]
    reg = _resolve_registry(registry, embedded, label_order, k, path)
    if reg.k != k:
        raise DataError(
            f"{path}: registry has {reg.k} classes but records have {k} logit components"
        )
    records = []
    for lineno, vals, label, split, tag in rows:
        try:
            idx = reg.index(label) if label is not None else None
            records.append(LogitRecord(tuple(vals), idx, split, tag))
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    try:
        return SplitDataset(reg, tuple(records))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def load_dataset(
    path: str | os.PathLike,
    format: str | None = None,
    registry: ClassRegistry | None = None,
) -> SplitDataset:
    """Load a dataset from JSONL or CSV; the format defaults to the suffix."""
    fmt = _infer_format(path, format)
    if fmt == "jsonl":
        return _load_jsonl(path, registry)
    return _load_csv(path, registry)


def save_dataset(
    data: SplitDataset,
    path: str | os.PathLike,
    format: str | None = None,
) -> None:
    """Write a dataset with exact float round-trip and a classes header."""
    fmt = _infer_format(path, format)
    if fmt == "jsonl":
        _save_jsonl(data, path)
    else:
        _save_csv(data, path)


def _save_jsonl(data: SplitDataset, path: str | os.PathLike) -> None:
    lines = [jsonio.dumps({"classes": list(data.registry.names)})]
    for rec in data.records:
        obj: dict = {
            "label": None if rec.label is None else data.registry.names[rec.label],
            "logits": list(rec.logits),
            "split": rec.split,
        }
        if rec.tag is not None:
            obj["tag"] = rec.tag
        lines.append(jsonio.dumps(obj))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _save_csv(data: SplitDataset, path: str | os.PathLike) -> None:
    for name in data.registry.names:
        if any(ch in name for ch in ",\"\n\r"):
            raise DataError(
                f"class name {name!r} cannot be encoded in the CSV classes comment; "
                f"use the JSONL format"
            )
    has_tag = any(r.tag is not None for r in data.records)
    k = data.k
    header = [f"logit_{i}" for i in range(k)] + ["label", "split"]
    if has_tag:
        header.append("tag")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# classes: " + ",".join(data.registry.names) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in data.records:
            cells = [jsonio.format_float(v) for v in rec.logits]
            cells.append("" if rec.label is None else data.registry.names[rec.label])
            cells.append(rec.split)
            if has_tag:
                cells.append(rec.tag or "")
            writer.writerow(cells)

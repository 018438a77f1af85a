"""LIBSVM-format datasets: parsing, label mapping, shuffling, min-max scaling."""

from __future__ import annotations

import gzip
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .sparse import SparseVector

TASKS = ("binary", "multiclass", "regression")
_POSITIVE = {"+1", "1", "+1.0", "1.0"}
_NEGATIVE = {"-1", "0", "-1.0", "0.0"}


class DataError(ValueError):
    pass


@dataclass
class Dataset:
    samples: list[tuple[SparseVector, object]]
    task: str = "binary"
    dim: int = 0
    raw_labels: list[str] = field(default_factory=list)
    label_map: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def n_classes(self) -> int:
        return len(self.label_map) if self.task == "multiclass" else 2


def _map_label(raw: str, task: str, label_map: dict, lineno: int):
    if task == "regression":
        try:
            y = float(raw)
        except ValueError:
            raise DataError(f"line {lineno}: label {raw!r} is not a number") from None
        if not math.isfinite(y):
            raise DataError(f"line {lineno}: label must be finite")
        return y
    if task == "binary":
        if raw in _POSITIVE:
            return 1
        if raw in _NEGATIVE:
            return -1
        raise DataError(f"line {lineno}: binary label must be +1/1 or -1/0, got {raw!r}")
    # multiclass: dense 1..m in first-seen order
    if raw not in label_map:
        label_map[raw] = len(label_map) + 1
    return label_map[raw]


def parse_features(tokens: Iterable[str], lineno: int = 0) -> SparseVector:
    idx: list[int] = []
    val: list[float] = []
    prev = 0
    for tok in tokens:
        a, sep, b = tok.partition(":")
        try:
            if not sep:
                raise ValueError
            i = int(a)
            v = float(b)
        except ValueError:
            raise DataError(f"line {lineno}: malformed feature {tok!r}") from None
        if i < 1:
            raise DataError(f"line {lineno}: feature indices are 1-based, got {i}")
        if i <= prev:
            raise DataError(f"line {lineno}: feature indices must be strictly increasing")
        prev = i
        if v != 0.0:
            idx.append(i)
            val.append(v)
    return SparseVector(np.array(idx, dtype=np.int64), np.array(val))


def parse_libsvm(lines: Iterable[str] | TextIO, task: str = "binary",
                 label_map: dict | None = None) -> Dataset:
    """Parse ``<label> <idx>:<val> ...`` lines; blank lines and ``#`` comments skipped.

    Explicit zero values are dropped. Pass the ``label_map`` of a training set
    when parsing its test split so multiclass indices agree.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    label_map = dict(label_map or {})
    samples = []
    raw_labels = []
    dim = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        x = parse_features(parts[1:], lineno)
        y = _map_label(parts[0], task, label_map, lineno)
        samples.append((x, y))
        raw_labels.append(parts[0])
        dim = max(dim, x.max_index)
    return Dataset(samples, task, dim, raw_labels, label_map)


def open_text(path: str | Path) -> TextIO:
    path = Path(path)
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def load_libsvm(path: str | Path, task: str = "binary", label_map: dict | None = None) -> Dataset:
    with open_text(path) as fh:
        return parse_libsvm(fh, task, label_map)


def serialize(data: Dataset) -> str:
    lines = []
    for (x, _), raw in zip(data.samples, data.raw_labels):
        feats = " ".join(f"{i}:{v!r}" for i, v in x.items())
        lines.append(f"{raw} {feats}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


def shuffle(data: Dataset, seed: int) -> Dataset:
    """Seeded Fisher-Yates permutation of the samples."""
    rng = np.random.default_rng(seed)
    order = list(range(len(data)))
    for i in range(len(order) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return Dataset([data.samples[i] for i in order], data.task, data.dim,
                   [data.raw_labels[i] for i in order] if data.raw_labels else [],
                   dict(data.label_map))


@dataclass
class MinMaxTable:
    lo: dict[int, float]
    hi: dict[int, float]

    def apply(self, x: SparseVector) -> SparseVector:
        """Scale explicit entries to [0, 1]; unseen features pass through clipped."""
        out = np.empty_like(x.values)
        for k, (i, v) in enumerate(x.items()):
            lo = self.lo.get(i)
            if lo is None:
                out[k] = min(max(v, 0.0), 1.0)
                continue
            span = self.hi[i] - lo
            out[k] = 0.0 if span == 0 else min(max((v - lo) / span, 0.0), 1.0)
        # zeros produced by scaling stay stored so the entry set is unchanged
        return SparseVector(x.indices, out)

    def transform(self, data: Dataset) -> Dataset:
        return Dataset([(self.apply(x), y) for x, y in data.samples], data.task, data.dim,
                       list(data.raw_labels), dict(data.label_map))


def normalize_minmax(data: Dataset, table: MinMaxTable | None = None) -> tuple[Dataset, MinMaxTable]:
    """Min-max scale explicit entries per feature; absent entries stay absent.

    Constant features map to 0. With a fitted ``table`` (e.g. from the training
    split) values outside the fitted range are clipped into [0, 1].
    """
    if table is None:
        lo: dict[int, float] = {}
        hi: dict[int, float] = {}
        for x, _ in data.samples:
            for i, v in x.items():
                if i in lo:
                    lo[i] = min(lo[i], v)
                    hi[i] = max(hi[i], v)
                else:
                    lo[i] = hi[i] = v
        table = MinMaxTable(lo, hi)
    return table.transform(data), table

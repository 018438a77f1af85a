"""Sparse feature vectors and a dense row store for batched distance queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted (index, value) pairs of a feature vector.

    Indices are 1-based feature ids as they appear in LIBSVM files. Absent
    indices are zero.
    """

    indices: np.ndarray
    values: np.ndarray
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        val = np.ascontiguousarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D arrays of equal length")
        if idx.size and (idx[0] < 1 or np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be positive and strictly increasing")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "_key", (idx.tobytes(), val.tobytes()))

    @classmethod
    def from_dict(cls, entries: Mapping[int, float]) -> "SparseVector":
        items = sorted(entries.items())
        return cls(np.array([i for i, _ in items], dtype=np.int64),
                   np.array([v for _, v in items], dtype=np.float64))

    @classmethod
    def from_dense(cls, dense: Iterable[float]) -> "SparseVector":
        arr = np.asarray(list(dense) if not isinstance(dense, np.ndarray) else dense,
                         dtype=np.float64)
        nz = np.flatnonzero(arr)
        return cls(nz + 1, arr[nz])

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @property
    def max_index(self) -> int:
        return int(self.indices[-1]) if self.indices.size else 0

    def key(self) -> tuple:
        """Hashable identity of the point (exact bit pattern of its entries)."""
        return self._key

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim, dtype=np.float64)
        out[self.indices - 1] = self.values
        return out

    def sq_norm(self) -> float:
        return float(np.dot(self.values, self.values))

    def items(self):
        return zip(self.indices.tolist(), self.values.tolist())


def _merge(a: SparseVector, b: SparseVector):
    # union of indices with aligned values, absent entries as 0
    union = np.union1d(a.indices, b.indices)
    va = np.zeros(union.size)
    vb = np.zeros(union.size)
    va[np.searchsorted(union, a.indices)] = a.values
    vb[np.searchsorted(union, b.indices)] = b.values
    return va, vb


def sq_dist(a: SparseVector, b: SparseVector) -> float:
    """Squared Euclidean distance, computed over the merged index set."""
    va, vb = _merge(a, b)
    d = va - vb
    return float(np.dot(d, d))


def inf_dist(a: SparseVector, b: SparseVector) -> float:
    va, vb = _merge(a, b)
    if va.size == 0:
        return 0.0
    return float(np.max(np.abs(va - vb)))


def dot(a: SparseVector, b: SparseVector) -> float:
    common, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True,
                                    return_indices=True)
    return float(np.dot(a.values[ia], b.values[ib]))


class PointBank:
    """Append-only dense storage of points for vectorized distance queries.

    Rows are never removed or rewritten, so row numbers are stable handles.
    The column count grows when a point with a larger feature index arrives.
    """

    def __init__(self, dim: int = 0, capacity: int = 16):
        self._dim = max(int(dim), 1)
        self._rows = np.zeros((capacity, self._dim))
        self._n = 0
        self.points: list[SparseVector] = []

    def __len__(self) -> int:
        return self._n

    @property
    def dim(self) -> int:
        return self._dim

    def _ensure(self, rows: int, dim: int) -> None:
        cap, cur_dim = self._rows.shape
        if rows <= cap and dim <= cur_dim:
            return
        new = np.zeros((max(cap * 2, rows), max(cur_dim, dim)))
        new[: self._n, :cur_dim] = self._rows[: self._n]
        self._rows = new
        self._dim = new.shape[1]

    def append(self, x: SparseVector) -> int:
        """Store x and return its 0-based row number."""
        self._ensure(self._n + 1, x.max_index)
        self._rows[self._n, x.indices - 1] = x.values
        self.points.append(x)
        self._n += 1
        return self._n - 1

    def dense(self, x: SparseVector) -> np.ndarray:
        """x as a dense row over the bank's current columns (extra features kept)."""
        dim = max(self._dim, x.max_index)
        return x.to_dense(dim)

    def sq_dists(self, x: SparseVector) -> np.ndarray:
        """Squared distances from x to every stored row, in row order."""
        if self._n == 0:
            return np.zeros(0)
        xd = self.dense(x)
        rows = self._rows[: self._n]
        diff = rows - xd[: self._dim]
        out = np.einsum("ij,ij->i", diff, diff)
        if xd.size > self._dim:
            tail = xd[self._dim:]
            out = out + float(np.dot(tail, tail))
        return out

    def inf_dists(self, x: SparseVector) -> np.ndarray:
        if self._n == 0:
            return np.zeros(0)
        xd = self.dense(x)
        out = np.abs(self._rows[: self._n] - xd[: self._dim]).max(axis=1)
        if xd.size > self._dim:
            out = np.maximum(out, np.abs(xd[self._dim:]).max())
        return out

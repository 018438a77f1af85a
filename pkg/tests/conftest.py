import numpy as np
import pytest

from avm.sparse import SparseVector


def sv(*values):
    """Dense coordinates -> SparseVector (zeros dropped)."""
    return SparseVector.from_dense(np.asarray(values, dtype=float))


def blob_stream(n, seed, dim=2, sep=1.5, noise=1.0, label_flip=0.0):
    """Two Gaussian clusters at +/- sep along every axis; labels in {-1, +1}."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        y = 1 if rng.random() < 0.5 else -1
        x = rng.normal(scale=noise, size=dim) + y * sep
        if rng.random() < label_flip:
            y = -y
        out.append((SparseVector.from_dense(x), y))
    return out


def regression_stream(n, seed, dim=2):
    """Smooth target in [-1, 1] on a bounded box."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = rng.uniform(-1, 1, size=dim)
        y = float(np.clip(np.sin(2 * x[0]) * np.cos(x[-1]) + rng.normal(scale=0.1), -1, 1))
        out.append((SparseVector.from_dense(x), y))
    return out


@pytest.fixture
def blobs():
    return blob_stream(400, 0)


def dense_matrix(points, dim=None):
    dim = dim or max((p.max_index for p in points), default=1) or 1
    return np.stack([p.to_dense(dim) for p in points]) if points else np.zeros((0, dim))


def min_pairwise(points, metric="sq", chunk=256):
    """Smallest pairwise squared-l2 (or l_inf) distance by brute force over all pairs."""
    m = dense_matrix(points)
    best = np.inf
    for lo in range(1, len(m), chunk):
        block = m[lo:lo + chunk]
        diff = block[:, None, :] - m[None, :lo + len(block), :]
        d = np.einsum("ijk,ijk->ij", diff, diff) if metric == "sq" else np.abs(diff).max(axis=2)
        # keep pairs (i, j) with j < i only
        mask = np.arange(lo + len(block))[None, :] < (lo + np.arange(len(block)))[:, None]
        best = min(best, float(d[mask].min()))
    return best

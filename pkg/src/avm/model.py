"""Kernel expansion w = scale * sum_i coef_i Phi(p_i) with a cached squared norm.

The global ``scale`` turns the per-step shrink w <- (1 - eta*lam) w into one
scalar multiply. Expansion points are keyed so that repeated updates on the
same point (or the same coverage cell) accumulate into one coefficient.
"""

from __future__ import annotations

import math
from typing import Hashable, Iterable, TextIO

import numpy as np

from .kernel import KernelSpec
from .loss import LossSpec, loss_value
from .sparse import PointBank, SparseVector

# below this the scale is folded into the coefficients
SCALE_FLOOR = 1e-8


class KernelModel:
    def __init__(self, kernel: KernelSpec, dim: int = 0,
                 bank: PointBank | None = None, keys: dict | None = None):
        self.kernel = kernel
        self.bank = bank if bank is not None else PointBank(dim)
        self.keys: dict[Hashable, int] = keys if keys is not None else {}
        self._coef = np.zeros(16)
        self.scale = 1.0
        self.sq_norm = 0.0
        self.kevals = 0

    # --- expansion points -------------------------------------------------

    def __len__(self) -> int:
        """Number of registered expansion points."""
        return len(self.bank)

    @property
    def model_size(self) -> int:
        return len(self.bank)

    @property
    def support_size(self) -> int:
        """Expansion points whose effective coefficient is nonzero."""
        return int(np.count_nonzero(self.coefs))

    @property
    def coefs(self) -> np.ndarray:
        """Raw (unscaled) coefficients in row order; a view."""
        n = len(self.bank)
        if self._coef.size < n:
            self._grow(n)
        return self._coef[:n]

    def effective_coefs(self) -> np.ndarray:
        return self.scale * self.coefs

    def _grow(self, n: int) -> None:
        new = np.zeros(max(n, 2 * self._coef.size))
        new[: self._coef.size] = self._coef
        self._coef = new

    def register(self, key: Hashable, point: SparseVector) -> int:
        """Row of the expansion point under ``key``, adding it with coefficient 0."""
        row = self.keys.get(key)
        if row is None:
            row = self.bank.append(point)
            self.keys[key] = row
            if self._coef.size <= row:
                self._grow(row + 1)
        return row

    # --- evaluation -------------------------------------------------------

    def kernel_row(self, x: SparseVector) -> np.ndarray:
        """K(p_i, x) for every expansion point p_i."""
        self.kevals += len(self.bank)
        return self.kernel.profile(self.bank.sq_dists(x))

    def predict(self, x: SparseVector) -> float:
        if len(self.bank) == 0:
            return 0.0
        return self.scale * float(np.dot(self.coefs, self.kernel_row(x)))

    def predict_row(self, row: int) -> float:
        """w . Phi(p_row) for a stored expansion point."""
        return self.predict(self.bank.points[row])

    def gram(self) -> np.ndarray:
        pts = self.bank.points
        d2 = np.array([self.bank.sq_dists(p) for p in pts]).reshape(len(pts), len(pts))
        return self.kernel.profile(d2)

    def gram_sq_norm(self) -> float:
        """||w||^2 recomputed from the Gram matrix (O(S^2))."""
        c = self.effective_coefs()
        return float(c @ self.gram() @ c)

    @property
    def norm(self) -> float:
        return math.sqrt(max(self.sq_norm, 0.0))

    # --- updates ----------------------------------------------------------

    def sgd_update(self, eta: float, lam: float, alpha: float, row: int,
                   f_row: float | None = None, shrink: float | None = None) -> None:
        """w <- shrink * w - eta * alpha * Phi(p_row), shrink = 1 - eta*lam.

        ``f_row`` is w . Phi(p_row) before the update; it is computed when
        omitted and needed for the norm cache.
        """
        if shrink is None:
            shrink = 1.0 - eta * lam
        coefs = self.coefs
        step = eta * alpha
        if shrink == 0.0:
            coefs[:] = 0.0
            self.scale = 1.0
            self.sq_norm = step * step
            if step != 0.0:
                coefs[row] = -step
            return
        if step != 0.0:
            if f_row is None:
                f_row = self.predict_row(row)
            sq = shrink * shrink * self.sq_norm - 2.0 * shrink * step * f_row + step * step
        else:
            sq = shrink * shrink * self.sq_norm
        self.sq_norm = max(sq, 0.0)
        self.scale *= shrink
        if step != 0.0:
            coefs[row] -= step / self.scale
        if self.scale < SCALE_FLOOR:
            self.fold_scale()

    def fold_scale(self) -> None:
        self.coefs[:] *= self.scale
        self.scale = 1.0

    def project_ball(self, radius: float) -> bool:
        """Rescale w onto the ball of the given radius; True if it moved."""
        if self.sq_norm <= radius * radius:
            return False
        self.scale *= radius / math.sqrt(self.sq_norm)
        self.sq_norm = radius * radius
        if self.scale < SCALE_FLOOR:
            self.fold_scale()
        return True

    def copy_with(self, effective: np.ndarray, sq_norm: float | None = None) -> "KernelModel":
        """A model over the same expansion points with the given effective coefficients."""
        m = KernelModel(self.kernel, bank=self.bank, keys=self.keys)
        m._coef = np.array(effective, dtype=float)
        if m._coef.size < len(self.bank):
            m._grow(len(self.bank))
        m.sq_norm = m.gram_sq_norm() if sq_norm is None else sq_norm
        return m

    def frozen(self) -> "KernelModel":
        return self.copy_with(self.effective_coefs(), self.sq_norm)


class AveragedModel:
    """Running mean of iterates w_t for t >= start (start=1 is the full average)."""

    def __init__(self, start: int = 1):
        if start < 1:
            raise ValueError("start iteration must be >= 1")
        self.start = int(start)
        self.count = 0
        self.mean = np.zeros(0)
        self._last_t = 0

    @classmethod
    def suffix(cls, fraction: float, horizon: int) -> "AveragedModel":
        """Average of the last ``fraction`` of ``horizon`` iterates."""
        if not 0 < fraction < 1:
            raise ValueError("suffix fraction must lie in (0, 1)")
        return cls(math.ceil((1.0 - fraction) * horizon) + 1)

    def accumulate(self, m: KernelModel, t: int) -> None:
        if t <= self._last_t:
            raise ValueError("iterations must be strictly increasing")
        self._last_t = t
        if t < self.start:
            return
        eff = m.effective_coefs()
        if self.mean.size < eff.size:
            # points first seen now had coefficient 0 in every earlier iterate
            self.mean = np.concatenate([self.mean, np.zeros(eff.size - self.mean.size)])
        self.count += 1
        self.mean += (eff - self.mean) / self.count

    def as_model(self, like: KernelModel) -> KernelModel:
        eff = np.zeros(len(like.bank))
        eff[: self.mean.size] = self.mean
        return like.copy_with(eff)


def accumulate_average(avg: AveragedModel, m: KernelModel, t: int) -> AveragedModel:
    avg.accumulate(m, t)
    return avg


def objective(m: KernelModel, data: Iterable[tuple[SparseVector, float]], lam: float,
              loss: LossSpec) -> float:
    """(lam/2)||w||^2 + mean loss over the data."""
    total = 0.0
    n = 0
    for x, y in data:
        total += loss_value(loss, m.predict(x), y)
        n += 1
    if n == 0:
        raise ValueError("objective needs a nonempty dataset")
    return 0.5 * lam * m.sq_norm + total / n


# --- snapshot format --------------------------------------------------------

SNAPSHOT_MAGIC = "avm-model"


def write_snapshot(fh: TextIO, m: KernelModel, geometry: str, delta: float, dim: int) -> None:
    k = m.kernel
    fh.write(f"{SNAPSHOT_MAGIC} v1 {k.kind} {k.gamma:.17g} {geometry} {delta:.17g} {dim}\n")
    for i, p in enumerate(m.bank.points, start=1):
        pairs = " ".join(f"{j}:{v:.17g}" for j, v in p.items())
        fh.write(f"core {i} {pairs}".rstrip() + "\n")
    for i, c in enumerate(m.effective_coefs(), start=1):
        fh.write(f"coef {i} {c:.17g}\n")


def read_snapshot(fh: TextIO) -> tuple[KernelModel, dict]:
    header = fh.readline().split()
    if len(header) != 7 or header[0] != SNAPSHOT_MAGIC or header[1] != "v1":
        raise ValueError("not an avm-model v1 snapshot")
    meta = {"kernel": header[2], "gamma": float(header[3]), "geometry": header[4],
            "delta": float(header[5]), "dim": int(header[6])}
    m = KernelModel(KernelSpec(meta["kernel"], meta["gamma"]), dim=meta["dim"])
    coefs: dict[int, float] = {}
    for lineno, line in enumerate(fh, start=2):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "core":
            idx = int(parts[1])
            entries = {int(a): float(b) for a, b in (p.split(":") for p in parts[2:])}
            if m.register(("snap", idx), SparseVector.from_dict(entries)) != idx - 1:
                raise ValueError(f"line {lineno}: core indices must be consecutive from 1")
        elif parts[0] == "coef":
            coefs[int(parts[1])] = float(parts[2])
        else:
            raise ValueError(f"line {lineno}: unknown record {parts[0]!r}")
    for idx, v in coefs.items():
        m.coefs[idx - 1] = v
    m.sq_norm = m.gram_sq_norm()
    return m, meta

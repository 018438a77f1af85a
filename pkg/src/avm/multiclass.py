"""Multiclass AVM: one kernel expansion per class over a shared coverage.

The loss acts on the margin a = w_y . Phi(x) - max_{j != y} w_j . Phi(x);
each step pushes w_y up and the strongest competitor down by the same amount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coverage import Coverage
from .kernel import KernelSpec
from .learner import LearnerConfig, schedule_prob
from .loss import LabelError
from .model import SCALE_FLOOR
from .sparse import PointBank, SparseVector

MULTICLASS_LOSSES = ("hinge", "logistic")


def margin_grad(kind: str, a: float) -> float:
    """l'(a) for l(a) = max(0, 1 - a) or log(1 + e^-a)."""
    if kind == "hinge":
        return -1.0 if a < 1 else 0.0
    if a > 0:
        e = math.exp(-a)
        return -e / (1.0 + e)
    return -1.0 / (1.0 + math.exp(a))


class MulticlassModel:
    """W = [w_1..w_m], w_j = scale * sum_i coef[j, i] Phi(p_i)."""

    def __init__(self, kernel: KernelSpec, n_classes: int, dim: int = 0,
                 bank: PointBank | None = None, keys: dict | None = None):
        if n_classes < 2:
            raise ValueError("need at least two classes")
        self.kernel = kernel
        self.n_classes = n_classes
        self.bank = bank if bank is not None else PointBank(dim)
        self.keys = keys if keys is not None else {}
        self._coef = np.zeros((n_classes, 16))
        self.scale = 1.0
        self.kevals = 0

    @property
    def model_size(self) -> int:
        return len(self.bank)

    @property
    def coefs(self) -> np.ndarray:
        n = len(self.bank)
        if self._coef.shape[1] < n:
            new = np.zeros((self.n_classes, max(n, 2 * self._coef.shape[1])))
            new[:, : self._coef.shape[1]] = self._coef
            self._coef = new
        return self._coef[:, :n]

    def effective_coefs(self) -> np.ndarray:
        return self.scale * self.coefs

    def register(self, key, point: SparseVector) -> int:
        row = self.keys.get(key)
        if row is None:
            row = self.bank.append(point)
            self.keys[key] = row
        return row

    def scores(self, x: SparseVector) -> np.ndarray:
        if len(self.bank) == 0:
            return np.zeros(self.n_classes)
        self.kevals += len(self.bank)
        k = self.kernel.profile(self.bank.sq_dists(x))
        return self.scale * (self.coefs @ k)

    def predict(self, x: SparseVector) -> int:
        """1-based class with the largest score; lowest index wins ties."""
        return int(np.argmax(self.scores(x))) + 1

    def shrink(self, factor: float) -> None:
        if factor == 0.0:
            self.coefs[:] = 0.0
            self.scale = 1.0
            return
        self.scale *= factor
        if self.scale < SCALE_FLOOR:
            self.coefs[:] *= self.scale
            self.scale = 1.0

    def copy_with(self, effective: np.ndarray) -> "MulticlassModel":
        m = MulticlassModel(self.kernel, self.n_classes, bank=self.bank, keys=self.keys)
        m._coef = np.array(effective, dtype=float)
        return m


def mc_predict(model: MulticlassModel, x: SparseVector) -> int:
    return model.predict(x)


@dataclass
class MulticlassLearner:
    config: LearnerConfig
    n_classes: int
    horizon: int | None = None
    t: int = field(init=False, default=0)
    last_update: tuple | None = field(init=False, default=None)

    def __post_init__(self):
        cfg = self.config
        if cfg.loss.kind not in MULTICLASS_LOSSES:
            raise ValueError(f"multiclass supports {MULTICLASS_LOSSES}, got {cfg.loss.kind!r}")
        self.model = MulticlassModel(cfg.kernel, self.n_classes, cfg.dim)
        self.coverage = (Coverage(cfg.coverage, cfg.delta, cfg.dim or None)
                         if cfg.algorithm == "avm" else None)
        self.rng = np.random.default_rng(cfg.seed)
        self._avg = None
        self._avg_count = 0
        self._avg_start = 1
        if cfg.output == "suffix":
            if self.horizon is None:
                raise ValueError("suffix averaging needs a known horizon")
            self._avg_start = math.ceil((1.0 - cfg.suffix_fraction) * self.horizon) + 1
        if cfg.output != "final":
            self._avg = np.zeros((self.n_classes, 0))

    @property
    def cells(self) -> int:
        return len(self.coverage) if self.coverage is not None else 0

    @property
    def kevals(self) -> int:
        return self.model.kevals

    def _accumulate(self) -> None:
        if self._avg is None or self.t < self._avg_start:
            return
        eff = self.model.effective_coefs()
        if self._avg.shape[1] < eff.shape[1]:
            pad = np.zeros((self.n_classes, eff.shape[1] - self._avg.shape[1]))
            self._avg = np.hstack([self._avg, pad])
        self._avg_count += 1
        self._avg += (eff - self._avg) / self._avg_count

    def step(self, x: SparseVector, y: int) -> int:
        """One update on (x, y); returns the class predicted before the update."""
        if not (isinstance(y, (int, np.integer)) and 1 <= y <= self.n_classes):
            raise LabelError(f"class label must be an integer in 1..{self.n_classes}, got {y!r}")
        cfg = self.config
        self.t += 1
        t = self.t
        s = self.model.scores(x)
        predicted = int(np.argmax(s)) + 1
        yi = y - 1
        rivals = s.copy()
        rivals[yi] = -np.inf
        zi = int(np.argmax(rivals))
        g = margin_grad(cfg.loss.kind, float(s[yi] - s[zi]))
        self._accumulate()

        self.model.shrink((t - 1) / t)
        p = schedule_prob(cfg.beta, cfg.rho, t)
        if self.coverage is None or p >= 1.0 or p <= 0.0:
            z = self.coverage is not None and p >= 1.0
        else:
            z = self.rng.random() < p
        row = None
        if z:
            cell = self.coverage.assign(x)
            row = self.model.register(("core", cell.cell_index),
                                      self.coverage.core_point(cell.cell_index))
        elif g != 0.0:
            row = self.model.register(("pt", x.key()), x)
        self.last_update = None
        if g != 0.0:
            v = g / (cfg.lam * t) / self.model.scale
            coefs = self.model.coefs
            coefs[yi, row] -= v
            coefs[zi, row] += v
            self.last_update = (row, yi, zi, v)
        return predicted

    def output_model(self) -> MulticlassModel:
        if self._avg is None:
            return self.model.copy_with(self.model.effective_coefs())
        eff = np.zeros((self.n_classes, len(self.model.bank)))
        eff[:, : self._avg.shape[1]] = self._avg
        return self.model.copy_with(eff)

    def evaluate(self, model: MulticlassModel, test: Sequence[tuple[SparseVector, int]]) -> float:
        return sum(model.predict(x) == y for x, y in test) / len(test)


def mc_step(learner: MulticlassLearner, x: SparseVector, y: int) -> MulticlassLearner:
    learner.step(x, y)
    return learner


def write_mc_snapshot(fh, m: MulticlassModel, geometry: str, delta: float, dim: int) -> None:
    """Binary snapshot layout plus a ``classes`` line; ``coef`` rows carry one value per class."""
    k = m.kernel
    fh.write(f"avm-model v1 {k.kind} {k.gamma:.17g} {geometry} {delta:.17g} {dim}\n")
    fh.write(f"classes {m.n_classes}\n")
    for i, p in enumerate(m.bank.points, start=1):
        pairs = " ".join(f"{j}:{v:.17g}" for j, v in p.items())
        fh.write(f"core {i} {pairs}".rstrip() + "\n")
    eff = m.effective_coefs()
    for i in range(eff.shape[1]):
        fh.write(f"coef {i + 1} " + " ".join(f"{v:.17g}" for v in eff[:, i]) + "\n")

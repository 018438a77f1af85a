"""Online kernel learners: plain kernel SGD and the Approximation Vector Machine.

Both use the step size eta_t = 1/(lam*t). The AVM snaps the expansion point
of each update to the core of the coverage cell containing the instance,
with probability p_t = max(0, 1 - beta/t^rho), which keeps the number of
expansion points bounded by the number of cells plus the non-snapped steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .coverage import Coverage
from .kernel import KernelSpec
from .loss import LabelError, LossSpec, check_label, loss_grad_scalar
from .metrics import MetricsTrace, online_metrics_update
from .model import AveragedModel, KernelModel
from .sparse import SparseVector

ALGORITHMS = ("avm", "sgd")
OUTPUT_MODES = ("final", "average", "suffix")


def schedule_prob(beta: float, rho: float, t: int) -> float:
    """Probability of approximating at step t: max(0, 1 - beta / t**rho)."""
    if t < 1:
        raise ValueError("t starts at 1")
    if beta == 0:
        return 1.0
    if math.isinf(beta):
        return 0.0
    return max(0.0, 1.0 - beta / t ** rho)


@dataclass
class LearnerConfig:
    lam: float
    loss: LossSpec
    kernel: KernelSpec
    algorithm: str = "avm"
    coverage: str = "sphere"
    delta: float = 1.0
    beta: float = 0.0
    rho: float = 1.0
    output: str = "final"
    suffix_fraction: float = 0.5
    seed: int = 0
    y_max: float | None = None  # None: track the running max |y|
    dim: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "avm" and not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.beta < 0 or not self.rho > 0:
            raise ValueError("need beta >= 0 and rho > 0")
        if self.output not in OUTPUT_MODES:
            raise ValueError(f"unknown output mode {self.output!r}")
        if self.output == "suffix" and not 0 < self.suffix_fraction < 1:
            raise ValueError("suffix fraction must lie in (0, 1)")

    @property
    def projects(self) -> bool:
        """l2 loss with lam <= 1 keeps w inside B(0, y_max / sqrt(lam))."""
        return self.algorithm == "avm" and self.loss.kind == "l2" and self.lam <= 1


@dataclass
class Learner:
    """Mutable learner state. ``step`` consumes one labelled instance."""

    config: LearnerConfig
    horizon: int | None = None
    model: KernelModel = field(init=False)
    coverage: Coverage | None = field(init=False)
    avg: AveragedModel | None = field(init=False)
    t: int = field(init=False, default=0)
    y_max_seen: float = field(init=False, default=0.0)
    approximations: int = field(init=False, default=0)

    def __post_init__(self):
        cfg = self.config
        self.model = KernelModel(cfg.kernel, cfg.dim)
        self.coverage = (Coverage(cfg.coverage, cfg.delta, cfg.dim or None)
                         if cfg.algorithm == "avm" else None)
        self.rng = np.random.default_rng(cfg.seed)
        if cfg.output == "average":
            self.avg = AveragedModel(1)
        elif cfg.output == "suffix":
            if self.horizon is None:
                raise ValueError("suffix averaging needs a known horizon")
            self.avg = AveragedModel.suffix(cfg.suffix_fraction, self.horizon)
        else:
            self.avg = None

    @property
    def cells(self) -> int:
        return len(self.coverage) if self.coverage is not None else 0

    @property
    def ball_radius(self) -> float:
        y_max = self.config.y_max if self.config.y_max is not None else self.y_max_seen
        return y_max / math.sqrt(self.config.lam)

    def step(self, x: SparseVector, y: float) -> float:
        """Learn from (x, y); returns the prediction w_t . Phi(x) made before the update."""
        if self.config.algorithm == "sgd":
            return self.sgd_step(x, y)
        return self.avm_step(x, y)

    def _begin(self, x: SparseVector, y: float):
        check_label(self.config.loss, y)
        self.t += 1
        self.y_max_seen = max(self.y_max_seen, abs(y))
        f = self.model.predict(x)
        if self.avg is not None:
            self.avg.accumulate(self.model, self.t)
        return f, loss_grad_scalar(self.config.loss, f, y)

    def _update(self, alpha: float, row: int | None, f_row: float | None) -> None:
        t = self.t
        eta = 1.0 / (self.config.lam * t)
        # eta*lam is exactly 1/t
        self.model.sgd_update(eta, self.config.lam, alpha, row if row is not None else -1,
                              f_row=f_row, shrink=(t - 1) / t)
        if self.config.projects:
            self.model.project_ball(self.ball_radius)

    def sgd_step(self, x: SparseVector, y: float) -> float:
        f, alpha = self._begin(x, y)
        row = None
        if alpha != 0.0:
            row = self.model.register(("pt", x.key()), x)
        self._update(alpha, row, f)
        return f

    def avm_step(self, x: SparseVector, y: float) -> float:
        f, alpha = self._begin(x, y)
        p = schedule_prob(self.config.beta, self.config.rho, self.t)
        if p >= 1.0:
            z = True
        elif p <= 0.0:
            z = False
        else:
            z = self.rng.random() < p
        row = None
        f_row = f
        if z:
            self.approximations += 1
            cell = self.coverage.assign(x)
            core = self.coverage.core_point(cell.cell_index)
            row = self.model.register(("core", cell.cell_index), core)
            if not cell.is_new and alpha != 0.0:
                f_row = self.model.predict(core)
        elif alpha != 0.0:
            row = self.model.register(("pt", x.key()), x)
        self._update(alpha, row, f_row)
        return f

    def output_model(self) -> KernelModel:
        if self.avg is None:
            return self.model.frozen()
        return self.avg.as_model(self.model)

    @property
    def kevals(self) -> int:
        return self.model.kevals


def _cadence(total: int | None, every: int | None) -> int:
    if every:
        return every
    if total:
        return max(1, math.ceil(total / 100))
    return 1000


def run_stream(config: LearnerConfig, stream: Iterable[tuple[SparseVector, float]],
               task: str = "binary", checkpoint_every: int | None = None,
               total: int | None = None, learner=None):
    """Predict-then-learn over a stream; returns (output model, trace).

    Label errors are re-raised with the 1-based position of the instance.
    """
    if total is None and isinstance(stream, Sequence):
        total = len(stream)
    if learner is None:
        learner = Learner(config, horizon=total)
    every = _cadence(total, checkpoint_every)
    trace = MetricsTrace(task)
    for pos, (x, y) in enumerate(stream, start=1):
        try:
            pred = learner.step(x, y)
        except LabelError as exc:
            raise LabelError(f"instance {pos}: {exc}") from None
        online_metrics_update(trace, pred, y, task)
        if trace.t % every == 0:
            _checkpoint(trace, learner)
    if not trace.checkpoints or trace.checkpoints[-1]["t"] != trace.t:
        _checkpoint(trace, learner)
    out = learner.output_model()
    trace.finish(*_sizes(learner))
    return out, trace


def _sizes(learner) -> tuple[int, int, int]:
    return learner.model.model_size, learner.cells, learner.kevals


def _checkpoint(trace: MetricsTrace, learner) -> None:
    trace.checkpoint(*_sizes(learner))


def evaluate(model: KernelModel, test: Sequence[tuple[SparseVector, float]],
             task: str = "binary") -> float:
    """Accuracy for binary tasks, RMSE for regression."""
    if task == "regression":
        se = sum((model.predict(x) - y) ** 2 for x, y in test)
        return math.sqrt(se / len(test))
    hits = sum((1 if model.predict(x) >= 0 else -1) == y for x, y in test)
    return hits / len(test)


def run_batch(config: LearnerConfig, train: Sequence[tuple[SparseVector, float]],
              test: Sequence[tuple[SparseVector, float]], iters: int,
              task: str = "binary", checkpoint_every: int | None = None,
              learner=None):
    """Train on ``iters`` draws (with replacement) from ``train``; score on ``test``.

    Returns (test accuracy or RMSE, output model, trace).
    """
    if not train or not test:
        raise ValueError("batch mode needs nonempty train and test sets")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    # sampling uses its own stream so the schedule's generator is untouched
    picks = np.random.default_rng([config.seed, 1]).integers(0, len(train), size=iters)
    stream = (train[i] for i in picks)
    model, trace = run_stream(config, stream, task, checkpoint_every, total=iters,
                              learner=learner)
    if learner is not None and hasattr(learner, "evaluate"):
        score = learner.evaluate(model, test)
    else:
        score = evaluate(model, test, task)
    trace.summary["test_metric"] = score
    return score, model, trace

"""Online metrics: mistake rate / RMSE accumulated before each learning step."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

TASKS = ("binary", "multiclass", "regression")
CHECKPOINT_KEYS = ("t", "metric", "model_size", "cells", "elapsed_s", "kevals")


def predicted_sign(score: float) -> int:
    # sign(0) counts as +1
    return 1 if score >= 0 else -1


@dataclass
class MetricsTrace:
    task: str
    t: int = 0
    mistakes: int = 0
    sq_err: float = 0.0
    checkpoints: list[dict] = field(default_factory=list)
    summary: dict | None = None
    _t0: float = field(default_factory=time.monotonic, repr=False)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")

    @property
    def metric(self) -> float:
        """Mistake rate for classification, RMSE for regression; 0 before any instance."""
        if self.t == 0:
            return 0.0
        if self.task == "regression":
            return math.sqrt(self.sq_err / self.t)
        return self.mistakes / self.t

    def elapsed(self) -> float:
        return time.monotonic() - self._t0

    def checkpoint(self, model_size: int, cells: int, kevals: int) -> dict:
        rec = {"t": self.t, "metric": self.metric, "model_size": model_size,
               "cells": cells, "elapsed_s": self.elapsed(), "kevals": kevals}
        self.checkpoints.append(rec)
        return rec

    def finish(self, model_size: int, cells: int, kevals: int, **extra) -> dict:
        self.summary = {"final": True, "t": self.t, "metric": self.metric,
                        "model_size": model_size, "cells": cells,
                        "wall_s": self.elapsed(), "kevals": kevals, **extra}
        return self.summary

    def to_jsonl(self, header: dict | None = None) -> str:
        lines = []
        if header is not None:
            lines.append(json.dumps({"header": True, **header}, sort_keys=True))
        lines.extend(json.dumps(r, sort_keys=True) for r in self.checkpoints)
        if self.summary is not None:
            lines.append(json.dumps(self.summary, sort_keys=True))
        return "\n".join(lines) + "\n"


def online_metrics_update(trace: MetricsTrace, prediction: float, truth: float,
                          task: str | None = None) -> MetricsTrace:
    """Count one instance: ``prediction`` is the raw score (binary, regression)
    or the predicted class index (multiclass)."""
    task = task or trace.task
    trace.t += 1
    if task == "regression":
        trace.sq_err += (prediction - truth) ** 2
    elif task == "binary":
        trace.mistakes += predicted_sign(prediction) != truth
    else:
        trace.mistakes += prediction != truth
    return trace

"""Convex losses l(f, y) on the prediction f = w . Phi(x), and their gradient scalars.

Every loss here differentiates along Phi(x): the (sub)gradient with respect
to w is alpha * Phi(x) where alpha = loss_grad_scalar(f, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LOSS_KINDS = ("hinge", "logistic", "smooth_hinge", "l1", "l2", "eps_insensitive")
CLASSIFICATION_LOSSES = frozenset({"hinge", "logistic", "smooth_hinge"})
REGRESSION_LOSSES = frozenset({"l1", "l2", "eps_insensitive"})

# command-line spellings
CLI_NAMES = {
    "hinge": "hinge",
    "logit": "logistic",
    "smooth-hinge": "smooth_hinge",
    "l1": "l1",
    "l2": "l2",
    "eps-insensitive": "eps_insensitive",
}


class LabelError(ValueError):
    pass


@dataclass(frozen=True)
class LossSpec:
    kind: str
    tau: float = 0.5
    epsilon: float = 0.1
    lam: float | None = None
    y_max: float = 1.0

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.kind!r}")
        if self.kind == "smooth_hinge" and not self.tau > 0:
            raise ValueError("smooth hinge needs tau > 0")
        if self.kind == "eps_insensitive" and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    @classmethod
    def from_cli(cls, name: str, **kw) -> "LossSpec":
        return cls(CLI_NAMES[name], **kw)

    @property
    def is_classification(self) -> bool:
        return self.kind in CLASSIFICATION_LOSSES

    @property
    def growth(self) -> tuple[float, float]:
        """Constants (A, B) with ||l'(w; x, y)|| <= A ||w||^(1/2) + B.

        Documentation only; the update rule never reads them.
        """
        if self.kind == "smooth_hinge":
            return 0.0, 2.0
        if self.kind != "l2":
            return 0.0, 1.0
        lam = self.lam if self.lam is not None else 1.0
        if lam <= 1:
            return math.sqrt(self.y_max) * lam ** -0.25, self.y_max
        return math.sqrt(self.y_max / (lam - 1.0)), self.y_max


def check_label(spec: LossSpec, y: float) -> None:
    if spec.is_classification and y not in (-1, 1):
        raise LabelError(f"{spec.kind} loss needs labels in {{-1, +1}}, got {y!r}")
    if not math.isfinite(y):
        raise LabelError(f"label must be finite, got {y!r}")


def _sign(v: float) -> float:
    return (v > 0) - (v < 0)


def loss_value(spec: LossSpec, f: float, y: float) -> float:
    check_label(spec, y)
    kind = spec.kind
    if kind == "hinge":
        return max(0.0, 1.0 - y * f)
    if kind == "logistic":
        m = y * f
        # log(1 + e^-m) without overflow
        return math.log1p(math.exp(-m)) if m > -30 else -m + math.log1p(math.exp(m))
    if kind == "smooth_hinge":
        m = y * f
        tau = spec.tau
        if m > 1:
            return 0.0
        if m < 1 - tau:
            return 1.0 - m - tau / 2.0
        return (1.0 - m) ** 2 / (2.0 * tau)
    if kind == "l2":
        return 0.5 * (y - f) ** 2
    if kind == "l1":
        return abs(y - f)
    return max(0.0, abs(y - f) - spec.epsilon)


def loss_grad_scalar(spec: LossSpec, f: float, y: float) -> float:
    check_label(spec, y)
    kind = spec.kind
    if kind == "hinge":
        return -y if y * f <= 1 else 0.0
    if kind == "logistic":
        m = y * f
        if m > 0:
            e = math.exp(-m)
            return -y * e / (1.0 + e)
        return -y / (1.0 + math.exp(m))
    if kind == "smooth_hinge":
        m = y * f
        if m < 1 - spec.tau:
            return -y
        if m <= 1:
            return (m - 1.0) * y / spec.tau
        return 0.0
    if kind == "l2":
        return f - y
    if kind == "l1":
        return float(_sign(f - y))
    return float(_sign(f - y)) if abs(y - f) > spec.epsilon else 0.0

"""Isotropic kernels K(x, x') = k(||x - x'||^2) with k(0) = 1."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sparse import SparseVector, sq_dist

KERNEL_KINDS = ("gaussian",)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "gaussian"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    def profile(self, sq_distance):
        """k(.) applied to squared distances; accepts scalars or arrays."""
        return np.exp(-self.gamma * sq_distance)


def kernel_eval(spec: KernelSpec, x: SparseVector, x2: SparseVector) -> float:
    return float(spec.profile(sq_dist(x, x2)))


def delta_phi(spec: KernelSpec, delta: float) -> float:
    """Feature-space diameter of the image of an input-space cell of diameter delta."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    # -expm1 keeps precision for tiny gamma * delta^2
    return math.sqrt(2.0 * -math.expm1(-spec.gamma * delta * delta))

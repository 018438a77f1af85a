"""On-the-fly delta-coverages: hypersphere and hyperrectangle cells.

Incoming points either fall into an existing cell (and are represented by
that cell's core point) or open a new cell with themselves as the core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sparse import PointBank, SparseVector

GEOMETRIES = ("sphere", "rect")


@dataclass(frozen=True)
class CellAssignment:
    cell_index: int  # 1-based
    is_new: bool


class Coverage:
    """Growing set of core points with either sphere or rectangle cells.

    Sphere cells are open balls of radius delta/2 around each core; the
    nearest core wins. Rectangle cells are open boxes of infinity-norm
    half-width delta/sqrt(dim); the first core in creation order wins.
    """

    def __init__(self, geometry: str, delta: float, dim: int | None = None):
        if geometry not in GEOMETRIES:
            raise ValueError(f"unknown coverage geometry {geometry!r}")
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        if geometry == "rect" and not (dim and dim > 0):
            raise ValueError("rect coverage needs the feature dimensionality")
        self.geometry = geometry
        self.delta = float(delta)
        self.dim = int(dim) if dim else 0
        if geometry == "sphere":
            self.half_width = self.delta / 2.0
        else:
            self.half_width = self.delta / math.sqrt(self.dim)
        self._sq_radius = self.half_width * self.half_width
        self._bank = PointBank(self.dim)

    def __len__(self) -> int:
        return len(self._bank)

    @property
    def cores(self) -> list[SparseVector]:
        return self._bank.points

    def core_point(self, index: int) -> SparseVector:
        if not 1 <= index <= len(self._bank):
            raise IndexError(f"core index {index} out of range 1..{len(self._bank)}")
        return self._bank.points[index - 1]

    def assign(self, x: SparseVector) -> CellAssignment:
        if self.geometry == "sphere":
            return self.assign_sphere(x)
        return self.assign_rect(x)

    def _new_cell(self, x: SparseVector) -> CellAssignment:
        return CellAssignment(self._bank.append(x) + 1, True)

    def assign_sphere(self, x: SparseVector) -> CellAssignment:
        d2 = self._bank.sq_dists(x)
        if d2.size:
            i = int(np.argmin(d2))  # first minimum: lowest index wins ties
            if d2[i] < self._sq_radius:
                return CellAssignment(i + 1, False)
        return self._new_cell(x)

    def assign_rect(self, x: SparseVector) -> CellAssignment:
        inside = self._bank.inf_dists(x) < self.half_width
        if inside.any():
            return CellAssignment(int(np.argmax(inside)) + 1, False)
        return self._new_cell(x)

    def sq_dists(self, x: SparseVector) -> np.ndarray:
        """Squared distances from x to every core, in core order."""
        return self._bank.sq_dists(x)

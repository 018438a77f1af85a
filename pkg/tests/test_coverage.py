import math

import numpy as np
import pytest

from avm.coverage import CellAssignment, Coverage
from avm.sparse import SparseVector, inf_dist, sq_dist

from conftest import min_pairwise, sv


def assignments(cov, points):
    return [(a.cell_index, a.is_new) for a in map(cov.assign, points)]


def test_sphere_hand_trace():
    cov = Coverage("sphere", 1.0)
    got = assignments(cov, [sv(0.0), sv(0.2), sv(0.6)])
    assert got == [(1, True), (1, False), (2, True)]
    assert [c.to_dense(1)[0] for c in cov.cores] == [0.0, 0.6]


def test_first_point_opens_cell():
    cov = Coverage("sphere", 2.0)
    x = sv(1.0, 2.0)
    assert cov.assign(x) == CellAssignment(1, True)
    assert cov.core_point(1) == x


def test_repeat_point_reuses_cell():
    cov = Coverage("sphere", 0.5)
    assert assignments(cov, [sv(3.0), sv(3.0)]) == [(1, True), (1, False)]


def test_boundary_distance_opens_new_cell():
    # exactly delta/2 away is outside the open ball
    cov = Coverage("sphere", 1.0)
    assert assignments(cov, [sv(0.0), sv(0.5)]) == [(1, True), (2, True)]


def test_sphere_tie_goes_to_lowest_index():
    cov = Coverage("sphere", 2.5)
    assignments(cov, [sv(-1.0), sv(1.0)])
    assert cov.assign(sv(0.0)) == CellAssignment(1, False)


def test_rect_hand_trace():
    cov = Coverage("rect", math.sqrt(2), dim=2)
    assert cov.half_width == pytest.approx(1.0)
    got = assignments(cov, [sv(0, 0), sv(0.9, 0.9), sv(1.5, 0)])
    assert got == [(1, True), (1, False), (2, True)]


def test_rect_first_match_not_nearest():
    cov = Coverage("rect", 2.0, dim=1)  # a = 2
    assignments(cov, [sv(0.0), sv(2.5)])
    # 1.5 is nearer core 2 but core 1 is scanned first
    assert cov.assign(sv(1.5)) == CellAssignment(1, False)


def test_rect_single_and_repeat():
    cov = Coverage("rect", 1.0, dim=3)
    assert assignments(cov, [sv(1, 2, 3), sv(1, 2, 3)]) == [(1, True), (1, False)]
    assert len(cov) == 1


def test_rect_needs_dim():
    with pytest.raises(ValueError):
        Coverage("rect", 1.0)


def test_rect_absent_trailing_features_are_zero():
    cov = Coverage("rect", 1.0, dim=4)  # a = 0.5
    cov.assign(SparseVector.from_dict({1: 1.0}))
    assert cov.assign(SparseVector.from_dict({1: 1.0, 4: 0.4})) == CellAssignment(1, False)
    assert cov.assign(SparseVector.from_dict({1: 1.0, 4: 0.6})) == CellAssignment(2, True)


def test_core_point_indexing():
    cov = Coverage("sphere", 1.0)
    pts = [sv(0.0), sv(5.0), sv(10.0)]
    assignments(cov, pts)
    assert cov.core_point(3) == pts[2]
    with pytest.raises(IndexError):
        cov.core_point(0)
    with pytest.raises(IndexError):
        cov.core_point(4)


def test_cores_grow_with_new_dimensions():
    cov = Coverage("sphere", 1.0)
    cov.assign(SparseVector.from_dict({1: 1.0}))
    assert cov.assign(SparseVector.from_dict({1: 1.0, 50: 3.0})).is_new
    assert cov.assign(SparseVector.from_dict({1: 1.0, 50: 3.1})) == CellAssignment(2, False)


def test_deterministic_replay():
    rng = np.random.default_rng(4)
    pts = [SparseVector.from_dense(rng.normal(size=3)) for _ in range(500)]
    a, b = Coverage("sphere", 1.2), Coverage("sphere", 1.2)
    assert assignments(a, pts) == assignments(b, pts)
    assert a.cores == b.cores


def test_cell_count_plateaus_on_bounded_box():
    rng = np.random.default_rng(7)
    delta, d = 0.5, 2
    pts = [SparseVector.from_dense(rng.uniform(0, 1, size=d)) for _ in range(20000)]
    cov = Coverage("sphere", delta)
    for p in pts[:2000]:
        cov.assign(p)
    early = len(cov)
    for p in pts[2000:]:
        cov.assign(p)
    diameter = math.sqrt(d)
    assert len(cov) <= (4 * diameter / delta) ** d
    # ten times the data adds only a handful of cells
    assert len(cov) - early <= 0.05 * early + 5


def test_separation_brute_force():
    rng = np.random.default_rng(11)
    pts = [SparseVector.from_dense(rng.normal(size=4) * 2) for _ in range(3000)]
    cov = Coverage("sphere", 1.5)
    for p in pts:
        a = cov.assign(p)
        if not a.is_new:
            assert sq_dist(p, cov.core_point(a.cell_index)) < 0.75 ** 2
    assert len(cov) > 100
    assert min_pairwise(cov.cores) >= 0.75 ** 2


def test_rect_creation_time_separation():
    rng = np.random.default_rng(12)
    cov = Coverage("rect", 1.0, dim=3)
    for _ in range(2000):
        p = SparseVector.from_dense(rng.uniform(-2, 2, size=3))
        a = cov.assign(p)
        if a.is_new:
            for c in cov.cores[:-1]:
                assert inf_dist(p, c) >= cov.half_width
        else:
            assert inf_dist(p, cov.core_point(a.cell_index)) < cov.half_width

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from epsboundary.arrangement import (boundary_convergence, boundary_loops, disk_union_boundary,
                                     distance_to_arcs, sample_boundary, samples_array)
from epsboundary.setmodel import gen_segment, point_set

coord = st.floats(-3, 3, allow_nan=False).map(lambda v: round(v, 4))
centers_st = st.lists(st.tuples(coord, coord), min_size=1, max_size=50, unique=True)
eps_st = st.floats(0.2, 1.5)


def test_single_disk():
    bas = disk_union_boundary([(0, 0)], 1.0)
    assert len(bas.arcs) == 1 and bas.arcs[0].is_full and bas.vertices == []


def test_two_disk_wedge():
    bas = disk_union_boundary([(-1, 0), (1, 0)], 1.25)
    assert len(bas.arcs) == 2
    V = sorted(tuple(np.round(v.position, 12) + 0.0) for v in bas.vertices)
    assert V == [(0.0, -0.75), (0.0, 0.75)]


def test_tangent_disks_meet_at_origin():
    bas = disk_union_boundary([(-1, 0), (1, 0)], 1.0)
    assert len(bas.arcs) == 2
    assert len(bas.vertices) == 1
    v = bas.vertices[0]
    assert np.allclose(v.position, (0, 0), atol=1e-12)
    assert len(v.center_ids) == 2 and v.tangent


def test_eps_must_be_positive():
    with pytest.raises(ValueError):
        disk_union_boundary([(0, 0)], 0.0)


def test_sample_counts():
    bas = disk_union_boundary([(0, 0)], 1.0)
    smp = sample_boundary(bas, math.pi / 2)
    assert len(smp) == 5
    assert len({(round(s.position.x, 12) + 0.0, round(s.position.y, 12) + 0.0) for s in smp}) == 4
    bas.arcs.clear()
    assert sample_boundary(bas, 0.1) == []
    with pytest.raises(ValueError):
        sample_boundary(bas, 0)


def test_wedge_samples_outside_both_disks():
    bas = disk_union_boundary([(-1, 0), (1, 0)], 1.25)
    P = samples_array(sample_boundary(bas, 0.01))
    for c in [(-1, 0), (1, 0)]:
        assert np.all(np.hypot(*(P - c).T) >= 1.25 - 1e-9)
    for s in sample_boundary(bas, 0.01):
        g = s.generating_center
        assert math.hypot(s.position.x - g.x, s.position.y - g.y) == pytest.approx(1.25, abs=1e-10)


@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=200, unique=True), eps_st)
def test_coverage_soundness(C, eps):
    C = np.array(C)
    bas = disk_union_boundary(C, eps)
    if not bas.arcs:
        return
    P = samples_array(sample_boundary(bas, eps / 8))
    d = np.min(np.hypot(*(P[:, None, :] - C[None]).transpose(2, 0, 1)), axis=1)
    assert np.all(d >= eps - 1e-9)


@given(centers_st, eps_st)
def test_hash_matches_all_pairs(C, eps):
    a = disk_union_boundary(C, eps, use_hash=True).intervals()
    b = disk_union_boundary(C, eps, use_hash=False).intervals()
    assert len(a) == len(b)
    for (ca, sa, ea), (cb, sb, eb) in zip(a, b):
        assert ca == cb and abs(sa - sb) <= 1e-12 and abs(ea - eb) <= 1e-12


@given(st.lists(st.tuples(st.floats(0.05, 3).map(lambda v: round(v, 4)), coord),
                min_size=1, max_size=20, unique=True), eps_st)
def test_vertex_reflection_symmetry(half, eps):
    C = np.array(half + [(-x, y) for x, y in half])
    V = np.array([v.position for v in disk_union_boundary(C, eps).vertices]).reshape(-1, 2)
    if not len(V):
        return
    R = V * (-1, 1)
    d = np.min(np.hypot(*(V[:, None, :] - R[None]).transpose(2, 0, 1)), axis=1)
    assert np.all(d <= 1e-10)


def _total_turning(bas, loop):
    total = 0.0
    for k, a in enumerate(loop):
        arc, nxt = bas.arcs[a], bas.arcs[loop[(k + 1) % len(loop)]]
        total += arc.extent
        t1 = (-math.sin(arc.theta_end), math.cos(arc.theta_end))
        t2 = (-math.sin(nxt.theta_start), math.cos(nxt.theta_start))
        total += math.atan2(t1[0] * t2[1] - t1[1] * t2[0], t1[0] * t2[0] + t1[1] * t2[1])
    return total


@pytest.mark.parametrize("C,eps", [([(-1, 0), (1, 0)], 1.25), ([(0, 0), (1, 0), (2, 0.5)], 0.8),
                                   ([(0, 0), (1, 1), (2, 0), (1, -1)], 1.05)])
def test_total_turning(C, eps):
    bas = disk_union_boundary(C, eps)
    loops = boundary_loops(bas)
    assert len(loops.loops) == 1
    assert _total_turning(bas, loops.loops[0]) == pytest.approx(2 * math.pi, abs=1e-6)


@given(st.lists(st.tuples(coord, coord), min_size=2, max_size=12, unique=True), eps_st)
def test_total_turning_random_single_loop(C, eps):
    bas = disk_union_boundary(C, eps)
    loops = boundary_loops(bas)
    if len(loops.loops) != 1 or bas.tangencies or len(bas.arcs) < 2:
        return
    assert _total_turning(bas, loops.loops[0]) == pytest.approx(2 * math.pi, abs=1e-6)


def test_distance_to_arcs_exact_on_circle():
    bas = disk_union_boundary([(0, 0)], 1.0)
    d = distance_to_arcs(np.array([[2.0, 0.0], [0.0, 0.5], [0.6, 0.8]]), bas)
    assert np.allclose(d, [1.0, 0.5, 0.0], atol=1e-15)


def test_convergence_point_set_is_flat():
    assert all(d <= 1e-15 for _, d in boundary_convergence(point_set([(0, 0)]), 1.0, 4, 7))


def test_convergence_segment_closed_form():
    eps = 0.5
    out = boundary_convergence(gen_segment(), eps, 5, 9)
    for n, d in out:
        # dip between neighbouring level-n disks, measured from a nested level-9 centre
        assert d == pytest.approx(eps - math.sqrt(eps ** 2 - 2.0 ** (-2 * n - 2)), abs=1e-15)
        assert d <= math.sqrt(2) * 2.0 ** -n + 1e-3

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsboundary.analysis import AlphaProfile
from epsboundary.classify import (ANGLE_TOL, KIND_TABLE, Inventory, SingularityRecord,
                                  classify_boundary, direction_verdict, stability_levels,
                                  verify_partition)
from epsboundary.geometry import ArcKind, Point2, UnitDir
from epsboundary.setmodel import (gen_fat_cantor, gen_jump_integral, gen_point_pair,
                                  gen_rectangle_example, gen_single_point, jump_integral,
                                  jump_integral_terms, jump_slopes, point_set)


def nonzero(counts):
    return {k: v for k, v in counts.items() if v}


def test_circle_is_all_smooth():
    inv = classify_boundary(gen_single_point(), 1.0, 6, 1 / 32)
    assert nonzero(inv.counts) == {"S0": len(inv.records)}
    assert len(inv.records) > 100


def test_point_pair_two_wedges():
    inv = classify_boundary(gen_point_pair(), 1.25, 6, 1.25 / 64)
    s1 = inv.labelled("S1")
    assert len(s1) == 2
    assert set(nonzero(inv.counts)) == {"S0", "S1"}
    for r in s1:
        assert abs(r.point.x) < 1e-12 and abs(abs(r.point.y) - 0.75) < 1e-12
        # closed form: the outward arc spans the supplement of the contributor angle
        assert r.angle == pytest.approx(math.acos(0.28), abs=1e-12)
        assert r.arc_kind is ArcKind.PROPER
    assert verify_partition(inv).ok


def test_tangent_disks_sharp_sharp():
    inv = classify_boundary(point_set([(-1, 0), (1, 0)]), 1.0, 6, 1 / 64)
    s3 = inv.labelled("S3")
    assert len(s3) == 1
    r = s3[0]
    assert abs(r.point.x) < 1e-12 and abs(r.point.y) < 1e-12
    assert r.arc_kind is ArcKind.ANTIPODAL
    dirs = r.evidence["directions"]
    assert sorted(d["verdict"] for d in dirs.values()) == ["sharp", "sharp"]
    assert nonzero(inv.counts).keys() == {"S0", "S3"}


def test_rectangle_no_label_on_open_segment():
    inv = classify_boundary(gen_rectangle_example(), 0.5, 8, 0.5 / 64)
    for r in inv.records:
        if abs(r.point.y - 0.5) < 1e-9:
            assert not (2 + 1e-9 < r.point.x < 3 - 1e-9), r
    s2 = sorted(inv.labelled("S2"), key=lambda r: r.point.x)
    assert [(r.point.x, r.point.y) for r in s2] == [(2.0, 0.5), (3.0, 0.5)]
    assert [(r.xi[0].ux, r.xi[0].uy) for r in s2] == [(-1.0, 0.0), (1.0, 0.0)]
    assert {tuple(map(float, c)) for c in s2[1].contributors} == {(3.0, 0.0), (3.0, 1.0)}
    # every coincident-arc vertex on the segment is dropped, none pruned as a label
    assert inv.meta["vertices_dropped"] > 0
    assert verify_partition(inv).ok


def test_depth4_chain_side_recorded():
    inv = classify_boundary(gen_fat_cantor(4), 0.5, 8, 0.5 / 64)
    chain = inv.labelled("S6", "S7", "S8")
    assert chain
    r0 = inv.meta["inspection_radius"]
    for r in chain:
        verdicts = {k: d["verdict"] for k, d in r.evidence["directions"].items()}
        assert "chain" in verdicts.values()
        for d in r.evidence["directions"].values():
            if d["verdict"] == "chain":
                zt = d["zero_touches"]
                assert len(zt) >= 2 and zt[0] < r0 / 4
    assert verify_partition(inv).ok


def test_threaded_matches_serial():
    spec = gen_fat_cantor(3)
    a = classify_boundary(spec, 0.5, 7, 0.5 / 32)
    b = classify_boundary(spec, 0.5, 7, 0.5 / 32, workers=4)
    assert [(r.point, r.label) for r in a.records] == [(r.point, r.label) for r in b.records]


# ---------------------------------------------------------------------------
# direction verdicts on synthetic profiles

def prof(s, a):
    return AlphaProfile(np.asarray(s, float), np.asarray(a, float))


def test_verdict_sharp_none_chain():
    s = np.linspace(0, 1, 257)
    assert direction_verdict(prof(s, -s), 1.0)[0] == "sharp"
    assert direction_verdict(prof(s, np.zeros_like(s)), 1.0)[0] == "none"
    # negative with zero touches at 1/64, 1/16, 1/4: accumulating towards 0
    a = -s.copy()
    for t in (1 / 64, 1 / 16, 1 / 4):
        a[np.argmin(abs(s - t))] = 0.0
    v, info = direction_verdict(prof(s, a), 1.0)
    assert v == "chain"
    assert info["zero_touches"] == pytest.approx([1 / 64, 1 / 16, 1 / 4])
    # one touch far out only: still sharp
    a = -s.copy()
    a[np.argmin(abs(s - 0.5))] = 0.0
    assert direction_verdict(prof(s, a), 1.0)[0] == "sharp"


# ---------------------------------------------------------------------------
# partition

def test_partition_negative_and_vacuous():
    bad = SingularityRecord(Point2(0, 0), "S2", ArcKind.PROPER,
                            xi=(UnitDir(1, 0), UnitDir(0, 1)), contributors=(Point2(0, -1),))
    rep = verify_partition(Inventory([bad], 1.0, 6, 0.1))
    assert not rep.ok
    assert "kind mismatch" in rep.violations[0][1]
    assert verify_partition(Inventory([], 1.0, 6, 0.1)).ok


def test_partition_other_violations():
    recs = [
        SingularityRecord(Point2(0, 0), "S0", ArcKind.HALF, contributors=(Point2(0, -1), Point2(0, 1))),
        SingularityRecord(Point2(1, 0), "S1", ArcKind.PROPER, angle=math.pi),
        SingularityRecord(Point2(2, 0), "S9", ArcKind.HALF),
        SingularityRecord(Point2(3, 0), "S0", ArcKind.HALF, contributors=(Point2(3, 1),)),
        SingularityRecord(Point2(3, 0), "S4", ArcKind.HALF, contributors=(Point2(3, 1),)),
    ]
    why = [w for _, w in verify_partition(Inventory(recs, 1.0, 6, 0.1)).violations]
    assert "multiplicity mismatch" in why
    assert "wedge angle out of range" in why
    assert any(w.startswith("unknown label") for w in why)
    assert "point carries two labels" in why


def test_kind_table_covers_labels():
    assert set(KIND_TABLE) == {f"S{k}" for k in range(9)}


cloud = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=6,
                 unique=True).map(lambda v: [(a / 4, b / 4) for a, b in v])


@settings(max_examples=15)
@given(cloud, st.sampled_from([0.4, 0.75, 1.0]))
def test_partition_on_random_clouds(C, eps):
    inv = classify_boundary(point_set(C), eps, 6, eps / 16)
    assert verify_partition(inv).ok


# ---------------------------------------------------------------------------
# stability and wedge accumulation

def test_stability_levels_point_pair():
    st_ = stability_levels(gen_point_pair(), 1.25, [4, 5, 6], 1.25 / 32)
    assert st_["n_stable"] == 4
    assert len(set(st_["counts"].values())) == 1
    assert st_["counts"][6][0] == 2          # S1


def test_jump_integral_wedges():
    eps, N = 0.5, 8
    qs, amps = jump_integral_terms(N)
    inv = classify_boundary(gen_jump_integral(N, eps), eps, 9, eps / 64)
    s1 = inv.labelled("S1")
    P = np.array([[r.point.x, r.point.y] for r in s1])
    measured = []
    for q in qs:
        g = np.array([q, jump_integral(np.array([q]), qs, amps)[0]])
        k = int(np.argmin(np.hypot(*(P - g).T)))
        assert np.hypot(*(P[k] - g)) < 1e-9
        lo, hi = jump_slopes(np.array([q]), qs, amps)
        expect = math.pi - (math.atan(hi[0]) - math.atan(lo[0]))
        assert s1[k].angle == pytest.approx(expect, abs=1e-9)
        measured.append(s1[k].angle)
    # wedges that successively approach an irrational abscissa open up towards pi
    p = math.sqrt(2) - 1
    best, seq = math.inf, []
    for q, th in zip(qs, measured):
        if abs(q - p) < best:
            best = abs(q - p)
            seq.append(th)
    assert len(seq) >= 3
    assert all(b > a for a, b in zip(seq, seq[1:]))
    assert math.pi - seq[-1] < 0.01 and all(th < math.pi - ANGLE_TOL for th in seq)

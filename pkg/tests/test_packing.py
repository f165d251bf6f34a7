import math

import numpy as np
import pytest

from dense_orbits.packing import (
    Ball,
    Box,
    IterationCap,
    OpenSet,
    ball_volume,
    interior_cubes,
    l_shape,
    pack_balls,
    parse_geometry,
    rho,
    unit_disc,
    unit_square,
    verify_lemma,
)


def test_rho():
    assert rho(1) == pytest.approx(0.78539816339744831, abs=1e-12)
    assert rho(2) == pytest.approx(0.30842513753404246, abs=1e-12)
    for m in range(1, 6):
        assert rho(m) == pytest.approx(ball_volume(2 * m, 0.5), rel=1e-13)
    with pytest.raises(ValueError):
        rho(0)


def test_unit_square_at_tenth():
    res = pack_balls(unit_square(), 0.1)
    assert res.cube_count == 64
    assert res.total_ball_volume == pytest.approx(0.5026548245743669, rel=1e-12)
    assert res.V_volume_lower == pytest.approx(0.64)
    assert res.V_volume_upper == pytest.approx(1.0)
    assert res.bound_ok and res.inclusion_test == "exact"
    assert res.total_ball_volume > math.pi / 8


def test_balls_disjoint_and_inside():
    res = pack_balls(unit_disc(), 0.2)
    centers = np.array([c for c, _ in res.balls])
    r = res.h / 2
    assert np.all(np.linalg.norm(centers, axis=1) + r * math.sqrt(2) < 1)
    dist = np.linalg.norm(centers[:, None] - centers[None], axis=2)
    np.fill_diagonal(dist, np.inf)
    assert dist.min() >= 2 * r - 1e-12


def test_sampled_agrees_with_exact_on_disc():
    exact = unit_disc()
    sampled = OpenSet(lambda x: (x**2).sum(axis=1) < 1, (-1.0, -1.0), (1.0, 1.0))
    for h in (0.25, 0.1, 0.05):
        a = interior_cubes(exact, h)
        b = interior_cubes(sampled, h)
        assert {tuple(c) for c in b} <= {tuple(c) for c in a}
        assert len(b) >= 0.95 * len(a)


@pytest.mark.parametrize("geom", [unit_square, unit_disc, l_shape])
def test_verify_lemma(geom):
    h, res = verify_lemma(geom(), 0.5)
    assert res.bound_ok and res.cube_count > 0 and h <= 0.5


def test_l_shape_union():
    V = l_shape()
    assert V.contains(np.array([[1.5, 0.5], [0.5, 1.5], [1.5, 1.5]])).tolist() == [True, True, False]
    h, res = verify_lemma(V, 0.5)
    assert res.V_volume_lower <= 3.0 <= res.V_volume_upper + 1e-12


def test_gap_shrinks_with_h():
    V = unit_disc()
    gaps = [pack_balls(V, h) for h in (0.2, 0.1, 0.05, 0.025)]
    gaps = [r.V_volume_upper - r.V_volume_lower for r in gaps]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] / gaps[0] < 0.25


def test_m2_ball():
    V = OpenSet.union(Ball((0.0,) * 4, 1.0))
    res = pack_balls(V, 0.25)
    assert res.m == 2 and res.cube_count > 0
    assert res.total_ball_volume == pytest.approx(res.cube_count * rho(2) * 0.25**4)


def test_iteration_cap():
    with pytest.raises(IterationCap):
        verify_lemma(OpenSet.union(Box((0.0, 0.0), (0.01, 1e-9))), 0.5)
    with pytest.raises(ValueError):
        verify_lemma(unit_square(), 0.0)


def test_parse_geometry():
    V = parse_geometry('[{"box": [[0, 0], [2, 1]]}, {"ball": [[3, 0.5], 0.5]}]')
    assert V.exact and V.lo == (0.0, 0.0) and V.hi == (3.5, 1.0)
    assert parse_geometry("unit-disc").pieces == unit_disc().pieces
    with pytest.raises(ValueError):
        parse_geometry('[{"cone": 1}]')
    with pytest.raises(ValueError):
        OpenSet.union(Box((0.0,), (1.0,)), Box((0.0, 0.0), (1.0, 1.0)))

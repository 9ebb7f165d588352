from __future__ import annotations

import json
import math
from fractions import Fraction

import networkx as nx
import pytest

from coarse_ends.cones import (
    ConePoint,
    FiniteComplex,
    MeshTooCoarse,
    build_cone_mesh,
    complex_components,
    cone_distance,
    cone_distance_sq,
    planted_complex,
    point_in_complex,
    point_ray,
    points_complex,
    verify_cone_bijection,
)
from coarse_ends.space import SpaceError

F = Fraction


def test_components_of_edges():
    one = FiniteComplex(((0,), (1,)), ((0, 1),))
    two = FiniteComplex(((0,), (1,), (3,), (4,)), ((0, 1), (2, 3)))
    assert len(complex_components(one)) == 1
    assert complex_components(two) == [[0, 1], [2, 3]]


def test_triangle_contributes_its_edges():
    X = FiniteComplex(((0, 0), (1, 0), (0, 1)), ((0, 1, 2),))
    assert X.edges() == [(0, 1), (0, 2), (1, 2)]
    assert len(complex_components(X)) == 1


def test_random_planted_components_match_flood_fill(rng):
    for _ in range(30):
        n = rng.randint(1, 25)
        verts = tuple((rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(n))
        simplices = [tuple(rng.sample(range(n), 2)) for _ in range(rng.randint(0, n)) if n > 1]
        X = FiniteComplex(verts, tuple(simplices))
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(simplices)
        assert len(complex_components(X)) == nx.number_connected_components(G)


def test_complex_validation():
    with pytest.raises(SpaceError):
        FiniteComplex(())
    with pytest.raises(SpaceError):
        FiniteComplex(((0,), (1, 2)))
    with pytest.raises(SpaceError):
        FiniteComplex(((0,),), ((0, 3),))


def test_complex_roundtrip(tmp_path):
    X = planted_complex(3)
    path = tmp_path / "x.json"
    path.write_text(json.dumps(X.to_dict()))
    assert FiniteComplex.load(path) == X


def test_cone_distance_examples():
    x, y = (F(1, 2),), (F(-1, 3),)
    assert cone_distance_sq(ConePoint(x, F(6)), ConePoint(y, F(6))) == 36 * (F(5, 6) ** 2)
    # along one ray the distance is |h - h'| sqrt(|x|^2 + 1)
    assert cone_distance_sq(ConePoint(x, F(2)), ConePoint(x, F(7))) == 25 * (F(1, 4) + 1)
    d = cone_distance(ConePoint((F(0),), F(0)), ConePoint((F(1),), F(3)))
    assert math.isclose(d, 3 * math.sqrt(2))


def test_layer_scaling_is_monotone():
    x, y = (F(1), F(0)), (F(0), F(1))
    ds = [cone_distance_sq(ConePoint(x, F(h)), ConePoint(y, F(h))) for h in range(10)]
    assert ds == sorted(ds)


def test_cone_distance_dimension_mismatch():
    with pytest.raises(SpaceError):
        cone_distance_sq(ConePoint((F(0),), F(1)), ConePoint((F(0), F(0)), F(1)))


def test_point_ray():
    X = FiniteComplex(((0,), (1,)), ((0, 1),))
    up = point_ray(X, (0,))
    assert [cone_distance(up(h), up(h + 1)) for h in range(5)] == [1.0] * 5
    clamped = point_ray(X, (F(1, 2),), R=4)
    assert clamped(1) == clamped(4) == ConePoint((F(1, 2),), F(4))
    with pytest.raises(SpaceError):
        point_ray(X, (2,))


def test_point_ray_step_bound():
    X = FiniteComplex(((F(3, 4), F(-2, 3)),))
    ray = point_ray(X, X.vertices[0])
    scale = math.sqrt(sum(c * c for c in X.vertices[0]) + 1)
    assert all(math.isclose(cone_distance(ray(h), ray(h + 1)), scale) for h in range(100))


def test_point_membership():
    X = FiniteComplex(((0, 0), (2, 2)), ((0, 1),))
    assert point_in_complex(X, (1, 1))
    assert point_in_complex(X, (F(1, 2), F(1, 2)))
    assert not point_in_complex(X, (1, 0))


def test_mesh_edges_are_unit_distance():
    X = planted_complex(2)
    mesh = build_cone_mesh(X, 6)
    space = mesh.space
    for i in range(0, len(mesh.points), 7):
        for j in space.neighbors(i):
            assert cone_distance_sq(mesh.points[i], mesh.points[j]) <= 1


def test_truncated_mesh_connected_iff_complex_connected():
    for X, connected in [
        (FiniteComplex(((0,), (1,)), ((0, 1),)), True),
        (points_complex([0, 1]), False),
        (planted_complex(1), True),
        (planted_complex(3), False),
    ]:
        mesh = build_cone_mesh(X, 8)
        G = nx.Graph()
        keep = [i for i, p in enumerate(mesh.points) if p.height >= 2]
        G.add_nodes_from(keep)
        for i in keep:
            for j in mesh.space.neighbors(i):
                if mesh.points[j].height >= 2:
                    G.add_edge(i, j)
        assert nx.is_connected(G) == connected
        # with the apex kept the whole mesh is one piece
        assert len(mesh.space.vertices()) == len(mesh.points)
        full = nx.Graph((i, j) for i in range(len(mesh.points)) for j in mesh.space.neighbors(i))
        assert nx.is_connected(full)


def test_unit_interval_has_one_end():
    rep = verify_cone_bijection(FiniteComplex(((0,), (1,)), ((0, 1),)))
    assert (rep.components, rep.ends) == (1, 1)
    assert rep.passed


def test_two_points_have_two_ends():
    rep = verify_cone_bijection(points_complex([0, 1]))
    assert (rep.components, rep.ends) == (2, 2)
    assert rep.separated


def test_five_isolated_points():
    rep = verify_cone_bijection(planted_complex(5, edges=False))
    assert (rep.components, rep.ends) == (5, 5)


def test_close_collinear_points_need_more_radii():
    # five points at 0..4 only separate once layer spacing exceeds 1
    rep = verify_cone_bijection(points_complex(range(5)), R_max=10)
    assert rep.components == 5
    assert rep.counts[0] == 1
    assert not rep.passed


def test_mesh_horizon_must_exceed_rmax():
    with pytest.raises(MeshTooCoarse):
        verify_cone_bijection(points_complex([0, 1]), R_max=10, top=8)

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvrecon.errors import DisconnectedDomainError, InvalidArgumentError
from gvrecon.graph import DomainGraph, build_grid, distance_field, from_edges, graph_distance, skeleton_of
from gvrecon.mesh import TriMesh

from oracles import all_pairs, manhattan


def test_single_cell_grid():
    g = build_grid(1, 1)
    assert g.vertex_count == 1
    assert g.edge_count == 0


def test_grid_3x2_edge_count():
    # 2 rows of 2 horizontal edges + 3 columns of 1 vertical edge
    expected = sum(1 for a, b in itertools.combinations(range(6), 2)
                   if abs(a % 3 - b % 3) + abs(a // 3 - b // 3) == 1)
    assert expected == 7
    g = build_grid(3, 2)
    assert g.vertex_count == 6
    assert g.edge_count == expected


def test_grid_2x2_degrees():
    g = build_grid(2, 2)
    assert all(len(g.neighbors(v)) == 2 for v in range(4))


@pytest.mark.parametrize("w,h", [(0, 3), (3, 0), (-1, 2)])
def test_grid_rejects_bad_dimensions(w, h):
    with pytest.raises(InvalidArgumentError):
        build_grid(w, h)


def test_row_major_ids():
    g = build_grid(4, 3)
    assert g.vertex_of(1, 2) == 9
    assert tuple(g.coords[9]) == (1.0, 2.0)
    assert g.neighbors(5) == (1, 4, 6, 9)


def test_adjacency_validation():
    with pytest.raises(InvalidArgumentError):
        DomainGraph(((1,), ()))
    with pytest.raises(InvalidArgumentError):
        DomainGraph(((0,),))
    with pytest.raises(DisconnectedDomainError) as exc:
        from_edges(5, [(0, 1), (2, 3), (3, 4)])
    assert exc.value.details["component_sizes"] == [3, 2]


def test_skeleton_single_triangle():
    m = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    g = skeleton_of(m)
    assert (g.vertex_count, g.edge_count) == (3, 3)


def test_skeleton_two_triangles_and_duplicates():
    pos = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
    g = skeleton_of(TriMesh(pos, [[0, 1, 2], [0, 2, 3]]))
    assert (g.vertex_count, g.edge_count) == (4, 5)
    dup = skeleton_of(TriMesh(pos, [[0, 1, 2], [0, 2, 3], [0, 1, 2]]))
    assert dup.adjacency == g.adjacency


def test_skeleton_disconnected_mesh():
    pos = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 0], [6, 5, 0], [5, 6, 0]]
    with pytest.raises(DisconnectedDomainError, match="sizes"):
        skeleton_of(TriMesh(pos, [[0, 1, 2], [3, 4, 5]]))


def test_distance_examples():
    g = build_grid(5, 5)
    assert graph_distance(g, 7, 7) == 0
    assert graph_distance(g, 0, 24) == 8
    with pytest.raises(InvalidArgumentError):
        graph_distance(g, 0, 25)


def test_random_grid_pairs_are_manhattan(rng):
    g = build_grid(6, 6)
    for _ in range(50):
        u, v = rng.integers(0, 36, size=2)
        (ux, uy), (vx, vy) = divmod(int(u), 6)[::-1], divmod(int(v), 6)[::-1]
        assert graph_distance(g, int(u), int(v)) == abs(ux - vx) + abs(uy - vy)


def test_distance_field_examples():
    g = build_grid(4, 3)
    assert np.all(distance_field(g, range(12)) == 0)
    assert np.array_equal(distance_field(g, [5]), g.bfs(5))
    path = from_edges(7, [(i, i + 1) for i in range(6)])
    ramp_a = np.abs(np.arange(7) - 1)
    ramp_b = np.abs(np.arange(7) - 5)
    assert np.array_equal(distance_field(path, [1, 5]), np.minimum(ramp_a, ramp_b))
    with pytest.raises(InvalidArgumentError):
        distance_field(g, [])


@pytest.mark.parametrize("w,h", [(w, h) for w in range(1, 9) for h in range(1, 9)])
def test_grid_distance_closed_form(w, h):
    g = build_grid(w, h)
    assert np.array_equal(g.distance_matrix, manhattan(w, h))


def _random_connected(rng, n, extra):
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        edges.append((int(u), int(v)))
    return from_edges(n, edges)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.integers(0, 40), st.integers(0, 2**32 - 1))
def test_metric_axioms_exhaustive(n, extra, s):
    g = _random_connected(np.random.default_rng(s), n, extra)
    d = g.distance_matrix
    assert np.array_equal(d, all_pairs(g))
    assert np.all(np.diag(d) == 0)
    assert np.array_equal(d, d.T)
    # d[u, w] <= d[u, v] + d[v, w] for every triple
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :])


def test_cone_envelope_matches_brute_force(rng):
    g = build_grid(7, 5)
    d = g.distance_matrix
    offsets = {int(v): int(rng.integers(-5, 5)) for v in rng.choice(35, 6, replace=False)}
    env = g.cone_envelope(offsets)
    brute = np.min([o + d[v] for v, o in offsets.items()], axis=0)
    assert np.array_equal(env, brute)

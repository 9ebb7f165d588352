from __future__ import annotations

import random

import networkx as nx
import pytest

from coarse_ends.space import bfs_distances


def nx_ball(space, center, radius):
    """The closed ball as a networkx graph, edges taken from the oracle."""
    verts = set(bfs_distances(space, center, radius))
    G = nx.Graph()
    G.add_nodes_from(verts)
    for v in verts:
        for w in space.neighbors(v):
            if w in verts:
                G.add_edge(v, w)
    return G


def nx_unbounded_count(space, center, R, horizon):
    """Components of {R <= d <= horizon} that reach depth horizon, via networkx."""
    G = nx_ball(space, center, horizon)
    depth = nx.single_source_shortest_path_length(G, center)
    H = G.subgraph([v for v, d in depth.items() if d >= R])
    return sum(1 for c in nx.connected_components(H) if any(depth[v] == horizon for v in c))


@pytest.fixture
def rng():
    return random.Random(20240611)


ACCEPTANCE: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

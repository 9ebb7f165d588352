"""Rooted trees: unique geodesics, meets, underlying geodesic rays and pi0 decisions."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any

from .coarsemaps import geodesic_interpolate
from .homotopy import ControlCertificate, LatticeHomotopy, check_lattice_map
from .space import FiniteGraphSpace, SpaceError, SpaceOracle, VertexRay


class TreeOracle:
    """A space known to be acyclic, with parents taken towards ``root``.

    Finite graphs are checked in full.  Lazy kinds are checked for cycles
    out to ``check_radius`` from the root.
    """

    def __init__(self, space: SpaceOracle, root: Any = None, check_radius: int = 6):
        self.space = space
        self.root = space.basepoint if root is None else root
        space.check(self.root)
        self._parent: dict | None = None
        if isinstance(space, FiniteGraphSpace):
            self._parent = self._bfs_parents(None)
            if len(self._parent) != len(space.vertices()):
                raise SpaceError("graph is not connected")
        else:
            self._bfs_parents(min(check_radius, space.horizon))

    def _bfs_parents(self, radius: int | None) -> dict:
        parent = {self.root: None}
        depth = {self.root: 0}
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            if radius is not None and depth[u] >= radius:
                continue
            for w in self.space.neighbors(u):
                if w == parent[u]:
                    continue
                if w in parent:
                    raise SpaceError(f"cycle through {u!r} and {w!r}")
                parent[w] = u
                depth[w] = depth[u] + 1
                queue.append(w)
        return parent

    def depth(self, v) -> int:
        return self.space.distance(self.root, v)

    def parent(self, v):
        if v == self.root:
            return None
        if self._parent is not None:
            self.space.check(v)
            return self._parent[v]
        d = self.depth(v)
        return next(w for w in self.space.neighbors(v) if self.depth(w) == d - 1)

    def root_path(self, v) -> list:
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent(path[-1]))
        return path[::-1]

    def distance(self, u, v) -> int:
        return self.space.distance(u, v)


def meet(tree: TreeOracle, u, v):
    """Deepest common vertex of the root paths to u and v."""
    pu, pv = tree.root_path(u), tree.root_path(v)
    m = pu[0]
    for a, b in zip(pu, pv):
        if a != b:
            break
        m = a
    return m


def tree_geodesic(tree: TreeOracle, u, v) -> list:
    """The unique simple path from u to v."""
    pu, pv = tree.root_path(u), tree.root_path(v)
    k = 0
    while k < min(len(pu), len(pv)) and pu[k] == pv[k]:
        k += 1
    return pu[k - 1:][::-1] + pv[k:]


def on_geodesic(tree: TreeOracle, x, a, b) -> bool:
    d = tree.distance
    return d(a, x) + d(x, b) == d(a, b)


@dataclass
class GeodesicRayChain:
    """Root path read off a ray's window.

    ``samples[i]`` sits at depth i.  The prefix up to ``certified_depth`` is
    forced by the window: the last half of the ray never returns above that
    depth, so every later sample lies below ``samples[certified_depth]``.
    ``positions[i]`` is the first index of the ray that visits ``samples[i]``.
    """

    root: Any
    samples: tuple
    certified_depth: int
    positions: tuple = ()

    def certified(self) -> tuple:
        return self.samples[: self.certified_depth + 1]

    def __len__(self) -> int:
        return len(self.samples)


def underlying_geodesic_ray(tree: TreeOracle, alpha_star: VertexRay, min_depth: int = 1) -> GeodesicRayChain:
    """Extract the rooted geodesic ray contained in the image of a unit-step ray."""
    s = alpha_star.samples
    if s[0] != tree.root:
        raise SpaceError("ray must start at the tree root; interpolate with root= first")
    for a, b in zip(s, s[1:]):
        if tree.distance(a, b) != 1:
            raise SpaceError("ray must make unit steps; interpolate first")
    depths = [tree.depth(v) for v in s]
    m = min(depths[len(s) // 2:])
    if m < min_depth:
        raise SpaceError(f"ray returns to depth {m} in the last half of its window; properness not evident")
    chain = tree.root_path(s[-1])
    first = {}
    for t, v in enumerate(s):
        first.setdefault(v, t)
    positions = tuple(first[v] for v in chain)
    return GeodesicRayChain(tree.root, tuple(chain), m, positions)


@dataclass
class Pi0Verdict:
    relation: str
    divergence_height: int | None
    window_depth: int
    chains: tuple = field(default=(), repr=False)

    @property
    def equivalent(self) -> bool:
        return self.relation == "equivalent"


def pi0_equivalent(tree: TreeOracle, alpha: VertexRay, beta: VertexRay) -> Pi0Verdict:
    """Compare the underlying geodesic rays of two rays.

    Both rays are interpolated and rerooted at the root.  The chains are
    compared through the shorter certified prefix; a disagreement there is
    reported with the last height at which the two chains still agree.
    """
    ca = underlying_geodesic_ray(tree, geodesic_interpolate(alpha, tree.space, root=tree.root))
    cb = underlying_geodesic_ray(tree, geodesic_interpolate(beta, tree.space, root=tree.root))
    window = min(ca.certified_depth, cb.certified_depth)
    p = 0
    while p + 1 < min(len(ca), len(cb)) and ca.samples[p + 1] == cb.samples[p + 1]:
        p += 1
    if p < window:
        return Pi0Verdict("different", p, window, (ca, cb))
    return Pi0Verdict("equivalent", None, window, (ca, cb))


@dataclass
class HomotopyWitness:
    """Lattice homotopy from the interpolated ray to its underlying geodesic ray."""

    homotopy: LatticeHomotopy
    certificate: ControlCertificate
    A: int
    alpha_star: VertexRay
    chain: GeodesicRayChain


def homotopy_witness(
    tree: TreeOracle,
    alpha: VertexRay,
    radii: tuple = (1, 2, 3, 4, 5),
    ball_radii: tuple = (1, 2, 3),
) -> HomotopyWitness:
    """phi(i, h) = u(a - (A+1) i) while (A+1) i <= a, else r(h).

    u is the geodesic from r(h) to alpha*(h) and a its length, so column 0
    is alpha* and the diagonal is the geodesic ray r.  After interpolation
    alpha* makes unit steps from the root, so A = 1 and a <= 2h.
    """
    star = geodesic_interpolate(alpha, tree.space, root=tree.root)
    chain = underlying_geodesic_ray(tree, star)
    A = 1
    H = min(len(star) - 1, len(chain) - 1)
    rows = []
    for h in range(H + 1):
        r_h, x = chain.samples[h], star.samples[h]
        u = tree_geodesic(tree, r_h, x)
        a = len(u) - 1
        if a > (A + 1) * h:  # pragma: no cover - excluded by the triangle inequality
            raise SpaceError(f"geodesic gap {a} exceeds (A+1)h at h={h}")
        rows.append(tuple(u[a - (A + 1) * i] if (A + 1) * i <= a else r_h for i in range(h + 1)))
    phi = LatticeHomotopy(tuple(rows))
    balls = [(tree.root, b) for b in ball_radii]
    # the preimage of a ball under phi must stay inside the height band in
    # which alpha* itself visits that ball
    limits = [
        max((h for h in range(H + 1) if tree.distance(c, star.samples[h]) <= b), default=-1)
        for c, b in balls
    ]
    cert = check_lattice_map(phi, tree.space, list(radii), balls, height_limits=limits)
    return HomotopyWitness(phi, cert, A, star, chain)


def six_point_gap(tree: TreeOracle, x1, x2, x3, y1, y2, y3, R: int) -> tuple[bool, int]:
    """Evaluate the five hypotheses literally; return (they hold, d(x2, y2))."""
    d = tree.distance
    holds = (
        d(x1, y1) < R
        and d(x3, y3) < R
        and on_geodesic(tree, x2, x1, x3)
        and on_geodesic(tree, y2, y1, y3)
        and (y2 == y1 or d(x2, x3) <= d(y2, y3))
        and (x2 == x1 or d(x2, x3) >= d(y2, y3))
    )
    return holds, d(x2, y2)


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_tree(
    rng: random.Random,
    max_vertices: int = 500,
    max_degree: int = 4,
    branches: int | None = None,
    branch_depth: int = 30,
    bush: float = 0.3,
) -> FiniteGraphSpace:
    """A few long branches from the root with short bushes hanging off them."""
    branches = rng.randint(2, min(4, max_degree)) if branches is None else branches
    adj: dict[int, list[int]] = {0: []}

    def add(parent: int) -> int | None:
        if len(adj) >= max_vertices or len(adj[parent]) >= max_degree:
            return None
        v = len(adj)
        adj[v] = [parent]
        adj[parent].append(v)
        return v

    spines = []
    for _ in range(branches):
        cur = 0
        # branches share a trunk of random length, then split
        split = rng.randint(0, 3)
        if spines and split:
            cur = spines[rng.randrange(len(spines))][min(split, branch_depth - 1)]
        spine = [cur]
        for _ in range(branch_depth - len(spine) + 1):
            nxt = add(cur)
            if nxt is None:
                break
            cur = nxt
            spine.append(cur)
        spines.append(spine)
    for spine in spines:
        for v in spine[1:]:
            if rng.random() < bush:
                cur = v
                for _ in range(rng.randint(1, 4)):
                    nxt = add(cur)
                    if nxt is None:
                        break
                    cur = nxt if rng.random() < 0.7 else cur
    return FiniteGraphSpace({k: tuple(v) for k, v in adj.items()}, basepoint=0, kind="finite")


def random_ray(tree: TreeOracle, rng: random.Random, end=None, detour: int = 3, subsample: int = 2) -> VertexRay:
    """Geodesic from the root towards ``end`` with bounded detours and backtracks.

    The ray follows the geodesic, stepping off into side branches or back
    up for at most ``detour`` edges, and keeps every ``subsample``-th vertex
    with random gaps up to that size.
    """
    space = tree.space
    if end is None:
        end = rng.choice(deep_leaves(tree))
    spine = tree.root_path(end)
    walk = [spine[0]]
    for v in spine[1:]:
        if rng.random() < 0.3:
            cur = walk[-1]
            path = [cur]
            for _ in range(rng.randint(1, detour)):
                nbrs = space.neighbors(path[-1])
                path.append(rng.choice(nbrs))
            walk.extend(path[1:])
            walk.extend(tree_geodesic(tree, path[-1], cur)[1:])
        walk.append(v)
    samples = [walk[0]]
    t = 0
    while t < len(walk) - 1:
        t = min(len(walk) - 1, t + rng.randint(1, subsample))
        samples.append(walk[t])
    return VertexRay(tuple(samples))


def deep_leaves(tree: TreeOracle) -> list:
    """Leaves at least half as deep as the deepest vertex: the ends of the window."""
    space = tree.space
    leaves = [v for v in space.vertices() if len(space.neighbors(v)) == 1 and v != tree.root]
    top = max(tree.depth(v) for v in leaves)
    return [v for v in leaves if 2 * tree.depth(v) >= top]


def random_geodesic_ray(tree: TreeOracle, rng: random.Random) -> VertexRay:
    return VertexRay(tuple(tree.root_path(rng.choice(deep_leaves(tree)))))

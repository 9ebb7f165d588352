"""Ends of locally finite graphs at desk scale.

Component counts come from one pass over a filtration: vertices of the
horizon ball are added in order of decreasing depth, so after depth D has
been added the union-find holds exactly the components of the annulus
``{v : D <= d(x0, v) <= horizon}``.  A component is unbounded when it meets
the outer sphere; every report carries the horizon it was computed at.
"""
from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator

from .space import (
    HorizonError,
    SpaceError,
    SpaceOracle,
    Vertex,
    VertexRay,
    bfs_distances,
)
from .unionfind import UnionFind


class ProfileTooShort(ValueError):
    pass


class AnnulusFiltration:
    """Components of ``{D <= depth <= horizon}`` as D decreases from the horizon.

    ``k`` sets the adjacency: two vertices are joined when their distance in
    the space is at most k (k = 1 gives the graph's own edges).
    """

    def __init__(self, space: SpaceOracle, x0: Vertex, horizon: int, k: int = 1):
        if horizon > space.horizon:
            raise HorizonError(f"horizon {horizon} exceeds oracle horizon {space.horizon}")
        if k < 1:
            raise SpaceError("k must be positive")
        space.check(x0)
        self.space = space
        self.x0 = x0
        self.horizon = horizon
        self.k = k
        dist = bfs_distances(space, x0, horizon)
        self.vertices = list(dist)
        self.depth = list(dist.values())
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.uf = UnionFind(len(self.vertices))
        self.witness = [i if d == horizon else -1 for i, d in enumerate(self.depth)]
        self.rep = list(range(len(self.vertices)))
        self.unbounded: set[int] = {i for i, d in enumerate(self.depth) if d == horizon}
        self._added = [False] * len(self.vertices)

    def _near(self, i: int) -> Iterator[int]:
        v = self.vertices[i]
        if self.k == 1:
            for w in self.space.neighbors(v):
                j = self.index.get(w)
                if j is not None:
                    yield j
            return
        for w in bfs_distances(self.space, v, self.k):
            j = self.index.get(w)
            if j is not None and j != i:
                yield j

    def _union(self, a: int, b: int) -> None:
        ra, rb = self.uf.find(a), self.uf.find(b)
        if ra == rb:
            return
        root = self.uf.union(ra, rb)
        other = rb if root == ra else ra
        wit = self.witness[root] if self.witness[root] >= 0 else self.witness[other]
        self.witness[root] = wit
        # least depth, then earliest discovery
        self.rep[root] = min(self.rep[root], self.rep[other])
        self.unbounded.discard(other)
        if wit >= 0:
            self.unbounded.add(root)

    def levels(self, stop: int = 0) -> Iterator[int]:
        """Add vertices layer by layer; yields each depth D >= stop once added."""
        by_depth: dict[int, list[int]] = {}
        for i, d in enumerate(self.depth):
            by_depth.setdefault(d, []).append(i)
        for D in range(self.horizon, stop - 1, -1):
            for i in by_depth.get(D, ()):
                self._added[i] = True
                for j in self._near(i):
                    if self._added[j]:
                        self._union(i, j)
            yield D

    def label(self, v: Vertex) -> int | None:
        """Current component label of ``v``, or None when not yet added."""
        i = self.index.get(v)
        if i is None or not self._added[i]:
            return None
        return self.uf.find(i)

    def unbounded_components(self) -> list[tuple[Vertex, Vertex]]:
        out = []
        for root in sorted(self.unbounded, key=lambda r: self.rep[r]):
            out.append((self.vertices[self.rep[root]], self.vertices[self.witness[root]]))
        return out


@dataclass
class EndsProfile:
    """Unbounded components of the annulus ``{R <= d(x0, .) <= horizon}`` per radius.

    Each component is stored as ``(representative, witness)``: a vertex at
    depth R and a vertex on the outer sphere.
    """

    basepoint: Vertex
    horizon: int
    radii: tuple
    components: tuple
    space: SpaceOracle | None = field(default=None, repr=False, compare=False)

    @property
    def counts(self) -> tuple:
        return tuple(len(c) for c in self.components)

    def count_at(self, R: int) -> int:
        return self.counts[self.radii.index(R)]

    def to_dict(self) -> dict:
        ser = self.space.serialize if self.space is not None else (lambda v: v)
        return {
            "space": self.space.spec() if self.space is not None else None,
            "basepoint": ser(self.basepoint),
            "horizon": self.horizon,
            "radii": list(self.radii),
            "counts": list(self.counts),
            "components": [
                [{"representative": ser(r), "witness": ser(w)} for r, w in comps]
                for comps in self.components
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["R", "count"])
        writer.writerows(zip(self.radii, self.counts))
        return buf.getvalue()


def ends_profile(space: SpaceOracle, x0: Vertex, R_max: int, horizon: int) -> EndsProfile:
    """Count unbounded complement components for every R in ``1..R_max``."""
    if not 0 < R_max < horizon:
        raise SpaceError(f"need 0 < R_max < horizon, got R_max={R_max}, horizon={horizon}")
    filt = AnnulusFiltration(space, x0, horizon)
    snaps: dict[int, list] = {}
    for D in filt.levels(stop=1):
        if D <= R_max:
            snaps[D] = filt.unbounded_components()
    radii = tuple(range(1, R_max + 1))
    return EndsProfile(x0, horizon, radii, tuple(tuple(snaps[R]) for R in radii), space)


@dataclass(frozen=True)
class EndCount:
    """Either a stabilised end count or a growth flag with the observed counts."""

    count: int | None
    growth: tuple | None = None
    stable_from: int | None = None

    @property
    def stabilized(self) -> bool:
        return self.count is not None

    def to_dict(self) -> dict:
        if self.stabilized:
            return {"stabilized": True, "count": self.count, "stable_from": self.stable_from}
        return {"stabilized": False, "growth": list(self.growth)}


def stabilized_end_count(profile: EndsProfile, min_radii: int = 10) -> EndCount:
    """Report n when the trailing half of the tested radii all count n.

    A profile shorter than ``min_radii`` can still be flagged as growing,
    but never certified as stable.
    """
    counts = profile.counts
    if not counts:
        raise ProfileTooShort("empty profile")
    tail = counts[len(counts) // 2:]
    settled = len(set(tail)) == 1
    if settled and len(counts) >= min_radii:
        n = tail[0]
        start = len(counts)
        while start > 0 and counts[start - 1] == n:
            start -= 1
        return EndCount(n, stable_from=profile.radii[start])
    if not settled:
        return EndCount(None, growth=counts)
    raise ProfileTooShort(f"profile spans {len(counts)} radii, need {min_radii} to certify a count")


@dataclass
class EndVerdict:
    """Outcome of comparing two rays with the k-path criterion.

    ``witnesses`` maps each radius at which the tails were joined to
    ``(t, t2, path)``: a k-path from r(t) to r'(t2) outside the closed
    R-ball, where t and t2 are the first tail samples of each ray.
    ``separating`` maps a radius to the tail starts ``(t, t2)`` of two
    tails lying in different components.
    """

    relation: str
    horizon: int
    k: int
    witnesses: dict = field(default_factory=dict)
    separating: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self, space: SpaceOracle) -> dict:
        return {
            "relation": self.relation,
            "horizon": self.horizon,
            "k": self.k,
            "witnesses": {
                str(R): {"t": t, "t_prime": t2, "path": [space.serialize(v) for v in path]}
                for R, (t, t2, path) in self.witnesses.items()
            },
            "separating": {str(R): {"t": t, "t_prime": t2} for R, (t, t2) in self.separating.items()},
            "notes": list(self.notes),
        }


def same_end(
    space: SpaceOracle,
    r: VertexRay,
    r2: VertexRay,
    R_max: int,
    k: int = 1,
    horizon: int | None = None,
    x0: Vertex | None = None,
    paths: bool = True,
) -> EndVerdict:
    """Decide whether two rays define the same end, radius by radius.

    For each R in ``1..R_max`` the closed ball ``CB(x0, R)`` is removed.  The
    tails of both rays past the point where they leave the ball are labelled
    by their k-components in the truncated complement.  Equal singleton
    labels give "same" at R, disjoint labels give "different".  A ray that
    has not left the ball by the end of its samples makes R inconclusive.
    Samples beyond the horizon are left out of the labelling.
    """
    x0 = space.basepoint if x0 is None else x0
    if horizon is None:
        horizon = min(space.horizon, space.default_horizon(R_max))
    if not 0 < R_max < horizon:
        raise SpaceError(f"need 0 < R_max < horizon, got R_max={R_max}, horizon={horizon}")
    n1, n2 = len(r), len(r2)
    verdict = EndVerdict("same", horizon, k)
    tails = {}
    for R in range(1, R_max + 1):
        T1, T2 = r.tail_index(space, x0, R), r2.tail_index(space, x0, R)
        if T1 is None or T2 is None:
            tails[R] = None
            verdict.notes.append(f"R={R}: a ray does not leave the ball within its samples")
        else:
            tails[R] = (T1, T2)

    filt = AnnulusFiltration(space, x0, horizon, k=k)
    inconclusive = False
    for D in filt.levels(stop=2):
        R = D - 1
        if R > R_max:
            continue
        if tails[R] is None:
            inconclusive = True
            continue
        T1, T2 = tails[R]
        # samples beyond the horizon carry no label and are skipped
        la = {filt.label(r.samples[t]) for t in range(T1, n1)} - {None}
        lb = {filt.label(r2.samples[t]) for t in range(T2, n2)} - {None}
        if not la or not lb:
            inconclusive = True
            verdict.notes.append(f"R={R}: a tail lies wholly beyond the horizon")
        elif len(la) == 1 and la == lb:
            path = _k_path(space, r.samples[T1], r2.samples[T2], x0, R, horizon, k) if paths else []
            verdict.witnesses[R] = (T1, T2, path)
        elif la.isdisjoint(lb):
            verdict.separating[R] = (T1, T2)
        else:
            inconclusive = True
            verdict.notes.append(f"R={R}: tails have not settled into single components")
    if verdict.separating:
        verdict.relation = "different"
    elif inconclusive:
        verdict.relation = "inconclusive"
    return verdict


def _k_path(space, a, b, x0, R, horizon, k) -> list:
    """Shortest k-path from a to b through vertices with R < d(x0, .) <= horizon."""

    def inside(v):
        return R < space.distance(x0, v) <= horizon

    parent = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if u == b:
            break
        step = space.neighbors(u) if k == 1 else bfs_distances(space, u, k)
        for w in step:
            if w not in parent and inside(w):
                parent[w] = u
                queue.append(w)
    if b not in parent:
        return []
    path = [b]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def geodesic_ray_into(space: SpaceOracle, x0: Vertex, target: Vertex) -> list:
    """Geodesic from x0 to ``target`` found by walking BFS parents back from it."""
    d = space.distance(x0, target)
    dist = bfs_distances(space, x0, d)
    path = [target]
    while path[-1] != x0:
        v = path[-1]
        dv = dist[v]
        path.append(next(w for w in space.neighbors(v) if dist.get(w) == dv - 1))
    return path[::-1]


def profile_json(profile: EndsProfile, count: EndCount | None = None, config: dict | None = None) -> str:
    doc: dict[str, Any] = {"profile": profile.to_dict()}
    if count is not None:
        doc["end_count"] = count.to_dict()
    if config is not None:
        doc["config"] = config
    return json.dumps(doc, indent=2, sort_keys=True)

"""Locally finite geometric graphs behind a uniform oracle interface.

Every space is modelled at vertex scale: the vertex set of a locally finite
graph with the integer path metric.  Oracles are immutable after
construction.  Each declares a ``horizon``, the radius about its basepoint
within which enumeration and distances are exact; queries beyond it raise
:class:`HorizonError` instead of silently truncating.
"""
from __future__ import annotations

import json
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Hashable, Iterable, NamedTuple

Vertex = Hashable

# Radius reported by the lazily generated infinite kinds.
UNBOUNDED_HORIZON = 10**9


class SpaceError(ValueError):
    """Invalid space specification or vertex."""


class HorizonError(SpaceError):
    """A query reaches past the radius the oracle guarantees."""


class StaircaseAddress(NamedTuple):
    """Vertex of the staircase graph.

    ``region`` is ``"left"``, ``"right"`` or ``"step"``.  Ray vertices carry
    offset 0; step-interior vertices sit strictly between the two rays at
    ``0 < offset < len(step(height))``, counted from the left ray.
    """

    region: str
    height: int
    offset: int


def serialize_vertex(v: Vertex) -> Any:
    """Canonical JSON form of a vertex: tuples become lists, recursively."""
    if isinstance(v, tuple):
        return [serialize_vertex(x) for x in v]
    return v


class SpaceOracle(ABC):
    """Lazy locally finite graph with a basepoint and an exact integer metric."""

    kind: str = "abstract"
    degree_bound: int | None = None

    def __init__(self, basepoint: Vertex, horizon: int):
        self.basepoint = basepoint
        self.horizon = horizon

    # -- primitives subclasses provide ------------------------------------
    @abstractmethod
    def neighbors(self, v: Vertex) -> tuple:
        """Adjacent vertices in a fixed canonical order."""

    @abstractmethod
    def contains(self, v: Vertex) -> bool:
        """Whether ``v`` is a well-formed vertex of this space."""

    @abstractmethod
    def params(self) -> dict:
        """Parameters that rebuild this oracle through :func:`build_space`."""

    def parse(self, obj: Any) -> Vertex:
        """Inverse of :meth:`serialize`."""
        v = _tuplify(obj)
        if not self.contains(v):
            raise SpaceError(f"{obj!r} is not a vertex of {self.kind}")
        return v

    def serialize(self, v: Vertex) -> Any:
        return serialize_vertex(v)

    def _depth(self, v: Vertex) -> int:
        return self._distance(self.basepoint, v)

    def _distance(self, u: Vertex, v: Vertex) -> int:
        return bfs_distance(self, u, v)

    # -- checked public surface -------------------------------------------
    def depth(self, v: Vertex) -> int:
        """Distance from the basepoint."""
        if not self.contains(v):
            raise SpaceError(f"{v!r} is not a vertex of {self.kind}")
        return self._depth(v)

    def check(self, v: Vertex) -> int:
        d = self.depth(v)
        if d > self.horizon:
            raise HorizonError(f"vertex {v!r} at depth {d} lies beyond horizon {self.horizon}")
        return d

    def distance(self, u: Vertex, v: Vertex) -> int:
        self.check(u)
        self.check(v)
        return self._distance(u, v)

    def default_horizon(self, r_max: int) -> int:
        """Horizon large enough for ends analyses up to radius ``r_max``."""
        return min(self.horizon, max(2 * r_max, r_max + 10))

    def spec(self) -> dict:
        return {"kind": self.kind, "params": self.params()}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.params()})"


def _tuplify(obj: Any) -> Any:
    if isinstance(obj, list):
        return tuple(_tuplify(x) for x in obj)
    return obj


# ---------------------------------------------------------------------------
# Concrete kinds
# ---------------------------------------------------------------------------


class LineSpace(SpaceOracle):
    kind = "line"
    degree_bound = 2

    def __init__(self, horizon: int = UNBOUNDED_HORIZON):
        super().__init__(0, horizon)

    def neighbors(self, v):
        return (v - 1, v + 1)

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool)

    def _depth(self, v):
        return abs(v)

    def _distance(self, u, v):
        return abs(u - v)

    def params(self):
        return {}


class HalfLineSpace(SpaceOracle):
    kind = "halfline"
    degree_bound = 2

    def __init__(self, horizon: int = UNBOUNDED_HORIZON):
        super().__init__(0, horizon)

    def neighbors(self, v):
        return (v + 1,) if v == 0 else (v - 1, v + 1)

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool) and v >= 0

    def _depth(self, v):
        return v

    def _distance(self, u, v):
        return abs(u - v)

    def params(self):
        return {}


class GridSpace(SpaceOracle):
    """The lattice Z^n (or the orthant Z_{>=0}^n) with the L1 metric."""

    def __init__(self, n: int, nonnegative: bool = False, horizon: int = UNBOUNDED_HORIZON):
        if n < 1:
            raise SpaceError("grid dimension must be positive")
        super().__init__((0,) * n, horizon)
        self.n = n
        self.nonnegative = nonnegative
        self.kind = f"orthant-{n}" if nonnegative else f"grid-{n}"
        self.degree_bound = 2 * n

    def neighbors(self, v):
        out = []
        for axis in range(self.n):
            for step in (-1, 1):
                c = v[axis] + step
                if self.nonnegative and c < 0:
                    continue
                out.append(v[:axis] + (c,) + v[axis + 1:])
        return tuple(out)

    def contains(self, v):
        return (
            isinstance(v, tuple)
            and len(v) == self.n
            and all(isinstance(c, int) and (c >= 0 or not self.nonnegative) for c in v)
        )

    def _depth(self, v):
        return sum(abs(c) for c in v)

    def _distance(self, u, v):
        return sum(abs(a - b) for a, b in zip(u, v))

    def params(self):
        return {"n": self.n}


class RegularTreeSpace(SpaceOracle):
    """The d-regular tree.  Vertices are child-index paths from the root ``()``.

    The root has ``d`` children, indexed ``0..d-1``; every other vertex has
    ``d-1`` children, indexed ``0..d-2``.
    """

    def __init__(self, d: int, horizon: int = UNBOUNDED_HORIZON):
        if d < 2:
            raise SpaceError("regular tree needs degree >= 2")
        super().__init__((), horizon)
        self.d = d
        self.kind = f"regular-tree-{d}"
        self.degree_bound = d

    def neighbors(self, v):
        width = self.d if not v else self.d - 1
        kids = tuple(v + (i,) for i in range(width))
        return kids if not v else (v[:-1],) + kids

    def contains(self, v):
        if not isinstance(v, tuple):
            return False
        for pos, c in enumerate(v):
            if not isinstance(c, int) or c < 0 or c >= (self.d if pos == 0 else self.d - 1):
                return False
        return True

    def _depth(self, v):
        return len(v)

    def _distance(self, u, v):
        return len(u) + len(v) - 2 * _common_prefix(u, v)

    def params(self):
        return {"d": self.d}

    def default_horizon(self, r_max):
        # every vertex has an infinite subtree, so one layer past r_max is exact
        return min(self.horizon, r_max + 2)


class FreeGroupSpace(SpaceOracle):
    """Cayley graph of the free group of rank k on its standard generators.

    Vertices are freely reduced words stored as tuples of nonzero integers,
    ``+i`` for the i-th generator and ``-i`` for its inverse.  Serialized as
    strings: ``a, b, ...`` for generators, upper case for inverses.
    """

    def __init__(self, k: int, horizon: int = UNBOUNDED_HORIZON):
        if not 1 <= k <= 26:
            raise SpaceError("free group rank must be in 1..26")
        super().__init__((), horizon)
        self.k = k
        self.kind = f"free-group-rank-{k}"
        self.degree_bound = 2 * k
        self._letters = tuple(g for i in range(1, k + 1) for g in (i, -i))

    def neighbors(self, v):
        out = []
        for g in self._letters:
            if v and v[-1] == -g:
                out.append(v[:-1])
            else:
                out.append(v + (g,))
        return tuple(out)

    def contains(self, v):
        if not isinstance(v, tuple):
            return False
        for i, g in enumerate(v):
            if not isinstance(g, int) or g == 0 or abs(g) > self.k:
                return False
            if i and v[i - 1] == -g:
                return False
        return True

    def _depth(self, v):
        return len(v)

    def _distance(self, u, v):
        return len(u) + len(v) - 2 * _common_prefix(u, v)

    def serialize(self, v):
        return "".join(chr(96 + g) if g > 0 else chr(64 - g) for g in v)

    def parse(self, obj):
        if not isinstance(obj, str):
            raise SpaceError(f"free group vertices are words, got {obj!r}")
        word = []
        for ch in obj:
            g = ord(ch) - 96 if ch.islower() else -(ord(ch) - 64)
            if word and word[-1] == -g:
                word.pop()
            else:
                word.append(g)
        v = tuple(word)
        if not self.contains(v):
            raise SpaceError(f"{obj!r} is not a word in {self.k} generators")
        return v

    def params(self):
        return {"k": self.k}

    def default_horizon(self, r_max):
        return min(self.horizon, r_max + 2)


def _common_prefix(u: tuple, v: tuple) -> int:
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return n


class StaircaseSpace(SpaceOracle):
    """Two rays joined at a root, with step(n) joining their n-th vertices.

    With ``steps="square"`` step(n) is a path of n^2 edges (n^2 - 1 interior
    vertices); ``steps="constant"`` gives every step a single edge and serves
    as the negative control for the crossing obstruction.  Rays and steps are
    materialised up to height ``n_max``; the finite graph is exact in full.
    """

    kind = "staircase"
    degree_bound = 3

    def __init__(self, n_max: int = 200, steps: str = "square"):
        if n_max < 1:
            raise SpaceError("staircase needs n_max >= 1")
        if steps not in ("square", "constant"):
            raise SpaceError(f"unknown staircase step law {steps!r}")
        self.n_max = n_max
        self.steps = steps
        root = StaircaseAddress("left", 0, 0)
        ecc = max(n + self.step_length(n) // 2 for n in range(1, n_max + 1))
        super().__init__(root, ecc)
        self.root = root

    def step_length(self, n: int) -> int:
        return n * n if self.steps == "square" else 1

    def alpha(self, n: int) -> StaircaseAddress:
        """Left ray vertex at height n."""
        return StaircaseAddress("left", n, 0) if n > 0 else self.root

    def alpha_prime(self, n: int) -> StaircaseAddress:
        """Right ray vertex at height n."""
        return StaircaseAddress("right", n, 0) if n > 0 else self.root

    def step_vertex(self, n: int, offset: int) -> StaircaseAddress:
        """Vertex of step(n) at ``offset`` edges from the left ray."""
        length = self.step_length(n)
        if offset == 0:
            return self.alpha(n)
        if offset == length:
            return self.alpha_prime(n)
        return StaircaseAddress("step", n, offset)

    def step_position(self, v: StaircaseAddress) -> tuple[int, int] | None:
        """(height, offset) when ``v`` lies on some step, including its ends."""
        if v.region == "step":
            return v.height, v.offset
        if v.height == 0:
            return None
        return (v.height, 0) if v.region == "left" else (v.height, self.step_length(v.height))

    def neighbors(self, v):
        region, n, k = v
        if region == "step":
            return (self.step_vertex(n, k - 1), self.step_vertex(n, k + 1))
        if n == 0:
            return (self.alpha(1), self.alpha_prime(1))
        ray = self.alpha if region == "left" else self.alpha_prime
        out = [ray(n - 1)]
        if n < self.n_max:
            out.append(ray(n + 1))
        out.append(self.step_vertex(n, 1 if region == "left" else self.step_length(n) - 1))
        return tuple(out)

    def contains(self, v):
        if not isinstance(v, tuple) or len(v) != 3:
            return False
        region, n, k = v
        if not isinstance(n, int) or not isinstance(k, int):
            return False
        if region in ("left", "right"):
            if n == 0:
                return region == "left" and k == 0
            return 1 <= n <= self.n_max and k == 0
        if region == "step":
            return 1 <= n <= self.n_max and 0 < k < self.step_length(n)
        return False

    def parse(self, obj):
        if isinstance(obj, (list, tuple)) and len(obj) == 3:
            region, n, k = obj
            if region == "right" and n == 0:
                region = "left"
            v = StaircaseAddress(region, n, k)
            if self.contains(v):
                return v
        raise SpaceError(f"{obj!r} is not a staircase vertex")

    def _ray_gap(self, a: int, b: int) -> int:
        """Distance between the left-ray vertex at a and right-ray vertex at b."""
        return _staircase_ray_gap(self.n_max, self.steps, a, b)

    def _portals(self, v) -> tuple[tuple[str, int, int], ...]:
        """Ray vertices through which v leaves its region, with the cost to reach them."""
        region, n, k = v
        if region == "step":
            length = self.step_length(n)
            return (("left", n, k), ("right", n, length - k))
        return ((region if n else "left", n, 0),)

    def _ray_distance(self, side_a: str, a: int, side_b: str, b: int) -> int:
        if a == 0:
            side_a = side_b
        if b == 0:
            side_b = side_a
        if side_a == side_b:
            return abs(a - b)
        return self._ray_gap(a, b) if side_a == "left" else self._ray_gap(b, a)

    def _depth(self, v):
        region, n, k = v
        if region == "step":
            return n + min(k, self.step_length(n) - k)
        return n

    def _distance(self, u, v):
        if u == v:
            return 0
        best = None
        if u.region == "step" and v.region == "step" and u.height == v.height:
            best = abs(u.offset - v.offset)
        for side_a, a, cost_a in self._portals(u):
            for side_b, b, cost_b in self._portals(v):
                d = cost_a + self._ray_distance(side_a, a, side_b, b) + cost_b
                if best is None or d < best:
                    best = d
        return best

    def params(self):
        return {"n_max": self.n_max, "steps": self.steps}

    def default_horizon(self, r_max):
        # step(r_max + 1) must fit inside the horizon so that tails can meet
        top = r_max + 1
        return min(self.horizon, top + self.step_length(top) // 2 + 1)


@lru_cache(maxsize=1 << 16)
def _staircase_ray_gap(n_max: int, steps: str, a: int, b: int) -> int:
    best = a + b
    for j in range(1, n_max + 1):
        length = j * j if steps == "square" else 1
        if length >= best:
            if steps == "square":
                break
            continue
        d = abs(a - j) + length + abs(b - j)
        if d < best:
            best = d
    return best


class FiniteGraphSpace(SpaceOracle):
    """A finite undirected graph given by edges; duplicate edges collapse."""

    def __init__(
        self,
        adjacency: dict,
        basepoint: Vertex | None = None,
        kind: str = "finite",
        max_degree: int | None = None,
        source: dict | None = None,
    ):
        if not adjacency:
            raise SpaceError("finite graph has no vertices")
        for u, nbrs in adjacency.items():
            for w in nbrs:
                if w not in adjacency or u not in adjacency[w]:
                    raise SpaceError(f"edge list is not symmetric at ({u!r}, {w!r})")
        self._adj = {u: tuple(nbrs) for u, nbrs in adjacency.items()}
        self.kind = kind
        self.degree_bound = max(len(n) for n in self._adj.values())
        if max_degree is not None and self.degree_bound > max_degree:
            raise SpaceError(f"vertex degree {self.degree_bound} exceeds declared bound {max_degree}")
        if basepoint is None:
            basepoint = next(iter(self._adj))
        if basepoint not in self._adj:
            raise SpaceError(f"basepoint {basepoint!r} is not a vertex")
        self._depths = _bfs(self._adj.__getitem__, basepoint, None)
        self._source = source or {}
        super().__init__(basepoint, max(self._depths.values()))
        self._bfs_cache: dict = {}

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], basepoint=None, **kw) -> "FiniteGraphSpace":
        adj: dict = {}
        for u, v in edges:
            adj.setdefault(u, [])
            adj.setdefault(v, [])
            if u == v:
                continue
            if v not in adj[u]:
                adj[u].append(v)
                adj[v].append(u)
        return cls(adj, basepoint=basepoint, **kw)

    def neighbors(self, v):
        return self._adj[v]

    def contains(self, v):
        try:
            return v in self._adj
        except TypeError:
            return False

    def vertices(self) -> tuple:
        return tuple(self._adj)

    def _depth(self, v):
        try:
            return self._depths[v]
        except KeyError:
            raise HorizonError(f"{v!r} is not connected to the basepoint") from None

    def _distance(self, u, v):
        if u == self.basepoint:
            return self._depth(v)
        if v == self.basepoint:
            return self._depth(u)
        table = self._bfs_cache.get(u)
        if table is None:
            table = self._bfs_cache.get(v)
            if table is not None:
                return table[u]
            if len(self._bfs_cache) > 4096:
                self._bfs_cache.clear()
            table = self._bfs_cache[u] = _bfs(self._adj.__getitem__, u, None)
        return table[v]

    def params(self):
        return dict(self._source)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def read_edge_list(path: str | Path) -> list[tuple[str, str]]:
    """Plain-text edge list: one ``u v`` pair per line, ``#`` starts a comment."""
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SpaceError(f"{path}:{lineno}: expected two vertex labels, got {raw!r}")
        edges.append((parts[0], parts[1]))
    return edges


def build_space(spec: dict | str | Path) -> SpaceOracle:
    """Build an oracle from ``{"kind": ..., "params": {...}}``.

    ``spec`` may also be a kind name string, or a path to a JSON file holding
    the document.  Recognised kinds: ``line``, ``halfline``, ``grid-n``,
    ``orthant-n``, ``regular-tree-d``, ``free-group-rank-k``, ``staircase``,
    ``finite`` (inline edges or adjacency) and ``finite-file``.
    """
    if isinstance(spec, Path) or (isinstance(spec, str) and spec.endswith(".json")):
        spec = json.loads(Path(spec).read_text())
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    params = dict(spec.get("params") or {})
    if "path" in spec:
        params.setdefault("path", spec["path"])
    if not isinstance(kind, str):
        raise SpaceError("space spec needs a string 'kind'")

    horizon = params.pop("horizon", UNBOUNDED_HORIZON)
    if kind == "line":
        return LineSpace(horizon)
    if kind == "halfline":
        return HalfLineSpace(horizon)
    for prefix, factory in _PARAMETRIC.items():
        if kind.startswith(prefix):
            tail = kind[len(prefix):]
            try:
                arg = int(tail) if tail else None
            except ValueError:
                raise SpaceError(f"unknown space kind {kind!r}") from None
            return factory(arg, params, horizon)
    if kind == "staircase":
        return StaircaseSpace(int(params.get("n_max", 200)), params.get("steps", "square"))
    if kind in ("finite", "finite-file"):
        return _build_finite(kind, params)
    raise SpaceError(f"unknown space kind {kind!r}")


def _grid(n, params, horizon, nonnegative=False):
    n = n if n is not None else int(params.get("n", 2))
    return GridSpace(n, nonnegative=nonnegative, horizon=horizon)


def _tree(d, params, horizon):
    d = d if d is not None else int(params.get("d", 3))
    return RegularTreeSpace(d, horizon)


def _free(k, params, horizon):
    k = k if k is not None else int(params.get("k", 2))
    return FreeGroupSpace(k, horizon)


_PARAMETRIC: dict[str, Callable] = {
    "grid-": _grid,
    "orthant-": lambda n, p, h: _grid(n, p, h, nonnegative=True),
    "regular-tree-": _tree,
    "free-group-rank-": _free,
}


def _build_finite(kind: str, params: dict) -> FiniteGraphSpace:
    source = {k: v for k, v in params.items()}
    max_degree = params.get("max_degree")
    basepoint = params.get("basepoint")
    if kind == "finite-file":
        if "path" not in params:
            raise SpaceError("finite-file spec needs a 'path'")
        edges = read_edge_list(params["path"])
        return FiniteGraphSpace.from_edges(
            edges, basepoint=basepoint, kind=kind, max_degree=max_degree, source=source
        )
    if "adjacency" in params:
        adj = {u: [_tuplify(w) for w in ws] for u, ws in params["adjacency"].items()}
        return FiniteGraphSpace(adj, basepoint=basepoint, kind=kind, max_degree=max_degree, source=source)
    edges = [(_tuplify(u), _tuplify(v)) for u, v in params.get("edges", [])]
    return FiniteGraphSpace.from_edges(
        edges, basepoint=_tuplify(basepoint), kind=kind, max_degree=max_degree, source=source
    )


# ---------------------------------------------------------------------------
# Metric queries
# ---------------------------------------------------------------------------


def _bfs(neighbors: Callable, source, radius: int | None) -> dict:
    """Distances from ``source`` in discovery order, up to ``radius``."""
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if radius is not None and du >= radius:
            continue
        for w in neighbors(u):
            if w not in dist:
                dist[w] = du + 1
                queue.append(w)
    return dist


def bfs_distances(space: SpaceOracle, source: Vertex, radius: int | None = None) -> dict:
    """Exact distances from ``source`` to every vertex within ``radius``."""
    return _bfs(space.neighbors, source, radius)


def bfs_distance(space: SpaceOracle, u: Vertex, v: Vertex, limit: int | None = None) -> int:
    """BFS distance; raises :class:`HorizonError` when ``v`` is not found within ``limit``."""
    if u == v:
        return 0
    dist = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        dx = dist[x]
        if limit is not None and dx >= limit:
            continue
        for w in space.neighbors(x):
            if w not in dist:
                if w == v:
                    return dx + 1
                dist[w] = dx + 1
                queue.append(w)
    raise HorizonError(f"no path between {u!r} and {v!r} within {limit}")


def geodesic(space: SpaceOracle, u: Vertex, v: Vertex) -> list:
    """A shortest vertex path from ``u`` to ``v``.

    Ties are broken by walking from ``u`` to the first neighbour, in the
    oracle's canonical neighbour order, that is one step closer to ``v``.
    """
    d = space.distance(u, v)
    if d == 0:
        return [u]
    to_v = _bfs(space.neighbors, v, d)
    path = [u]
    x, dx = u, d
    while dx:
        for w in space.neighbors(x):
            if to_v.get(w) == dx - 1:
                x, dx = w, dx - 1
                path.append(x)
                break
        else:  # pragma: no cover - BFS table is exact
            raise SpaceError("geodesic walk lost its way")
    return path


def ball(space: SpaceOracle, center: Vertex, R: int) -> set:
    """Closed ball: every vertex at distance at most R from ``center``."""
    if R < 0:
        raise SpaceError("radius must be nonnegative")
    if R > space.horizon:
        raise HorizonError(f"radius {R} exceeds horizon {space.horizon}")
    space.check(center)
    return set(_bfs(space.neighbors, center, R))


def sphere(space: SpaceOracle, center: Vertex, R: int) -> set:
    return {v for v, d in _bfs(space.neighbors, center, R).items() if d == R}


@dataclass(frozen=True)
class Component:
    """Connected piece of an annulus around a center.

    ``representative`` is a vertex of least distance from the center;
    ``witness`` is a vertex on the outer sphere, present iff ``unbounded``.
    """

    vertices: tuple
    unbounded: bool
    representative: Vertex
    witness: Vertex | None


def components_outside(space: SpaceOracle, center: Vertex, R: int, horizon: int) -> list[Component]:
    """Components of the annulus ``{v : R <= d(center, v) <= horizon}``.

    This is the complement of the open R-ball inside the closed horizon
    ball.  A component is flagged unbounded iff it meets the sphere of
    radius ``horizon``.
    """
    if not 0 <= R < horizon:
        raise SpaceError(f"need 0 <= R < horizon, got R={R}, horizon={horizon}")
    if horizon > space.horizon:
        raise HorizonError(f"horizon {horizon} exceeds oracle horizon {space.horizon}")
    space.check(center)
    dist = _bfs(space.neighbors, center, horizon)
    seen: set = set()
    out = []
    for v, dv in dist.items():
        if dv < R or v in seen:
            continue
        members = [v]
        seen.add(v)
        queue = deque([v])
        witness = v if dv == horizon else None
        while queue:
            x = queue.popleft()
            for w in space.neighbors(x):
                dw = dist.get(w)
                if dw is None or dw < R or w in seen:
                    continue
                seen.add(w)
                members.append(w)
                queue.append(w)
                if witness is None and dw == horizon:
                    witness = w
        out.append(Component(tuple(members), witness is not None, v, witness))
    return out


def to_dot(space: SpaceOracle, center: Vertex, R: int, name: str = "ball") -> str:
    """Graphviz DOT text for the closed ball of radius R about ``center``."""
    dist = _bfs(space.neighbors, center, R)
    ids = {v: i for i, v in enumerate(dist)}
    lines = [f"graph {name} {{"]
    for v, i in ids.items():
        label = json.dumps(space.serialize(v)).replace('"', '\\"')
        lines.append(f'  v{i} [label="{label}", depth={dist[v]}];')
    for v in dist:
        for w in space.neighbors(v):
            if w in ids and ids[v] < ids[w]:
                lines.append(f"  v{ids[v]} -- v{ids[w]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def count_edges(space: SpaceOracle, vertices: Iterable) -> int:
    vs = set(vertices)
    return sum(1 for v in vs for w in space.neighbors(v) if w in vs) // 2


# ---------------------------------------------------------------------------
# Rays
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VertexRay:
    """A discrete ray t -> vertex, sampled at t = 0, 1, ..., len(samples) - 1.

    ``rule`` extends the ray past the stored samples when given.  ``anchors``
    is set by interpolation: ``anchors[j]`` is the position in this ray of
    sample j of the ray it was built from.
    """

    samples: tuple
    rule: Callable[[int], Vertex] | None = None
    anchors: tuple | None = None

    def __post_init__(self):
        if not self.samples:
            raise SpaceError("a ray needs at least one sample")
        object.__setattr__(self, "samples", tuple(self.samples))

    @classmethod
    def from_function(cls, f: Callable[[int], Vertex], n: int) -> "VertexRay":
        """Sample ``f`` at ``0..n-1`` and keep ``f`` as the extension rule."""
        return cls(tuple(f(t) for t in range(n)), rule=f)

    @property
    def root(self) -> Vertex:
        return self.samples[0]

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, t: int) -> Vertex:
        return self.at(t)

    def at(self, t: int) -> Vertex:
        if t < 0:
            raise IndexError(t)
        if t < len(self.samples):
            return self.samples[t]
        if self.rule is None:
            raise IndexError(f"ray has {len(self.samples)} samples and no extension rule")
        return self.rule(t)

    def extended(self, n: int) -> "VertexRay":
        """The same ray with samples stored up to index ``n - 1``."""
        if n <= len(self.samples):
            return VertexRay(self.samples[:n], self.rule)
        return VertexRay(self.samples + tuple(self.at(t) for t in range(len(self.samples), n)), self.rule)

    def tail_index(self, space: SpaceOracle, center: Vertex, R: int) -> int | None:
        """Least T with every stored sample from T on strictly outside the closed R-ball.

        None when the last sample is still inside, i.e. properness cannot be
        certified on the stored window.
        """
        T = None
        for t in range(len(self.samples) - 1, -1, -1):
            if space.distance(center, self.samples[t]) <= R:
                break
            T = t
        return T

    def max_step(self, space: SpaceOracle) -> int:
        """Largest distance between consecutive samples."""
        return max(
            (space.distance(a, b) for a, b in zip(self.samples, self.samples[1:])),
            default=0,
        )

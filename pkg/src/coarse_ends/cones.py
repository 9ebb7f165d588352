"""Metric cones over finite complexes and the count of their ends.

A complex X in R^n with rational coordinates is coned off to
``c(X) = {(h x, h) : h >= 0, x in X}``.  Distances are Euclidean in R^(n+1)
and compared exactly through squared values.  The ends of c(X) are counted
on a unit-distance mesh graph and compared with the components of X.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Iterable

from .ends import ends_profile, stabilized_end_count
from .space import FiniteGraphSpace, SpaceError, components_outside
from .unionfind import UnionFind


class MeshTooCoarse(SpaceError):
    pass


def _frac(x) -> Fraction:
    return Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10**6)


@dataclass(frozen=True)
class FiniteComplex:
    """Vertices with rational coordinates and simplices as index tuples."""

    vertices: tuple
    simplices: tuple = ()

    def __post_init__(self):
        verts = tuple(tuple(_frac(c) for c in v) for v in self.vertices)
        if not verts:
            raise SpaceError("a complex needs at least one vertex")
        n = len(verts[0])
        if any(len(v) != n for v in verts):
            raise SpaceError("vertices must share one ambient dimension")
        simplices = tuple(tuple(sorted(set(s))) for s in self.simplices)
        for s in simplices:
            if not s or any(not 0 <= i < len(verts) for i in s):
                raise SpaceError(f"simplex {s} references a missing vertex")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "simplices", simplices)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def edges(self) -> list:
        """The 1-skeleton; higher simplices contribute their edges."""
        out = set()
        for s in self.simplices:
            out.update(combinations(s, 2))
        return sorted(out)

    def radius_sq(self) -> Fraction:
        """Largest squared norm of a point of X (attained at a vertex)."""
        return max(sum(c * c for c in v) for v in self.vertices)

    @classmethod
    def from_dict(cls, doc: dict) -> "FiniteComplex":
        return cls(tuple(tuple(Fraction(str(c)) for c in v) for v in doc["vertices"]),
                   tuple(tuple(s) for s in doc.get("simplices", ())))

    @classmethod
    def load(cls, path: str | Path) -> "FiniteComplex":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "vertices": [[str(c) for c in v] for v in self.vertices],
            "simplices": [list(s) for s in self.simplices],
        }


def complex_components(X: FiniteComplex) -> list[list[int]]:
    """Vertex partition into connected components, ordered by least index."""
    uf = UnionFind(len(X.vertices))
    for a, b in X.edges():
        uf.union(a, b)
    groups = sorted(uf.groups().values())
    return [sorted(g) for g in groups]


@dataclass(frozen=True)
class ConePoint:
    base: tuple
    height: Fraction

    def coords(self) -> tuple:
        return tuple(self.height * c for c in self.base) + (self.height,)


def cone_distance_sq(p: ConePoint, q: ConePoint) -> Fraction:
    if len(p.base) != len(q.base):
        raise SpaceError("cone points live over different dimensions")
    return sum((a - b) ** 2 for a, b in zip(p.coords(), q.coords()))


def cone_distance(p: ConePoint, q: ConePoint) -> float:
    return math.sqrt(cone_distance_sq(p, q))


def point_in_complex(X: FiniteComplex, x: tuple) -> bool:
    x = tuple(_frac(c) for c in x)
    if x in X.vertices:
        return True
    for a, b in X.edges():
        p, q = X.vertices[a], X.vertices[b]
        d = tuple(qi - pi for pi, qi in zip(p, q))
        dd = sum(c * c for c in d)
        t = sum((xi - pi) * di for xi, pi, di in zip(x, p, d)) / dd
        if 0 <= t <= 1 and all(pi + t * di == xi for pi, di, xi in zip(p, d, x)):
            return True
    return False


def point_ray(X: FiniteComplex, x: tuple, R=0):
    """h -> (h x, h), held at (R x, R) for h <= R."""
    if not point_in_complex(X, x):
        raise SpaceError(f"{x} is not a point of the complex")
    base = tuple(_frac(c) for c in x)
    R = _frac(R)

    def ray(h) -> ConePoint:
        return ConePoint(base, max(_frac(h), R))

    return ray


def _ceil_sqrt(q: Fraction) -> int:
    """Least integer m >= 0 with m * m >= q."""
    m = math.isqrt(q.numerator // q.denominator)
    while m * m < q:
        m += 1
    return m


@dataclass
class ConeMesh:
    """Unit-distance graph on sampled cone points; vertex ids index ``points``."""

    points: list
    space: FiniteGraphSpace
    layers: list
    delta: Fraction
    top: Fraction

    def top_layer(self) -> list:
        return self.layers[-1]


def layer_points(X: FiniteComplex, h: Fraction) -> list[tuple]:
    """Base points sampled on layer h: each edge cut into m pieces with m >= h |q - p|."""
    pts = dict.fromkeys(X.vertices)
    for a, b in X.edges():
        p, q = X.vertices[a], X.vertices[b]
        m = max(1, _ceil_sqrt(h * h * sum((qi - pi) ** 2 for pi, qi in zip(p, q))))
        for j in range(1, m):
            t = Fraction(j, m)
            pts.setdefault(tuple(pi + t * (qi - pi) for pi, qi in zip(p, q)))
    return list(pts)


def build_cone_mesh(X: FiniteComplex, top) -> ConeMesh:
    """Layers at heights k * delta up to ``top``, edges between points at distance <= 1.

    delta = 1 / (2 ceil(sqrt(|X|^2 + 1))) keeps vertical neighbours within
    1/2; the in-layer spacing keeps horizontal neighbours within 1/2 on the
    next layer up, so every point below the top meets the layer above.
    """
    top = _frac(top)
    delta = Fraction(1, 2 * _ceil_sqrt(X.radius_sq() + 1))
    K = int(top / delta)
    points: list[ConePoint] = []
    layers: list[list[int]] = []
    for k in range(K + 1):
        h = k * delta
        bases = [tuple(Fraction(0) for _ in range(X.dim))] if k == 0 else layer_points(X, h)
        ids = []
        for b in bases:
            ids.append(len(points))
            points.append(ConePoint(b, h))
        layers.append(ids)
    coords = [p.coords() for p in points]
    cells: dict[tuple, list[int]] = {}
    for i, c in enumerate(coords):
        cells.setdefault(tuple(math.floor(x) for x in c), []).append(i)
    adj: dict[int, list[int]] = {i: [] for i in range(len(points))}
    offsets = list(product((-1, 0, 1), repeat=X.dim + 1))
    for cell, members in cells.items():
        for off in offsets:
            other = cells.get(tuple(a + b for a, b in zip(cell, off)))
            if not other:
                continue
            for i in members:
                ci = coords[i]
                for j in other:
                    if j <= i:
                        continue
                    if sum((a - b) ** 2 for a, b in zip(ci, coords[j])) <= 1:
                        adj[i].append(j)
                        adj[j].append(i)
    layer_of = {}
    for k, ids in enumerate(layers):
        for i in ids:
            layer_of[i] = k
    for k, ids in enumerate(layers[:-1]):
        for i in ids:
            if not any(layer_of[j] > k for j in adj[i]):
                raise MeshTooCoarse(f"point {points[i]} has no neighbour on a higher layer")
    space = FiniteGraphSpace(adj, basepoint=0, kind="cone-mesh")
    return ConeMesh(points, space, layers, delta, K * delta)


@dataclass
class ConeReport:
    components: int
    ends: int | None
    counts: tuple
    horizon: int
    R_max: int
    top: Fraction
    mesh_size: int
    separated: bool
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.ends == self.components and self.separated

    def to_dict(self) -> dict:
        return {
            "components": self.components,
            "ends": self.ends,
            "counts": list(self.counts),
            "horizon": self.horizon,
            "R_max": self.R_max,
            "top_height": str(self.top),
            "mesh_size": self.mesh_size,
            "rays_separated": self.separated,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def verify_cone_bijection(X: FiniteComplex, R_max: int = 10, top=None, min_radii: int = 10) -> ConeReport:
    """Compare the component count of X with the ends count of its cone mesh.

    The ends horizon is the least graph depth reached on the top layer, so
    every piece of the cone that climbs to the top meets the outer sphere.
    The cone rays over one vertex per component are also checked to end in
    distinct unbounded components at radius ``R_max``.
    """
    comps = complex_components(X)
    top = 2 * R_max + 4 if top is None else top
    mesh = build_cone_mesh(X, top)
    space = mesh.space
    horizon = min(space.depth(i) for i in mesh.top_layer())
    if horizon <= R_max:
        raise MeshTooCoarse(f"top layer reaches graph depth {horizon}, need more than R_max={R_max}")
    profile = ends_profile(space, space.basepoint, R_max, horizon)
    notes = []
    try:
        count = stabilized_end_count(profile, min_radii=min_radii)
        ends = count.count
        if ends is None:
            notes.append(f"counts did not stabilise: {count.growth}")
    except ValueError as exc:
        ends = None
        notes.append(str(exc))
    pieces = [c for c in components_outside(space, space.basepoint, R_max, horizon) if c.unbounded]
    where = {}
    for n, c in enumerate(pieces):
        for v in c.vertices:
            where[v] = n
    labels = [where.get(_ray_point_within(mesh, X.vertices[g[0]], horizon)) for g in comps]
    separated = None not in labels and len(set(labels)) == len(labels)
    return ConeReport(len(comps), ends, profile.counts, horizon, R_max, mesh.top,
                      len(mesh.points), separated, notes)


def _ray_point_within(mesh: ConeMesh, x: tuple, horizon: int):
    """Highest mesh point over base x whose graph depth is at most ``horizon``."""
    for ids in reversed(mesh.layers):
        for i in ids:
            if mesh.points[i].base == x and mesh.space.depth(i) <= horizon:
                return i
    return None


def planted_complex(k: int, edges: bool = True) -> FiniteComplex:
    """k components on rational points of the unit circle, each a point or a short spoke."""
    circle = [
        (1, 0), (0, 1), (-1, 0), (0, -1),
        (Fraction(3, 5), Fraction(4, 5)), (Fraction(-4, 5), Fraction(3, 5)),
        (Fraction(-3, 5), Fraction(-4, 5)), (Fraction(4, 5), Fraction(-3, 5)),
    ]
    if k > len(circle):
        raise ValueError(f"at most {len(circle)} planted components")
    order = [0, 2, 1, 3, 4, 6, 5, 7]
    verts: list = []
    simplices: list = []
    for n in range(k):
        x, y = (Fraction(c) for c in circle[order[n]])
        verts.append((x, y))
        if edges and n % 2 == 0:
            verts.append((x * Fraction(3, 4), y * Fraction(3, 4)))
            simplices.append((len(verts) - 2, len(verts) - 1))
        else:
            simplices.append((len(verts) - 1,))
    return FiniteComplex(tuple(verts), tuple(simplices))


def points_complex(xs: Iterable) -> FiniteComplex:
    """Isolated points on the real line."""
    xs = [(_frac(x),) for x in xs]
    return FiniteComplex(tuple(xs), tuple((i,) for i in range(len(xs))))

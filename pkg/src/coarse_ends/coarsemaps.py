"""Finite traces of maps between metric spaces, checked against the coarse-map taxonomy.

Every verdict here is relative to the sampled window.  "Not controlled" or
"not proper" means the trace shows growth at a fixed scale as the window
widens; it is evidence, not a proof about the whole map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Iterable

from .space import (
    HorizonError,
    SpaceError,
    SpaceOracle,
    VertexRay,
    ball,
    build_space,
    geodesic,
)


class RealLine:
    """The real line with |u - v|; points are ints, floats or Fractions."""

    kind = "real-line"
    basepoint = 0
    horizon = None

    def distance(self, u, v):
        return abs(u - v)

    def serialize(self, v):
        return str(v) if isinstance(v, Fraction) else v

    def parse(self, obj):
        return Fraction(obj) if isinstance(obj, str) else obj

    def spec(self) -> dict:
        return {"kind": self.kind, "params": {}}


Metric = Any  # SpaceOracle or RealLine


def _metric_from_spec(spec: dict) -> Metric:
    if spec.get("kind") == RealLine.kind:
        return RealLine()
    return build_space(spec)


@dataclass
class MapTrace:
    """A map known on finitely many inputs.

    ``center`` and ``radius`` describe the domain window the inputs cover.
    When the domain is a graph the inputs must be exactly that closed ball;
    on the real line the window is only descriptive.
    """

    domain: Metric
    codomain: Metric
    pairs: dict
    center: Any = None
    radius: int | None = None

    def __post_init__(self):
        if self.center is None:
            self.center = getattr(self.domain, "basepoint", None)
            if self.center is None and self.pairs:
                self.center = next(iter(self.pairs))
        if self.radius is not None and isinstance(self.domain, SpaceOracle):
            expected = ball(self.domain, self.center, self.radius)
            if set(self.pairs) != expected:
                raise SpaceError(
                    f"trace inputs do not cover the closed ball of radius {self.radius} exactly"
                )

    @classmethod
    def from_function(cls, domain: SpaceOracle, codomain: Metric, f: Callable, radius: int,
                      center: Any = None) -> "MapTrace":
        """Trace ``f`` on the closed ball of ``radius`` about ``center``."""
        center = domain.basepoint if center is None else center
        pts = sorted(ball(domain, center, radius), key=lambda v: (domain.distance(center, v), repr(v)))
        return cls(domain, codomain, {x: f(x) for x in pts}, center, radius)

    @classmethod
    def from_points(cls, domain: Metric, codomain: Metric, f: Callable, points: Iterable,
                    center: Any = None) -> "MapTrace":
        pts = list(points)
        if len(set(pts)) != len(pts):
            raise SpaceError("a trace may not list an input twice")
        return cls(domain, codomain, {x: f(x) for x in pts}, center)

    def __len__(self) -> int:
        return len(self.pairs)

    def window(self) -> Any:
        """Largest domain distance from the center among the inputs."""
        return max(self.domain.distance(self.center, x) for x in self.pairs)

    def restricted(self, rho) -> "MapTrace":
        """Sub-trace of inputs within ``rho`` of the center."""
        sub = {x: y for x, y in self.pairs.items() if self.domain.distance(self.center, x) <= rho}
        return MapTrace(self.domain, self.codomain, sub, self.center)

    def pairwise(self) -> Iterable[tuple]:
        """``(x, x', d_X, d_Y)`` for every unordered pair of distinct inputs."""
        dX, dY = self.domain.distance, self.codomain.distance
        for (x, y), (x2, y2) in combinations(self.pairs.items(), 2):
            yield x, x2, dX(x, x2), dY(y, y2)

    def to_dict(self) -> dict:
        sx, sy = self.domain.serialize, self.codomain.serialize
        return {
            "domain": self.domain.spec(),
            "codomain": self.codomain.spec(),
            "center": sx(self.center),
            "radius": self.radius,
            "pairs": [[sx(x), sy(y)] for x, y in self.pairs.items()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MapTrace":
        dom = _metric_from_spec(doc["domain"])
        cod = _metric_from_spec(doc["codomain"])
        pairs = {}
        for x, y in doc["pairs"]:
            x = dom.parse(x)
            if x in pairs:
                raise SpaceError(f"input {x!r} appears twice in the trace")
            pairs[x] = cod.parse(y)
        center = dom.parse(doc["center"]) if doc.get("center") is not None else None
        return cls(dom, cod, pairs, center, doc.get("radius"))


def _windows(f: MapTrace) -> list:
    W = f.window()
    if isinstance(W, int):
        steps = sorted({max(1, W * q // 4) for q in (1, 2, 3, 4)})
    else:
        steps = [W * Fraction(q, 4) for q in (1, 2, 3, 4)]
    return steps


@dataclass
class ControlReport:
    """Observed modulus S(R) per radius and its growth across nested windows."""

    modulus: dict
    by_window: dict
    controlled: bool
    growing: list = field(default_factory=list)
    window: Any = None


def check_controlled(f: MapTrace, radii: list) -> ControlReport:
    """S(R) = largest codomain distance over traced pairs at domain distance < R.

    The modulus is recomputed on nested windows; if S(R) still grows between
    the half window and the full window, R is flagged as growing.
    """
    if not f.pairs:
        raise SpaceError("empty trace")
    if any(R <= 0 for R in radii):
        raise SpaceError("radii must be positive")
    wins = _windows(f)
    by_window = {}
    for rho in wins:
        table = {R: 0 for R in radii}
        for _, _, dx, dy in f.restricted(rho).pairwise():
            for R in radii:
                if dx < R and dy > table[R]:
                    table[R] = dy
        by_window[rho] = table
    full = by_window[wins[-1]]
    half_key = min(wins, key=lambda w: abs(w - wins[-1] / 2))
    half = by_window[half_key]
    growing = [R for R in radii if R <= half_key and full[R] > half[R]]
    return ControlReport(full, by_window, not growing, growing, f.window())


@dataclass
class ProperReport:
    """Diameter of each target ball's preimage in the trace, per nested window."""

    diameters: dict
    by_window: dict
    proper: bool
    growing: list = field(default_factory=list)
    window: Any = None


def _diameter(metric, pts: list):
    return max((metric.distance(a, b) for a, b in combinations(pts, 2)), default=0)


def check_proper(f: MapTrace, bounded_sets: list) -> ProperReport:
    """Preimage diameters of the balls ``(center, radius)`` inside the traced inputs."""
    cod = f.codomain
    if isinstance(cod, SpaceOracle):
        for c, r in bounded_sets:
            if cod.check(c) + r > cod.horizon:
                raise HorizonError(f"target ball ({c!r}, {r}) leaves the codomain horizon")
    wins = _windows(f)
    by_window = {}
    for rho in wins:
        sub = f.restricted(rho)
        row = {}
        for c, r in bounded_sets:
            pre = [x for x, y in sub.pairs.items() if cod.distance(c, y) <= r]
            row[(c, r)] = _diameter(f.domain, pre)
        by_window[rho] = row
    full = by_window[wins[-1]]
    half = by_window[min(wins, key=lambda w: abs(w - wins[-1] / 2))]
    growing = [key for key in full if full[key] > half[key]]
    return ProperReport(full, by_window, not growing, growing, f.window())


@dataclass(frozen=True)
class CloseReport:
    C: Any
    argmax: Any
    common: int


def check_close(f: MapTrace, g: MapTrace) -> CloseReport:
    """Exact sup of codomain distance over inputs traced by both maps."""
    common = [x for x in f.pairs if x in g.pairs]
    if not common:
        raise SpaceError("traces share no inputs")
    dist = f.codomain.distance
    best, arg = None, None
    for x in common:
        d = dist(f.pairs[x], g.pairs[x])
        if best is None or d > best:
            best, arg = d, x
    return CloseReport(best, arg, len(common))


@dataclass(frozen=True)
class AffineBound:
    """``d_Y <= A d_X + B`` with exact rational constants."""

    A: Fraction
    B: Fraction

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ValueError("affine constants must be nonnegative")

    def violations(self, f: MapTrace) -> list:
        return [(x, x2) for x, x2, dx, dy in f.pairwise() if dy > self.A * dx + self.B]

    def holds(self, f: MapTrace) -> bool:
        return not self.violations(f)

    def lipschitz_constant(self, r) -> Fraction:
        """Lipschitz constant implied on an r-discrete set."""
        return self.A + self.B / Fraction(r)


def estimate_affine_bound(f: MapTrace) -> AffineBound:
    """Max-ratio certificate: A from the far pairs, then the least B that makes it hold.

    A is the largest ratio d_Y / d_X among pairs whose domain distance is at
    least half the largest one, so short-range jitter is absorbed into B.
    """
    pairs = [(Fraction(dx), Fraction(dy)) for _, _, dx, dy in f.pairwise()]
    if not f.pairs:
        raise SpaceError("empty trace")
    if not pairs:
        return AffineBound(Fraction(0), Fraction(0))
    D = max(dx for dx, _ in pairs)
    if D == 0:
        return AffineBound(Fraction(0), max(dy for _, dy in pairs))
    A = max(dy / dx for dx, dy in pairs if dx * 2 >= D)
    B = max(Fraction(0), max(dy - A * dx for dx, dy in pairs))
    return AffineBound(A, B)


def quasi_surjectivity_radius(f: MapTrace, target_radius: int, center: Any = None) -> int:
    """Largest distance from a point of the codomain ball to the traced image."""
    cod = f.codomain
    if not isinstance(cod, SpaceOracle):
        raise SpaceError("quasi-surjectivity needs a graph codomain")
    center = cod.basepoint if center is None else center
    image = set(f.pairs.values())
    return max(min(cod.distance(y, z) for z in image) for y in ball(cod, center, target_radius))


def geodesic_interpolate(ray: VertexRay, space: SpaceOracle, root: Any = None) -> VertexRay:
    """Unit-step edge path through the samples of ``ray``.

    Consecutive samples are joined by the canonical geodesic of
    :func:`geodesic`; repeated samples collapse.  ``anchors[j]`` is the
    position of sample j in the output.  With ``root`` given, the geodesic
    from ``root`` to the first sample is prefixed.
    """
    out: list = []
    if root is not None and root != ray.samples[0]:
        out.extend(_segment(space, root, ray.samples[0])[:-1])
    anchors = []
    out.append(ray.samples[0])
    anchors.append(len(out) - 1)
    for a, b in zip(ray.samples, ray.samples[1:]):
        out.extend(_segment(space, a, b)[1:])
        anchors.append(len(out) - 1)
    return VertexRay(tuple(out), anchors=tuple(anchors))


def _segment(space: SpaceOracle, a, b) -> list:
    try:
        return geodesic(space, a, b)
    except HorizonError as exc:
        raise SpaceError(f"samples {a!r} and {b!r} are not joined within the horizon") from exc


def interpolation_gap(ray: VertexRay, interp: VertexRay, space: SpaceOracle) -> int:
    """Max distance from an output vertex to the input sample opening its segment."""
    if interp.anchors is None:
        raise SpaceError("interpolated ray carries no anchors")
    gap = 0
    anchors = interp.anchors
    for j, start in enumerate(anchors):
        stop = anchors[j + 1] if j + 1 < len(anchors) else start
        for i in range(start, stop + 1):
            gap = max(gap, space.distance(interp.samples[i], ray.samples[j]))
    return gap


def ray_trace(space: SpaceOracle, ray: VertexRay) -> MapTrace:
    """A ray as a trace from the half-line."""
    from .space import HalfLineSpace

    dom = HalfLineSpace()
    return MapTrace(dom, space, {t: v for t, v in enumerate(ray.samples)}, 0)

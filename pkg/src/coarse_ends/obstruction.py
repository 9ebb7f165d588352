"""Crossing words on the staircase and the properness obstruction they carry.

Rows of a lattice map from alpha(h) to alpha'(h) are read as A-paths.  Each
passage across a step, from the A-ball about its left end to the A-ball
about its right end, is a forward letter f_j; the reverse passage is b_j.
Reduced row words eventually stop changing, and a stable letter f_j pins
one lattice point per row near step(j): an unbounded set with bounded image.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .coarsemaps import geodesic_interpolate
from .homotopy import LatticeHomotopy
from .space import SpaceError, StaircaseSpace, VertexRay


class NoRefutation(ValueError):
    pass


class Letter(NamedTuple):
    direction: str  # "f" or "b"
    step: int

    def inverse(self) -> "Letter":
        return Letter("b" if self.direction == "f" else "f", self.step)

    def __str__(self) -> str:
        return f"{self.direction}_{self.step}"


def parse_word(text: str) -> tuple:
    """``"f_3 b_4 f_5"`` -> letters; an empty string is the empty word."""
    out = []
    for tok in text.split():
        d, _, j = tok.partition("_")
        if d not in ("f", "b") or not j.isdigit():
            raise ValueError(f"bad letter {tok!r}")
        out.append(Letter(d, int(j)))
    return tuple(out)


def format_word(word) -> str:
    return " ".join(str(x) for x in word) or "()"


@dataclass(frozen=True)
class Crossing:
    letter: Letter
    start: int
    end: int


@dataclass(frozen=True)
class CrossingWord:
    """Crossings in path order, each with its window ``[start, end]``."""

    crossings: tuple

    @property
    def letters(self) -> tuple:
        return tuple(c.letter for c in self.crossings)

    def __len__(self) -> int:
        return len(self.crossings)


class _Zones:
    """Membership of vertices in the start, end and middle zones of each step."""

    def __init__(self, space: StaircaseSpace, A: int):
        if A < 1:
            raise ValueError("A must be positive")
        self.space = space
        self.A = A
        self._cache: dict = {}

    def zone(self, v) -> tuple[int, str] | None:
        """(j, "L" | "R" | "M") for v on step(j); None off every step."""
        hit = self._cache.get(v)
        if hit is not None or v in self._cache:
            return hit
        pos = self.space.step_position(v)
        if pos is None:
            out = None
        else:
            j = pos[0]
            near_l = self.space.distance(v, self.space.alpha(j)) < self.A
            near_r = self.space.distance(v, self.space.alpha_prime(j)) < self.A
            if near_l and near_r:
                raise ValueError(f"step({j}) is degenerate at A={self.A}: its two balls overlap")
            out = (j, "L" if near_l else "R" if near_r else "M")
        self._cache[v] = out
        return out


def check_a_path(space: StaircaseSpace, path, A: int) -> None:
    for x, (a, b) in enumerate(zip(path, path[1:])):
        if space.distance(a, b) > A:
            raise ValueError(f"not an {A}-path: positions {x} and {x + 1} are {space.distance(a, b)} apart")


def crossing_word(space: StaircaseSpace, path, A: int, zones: _Zones | None = None,
                  check: bool = True) -> CrossingWord:
    """All forward and backward crossings of ``path`` in order of their starts."""
    path = list(path)
    if check:
        check_a_path(space, path, A)
    zones = zones or _Zones(space, A)
    labels = [zones.zone(v) for v in path]
    out = []
    for x, lab in enumerate(labels):
        if lab is None or lab[1] == "M":
            continue
        j, side = lab
        y = x + 1
        while y < len(path) and labels[y] == (j, "M"):
            y += 1
        if y < len(path) and labels[y] is not None and labels[y][0] == j and labels[y][1] not in ("M", side):
            out.append(Crossing(Letter("f" if side == "L" else "b", j), x, y))
    return CrossingWord(tuple(out))


def reduce_word(word) -> tuple:
    """Free reduction under (f_j)^-1 = b_j."""
    letters = word.letters if isinstance(word, CrossingWord) else word
    stack: list[Letter] = []
    for a in letters:
        if stack and stack[-1] == a.inverse():
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def reduce_word_randomly(word, rng: random.Random) -> tuple:
    """Cancel adjacent inverse pairs in a random order; used to test confluence."""
    w = list(word)
    while True:
        spots = [i for i in range(len(w) - 1) if w[i + 1] == w[i].inverse()]
        if not spots:
            return tuple(w)
        i = rng.choice(spots)
        del w[i:i + 2]


def behavior_invariants(word, h: int, A: int | None = None) -> dict:
    """The four facts a row word above step(A) must satisfy."""
    word = tuple(word)
    dirs = [x.direction for x in word]
    return {
        "nonempty": bool(word),
        "alternating": all(a != b for a, b in zip(dirs, dirs[1:])),
        "forward_ends": bool(word) and dirs[0] == "f" and dirs[-1] == "f",
        "no_height_h": all(x.step != h for x in word),
    }


# ---------------------------------------------------------------------------
# Rows, scans and refutation
# ---------------------------------------------------------------------------


@dataclass
class Row:
    h: int
    path: tuple
    columns: tuple  # lattice column of each path position
    cross: CrossingWord | None = None
    behav: tuple | None = None
    facts: dict = field(default_factory=dict)
    clear: bool = False


def _row_path(space: StaircaseSpace, row: tuple, A: int, interpolate: bool) -> tuple[tuple, tuple]:
    if not interpolate:
        check_a_path(space, row, A)
        return tuple(row), tuple(range(len(row)))
    star = geodesic_interpolate(VertexRay(row), space)
    cols = []
    anchors = star.anchors
    j = 0
    for p in range(len(star)):
        while j + 1 < len(anchors) and anchors[j + 1] <= p:
            j += 1
        cols.append(j)
    return star.samples, tuple(cols)


@dataclass
class ScanReport:
    A: int
    h_range: tuple
    rows: dict
    threshold: int | None
    stable: tuple | None
    violations: list = field(default_factory=list)
    interpolated: bool = True

    @property
    def refutable(self) -> bool:
        return bool(self.stable) and any(x.direction == "f" for x in self.stable)

    def facts_hold(self) -> bool:
        return all(all(r.facts.values()) for r in self.rows.values() if r.clear)

    def to_dict(self) -> dict:
        return {
            "A": self.A,
            "rows": list(self.h_range),
            "threshold": self.threshold,
            "stable_word": format_word(self.stable) if self.stable is not None else None,
            "facts_hold": self.facts_hold(),
            "interpolated": self.interpolated,
            "violations": list(self.violations),
            "words": {str(h): format_word(r.behav) for h, r in self.rows.items() if r.behav is not None},
        }


def _forbidden(v, A: int) -> bool:
    # alpha[0, A], alpha'[0, A] and every step(j) with j <= A
    return v.height <= A


def stability_scan(
    space: StaircaseSpace,
    candidate: LatticeHomotopy,
    A: int,
    h_range: tuple = (20, 70),
    interpolate: bool = True,
    endrays: tuple | None = None,
) -> ScanReport:
    """Compute behav(u_h) for every row in ``h_range`` and test that it settles.

    The threshold is the first row from which every row's image avoids the
    region at height <= A.  Rows at or above it must share one reduced word;
    the first disagreeing pair is reported otherwise.  ``endrays`` defaults
    to (alpha, alpha').
    """
    lo, hi = h_range
    if hi > candidate.H:
        raise SpaceError(f"candidate has rows up to {candidate.H}, scan needs {hi}")
    first, second = endrays or (space.alpha, space.alpha_prime)
    zones = _Zones(space, A)
    report = ScanReport(A, (lo, hi), {}, None, None, interpolated=interpolate)
    for h in range(lo, hi + 1):
        row = candidate.rows[h]
        if row[0] != first(h) or row[-1] != second(h):
            raise SpaceError(f"row {h} does not run between the declared endrays")
        path, cols = _row_path(space, row, A, interpolate)
        report.rows[h] = Row(h, path, cols, clear=not any(_forbidden(v, A) for v in path))
    # threshold: every later row clears the forbidden region
    threshold = None
    for h in range(hi, lo - 1, -1):
        if not report.rows[h].clear:
            break
        threshold = h
    report.threshold = threshold
    if threshold is None:
        report.violations.append(f"no row clears height {A}")
        return report
    words = {}
    for h in range(threshold, hi + 1):
        r = report.rows[h]
        try:
            r.cross = crossing_word(space, r.path, A, zones, check=not interpolate)
        except ValueError as exc:
            report.violations.append(f"row {h}: {exc}")
            return report
        r.behav = reduce_word(r.cross)
        r.facts = behavior_invariants(r.behav, h, A)
        for name, ok in r.facts.items():
            if not ok:
                report.violations.append(f"row {h}: fact {name} fails")
        words[h] = r.behav
    for h in range(threshold, hi):
        if words[h] != words[h + 1]:
            report.violations.append(
                f"rows {h} and {h + 1} differ: {format_word(words[h])} vs {format_word(words[h + 1])}"
            )
            return report
    report.stable = words[threshold]
    return report


@dataclass
class RefutationWitness:
    """One lattice point per row whose image stays near alpha(j)."""

    step: int
    points: tuple
    image_radius: int
    bound: int
    lattice_spread: int

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "points": [list(p) for p in self.points],
            "image_radius": self.image_radius,
            "image_bound": self.bound,
            "lattice_spread": self.lattice_spread,
        }


def refute_properness(space: StaircaseSpace, candidate: LatticeHomotopy, scan: ScanReport) -> RefutationWitness:
    """Extract the non-properness witness for the least j with f_j in the stable word.

    For each scanned row the start of an f_j crossing lies in OB(alpha(j), A).
    Without interpolation that position is the lattice point itself.  With
    interpolation the lattice column opening its segment is taken, or the
    next one if closer, so the image bound becomes A plus the longest
    segment of the row.
    """
    if not scan.stable:
        raise NoRefutation("stable word is empty or missing; no refutation available")
    fs = [x.step for x in scan.stable if x.direction == "f"]
    if not fs:
        raise NoRefutation("stable word has no forward letter")
    j = min(fs)
    target = space.alpha(j)
    points = []
    radius = 0
    seg = 0
    for h in range(scan.threshold, scan.h_range[1] + 1):
        r = scan.rows[h]
        start = next(c.start for c in r.cross.crossings if c.letter == Letter("f", j))
        i = r.columns[start]
        row = candidate.rows[h]
        if i + 1 <= h and space.distance(row[i + 1], target) < space.distance(row[i], target):
            i += 1
        points.append((i, h))
        radius = max(radius, space.distance(row[i], target))
        if scan.interpolated:
            seg = max(seg, max(space.distance(a, b) for a, b in zip(row, row[1:])))
    bound = scan.A + seg if scan.interpolated else scan.A - 1
    hs = [p[1] for p in points]
    return RefutationWitness(j, tuple(points), radius, bound, max(hs) - min(hs))


# ---------------------------------------------------------------------------
# Candidate families
# ---------------------------------------------------------------------------


def _ray(space: StaircaseSpace, side: str, a: int, b: int) -> list:
    f = space.alpha if side == "left" else space.alpha_prime
    step = 1 if b >= a else -1
    return [f(k) for k in range(a, b + step, step)]


def _step(space: StaircaseSpace, j: int, k0: int, k1: int) -> list:
    step = 1 if k1 >= k0 else -1
    return [space.step_vertex(j, k) for k in range(k0, k1 + step, step)]


def _join(*parts) -> list:
    out: list = []
    for p in parts:
        out.extend(p[1:] if out and p and out[-1] == p[0] else p)
    return out


def _direct(space, h, j0):
    L = space.step_length(j0)
    return _join(_ray(space, "left", h, j0), _step(space, j0, 0, L), _ray(space, "right", j0, h))


def _bouncer(space, h, j0):
    L = space.step_length(j0)
    return _join(
        _ray(space, "left", h, j0), _step(space, j0, 0, L), _step(space, j0, L, 0),
        _step(space, j0, 0, L), _ray(space, "right", j0, h),
    )


def _ray_hugger(space, h, j0):
    parts = []
    for k in range(h, j0, -1):
        # dip two edges into step(k) and come back, never reaching the far ball
        parts.append(_step(space, k, 0, 2) + _step(space, k, 1, 0))
        parts.append(_ray(space, "left", k, k - 1))
    L = space.step_length(j0)
    return _join(*parts, _step(space, j0, 0, L), _ray(space, "right", j0, h))


def _double(space, h, j0):
    L0, L1, L2 = (space.step_length(j0 + d) for d in range(3))
    return _join(
        _ray(space, "left", h, j0), _step(space, j0, 0, L0),
        _ray(space, "right", j0, j0 + 1), _step(space, j0 + 1, L1, 0),
        _ray(space, "left", j0 + 1, j0 + 2), _step(space, j0 + 2, 0, L2),
        _ray(space, "right", j0 + 2, h),
    )


def _half_crosser(space, h, j0):
    k = j0 + 2
    half = space.step_length(k) // 2
    L = space.step_length(j0)
    return _join(
        _ray(space, "left", h, k), _step(space, k, 0, half), _step(space, k, half, 0),
        _ray(space, "left", k, j0), _step(space, j0, 0, L), _ray(space, "right", j0, h),
    )


def _top_crosser(space, h, j0):
    return _step(space, h, 0, space.step_length(h))


def _constant(space, h, j0):
    return [space.alpha(h)]


GENERATORS: dict[str, Callable] = {
    "direct": _direct,
    "direct-crosser": _direct,
    "bouncer": _bouncer,
    "ray-hugger": _ray_hugger,
    "double": _double,
    "half-crosser": _half_crosser,
    "top-crosser": _top_crosser,
    "constant": _constant,
}

# families whose rows all pass through one low step: the adversarial set
ADVERSARIAL = ("direct", "bouncer", "ray-hugger", "double", "half-crosser")


def sample_path(path: list, h: int) -> tuple:
    """Row of h + 1 lattice values read off ``path`` at evenly spaced positions."""
    m = len(path) - 1
    if h == 0:
        return (path[0],)
    return tuple(path[(2 * i * m + h) // (2 * h)] for i in range(h + 1))


def candidate_family(space: StaircaseSpace, name: str, H: int, j0: int = 4) -> LatticeHomotopy:
    """Lattice map whose row h samples the named path from alpha(h) to alpha'(h).

    Rows below ``j0 + 3`` follow the top crosser so that every row is
    defined; they sit below any scanned range.
    """
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    if H > space.n_max:
        raise SpaceError(f"staircase truncated at {space.n_max}, rows need height {H}")
    rows = []
    for h in range(H + 1):
        if h == 0:
            rows.append((space.root,))
            continue
        g = gen if (h >= j0 + 3 or name in ("top-crosser", "constant")) else _top_crosser
        rows.append(sample_path(g(space, h, j0), h))
    return LatticeHomotopy(tuple(rows))


def lattice_lipschitz(space: StaircaseSpace, phi: LatticeHomotopy, lo: int = 0) -> int:
    """Largest distance between lattice neighbours from row ``lo`` up."""
    best = 0
    for h in range(max(lo, 0), phi.H + 1):
        row = phi.rows[h]
        for i in range(h + 1):
            if i < h:
                best = max(best, space.distance(row[i], row[i + 1]))
            if h < phi.H:
                nxt = phi.rows[h + 1]
                best = max(best, space.distance(row[i], nxt[i]), space.distance(row[i], nxt[i + 1]))
    return best

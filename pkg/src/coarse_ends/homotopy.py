"""Coarse 1-paths on the triangular lattice {(i, h) : 0 <= i <= h <= H}.

Row h of a lattice homotopy is a vertex sequence of length h + 1.  Column
i = 0 traces the first endray and the diagonal i = h traces the second.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .space import SpaceError, SpaceOracle, VertexRay


@dataclass(frozen=True)
class LatticeHomotopy:
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        if not rows:
            raise SpaceError("a lattice homotopy needs at least row 0")
        for h, row in enumerate(rows):
            if len(row) != h + 1:
                raise SpaceError(f"row {h} has {len(row)} entries, expected {h + 1}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_function(cls, f: Callable[[int, int], Any], H: int) -> "LatticeHomotopy":
        return cls(tuple(tuple(f(i, h) for i in range(h + 1)) for h in range(H + 1)))

    @property
    def H(self) -> int:
        return len(self.rows) - 1

    def __call__(self, i: int, h: int):
        if not 0 <= i <= h <= self.H:
            raise IndexError((i, h))
        return self.rows[h][i]

    def first_endray(self) -> tuple:
        return tuple(row[0] for row in self.rows)

    def second_endray(self) -> tuple:
        return tuple(row[-1] for row in self.rows)

    def truncated(self, H: int) -> "LatticeHomotopy":
        return LatticeHomotopy(self.rows[: H + 1])

    def to_dict(self, space: SpaceOracle) -> dict:
        return {"H": self.H, "rows": [[space.serialize(v) for v in row] for row in self.rows]}

    @classmethod
    def from_dict(cls, doc: dict, space: SpaceOracle) -> "LatticeHomotopy":
        phi = cls(tuple(tuple(space.parse(v) for v in row) for row in doc["rows"]))
        if "H" in doc and doc["H"] != phi.H:
            raise SpaceError("declared H does not match the row table")
        return phi


def path_constant(alpha: VertexRay, H: int) -> LatticeHomotopy:
    """Every row h is constantly alpha(h)."""
    try:
        values = [alpha.at(h) for h in range(H + 1)]
    except IndexError as exc:
        raise SpaceError(f"ray is not defined up to height {H}") from exc
    return LatticeHomotopy(tuple((v,) * (h + 1) for h, v in enumerate(values)))


def path_inverse(phi: LatticeHomotopy) -> LatticeHomotopy:
    """(i, h) -> phi(h - i, h): the same path run backwards."""
    return LatticeHomotopy(tuple(row[::-1] for row in phi.rows))


def path_concat(phi: LatticeHomotopy, psi: LatticeHomotopy) -> LatticeHomotopy:
    """phi on the left half of each row at double speed, then psi.

    (i, h) -> phi(2i, h) when 2i <= h, else psi(2i - h, h).  Both pieces read
    the seam column 2i = h from the shared endray, so no rounding is needed.
    """
    H = min(phi.H, psi.H)
    if phi.second_endray()[: H + 1] != psi.first_endray()[: H + 1]:
        raise SpaceError("second endray of the first path differs from first endray of the second")
    rows = []
    for h in range(H + 1):
        a, b = phi.rows[h], psi.rows[h]
        rows.append(tuple(a[2 * i] if 2 * i <= h else b[2 * i - h] for i in range(h + 1)))
    return LatticeHomotopy(tuple(rows))


@dataclass
class BallEvidence:
    """Lattice preimage of one target ball."""

    center: Any
    radius: int
    size: int
    height_band: tuple | None
    rows_met: int
    confined: bool


@dataclass
class ControlCertificate:
    """Exact image bounds of the families U_R (same row) and V_R (same column)."""

    H: int
    radii: tuple
    U: dict
    V: dict
    balls: list = field(default_factory=list)
    margin: int = 0

    @property
    def proper_on_window(self) -> bool:
        return all(b.confined for b in self.balls)

    @property
    def passes(self) -> bool:
        return self.proper_on_window

    def u_within(self, A) -> bool:
        """U_R image bound at most (A + 1) R for every tested R."""
        return all(self.U[R] <= (A + 1) * R for R in self.radii)

    def to_dict(self, space: SpaceOracle) -> dict:
        return {
            "H": self.H,
            "radii": list(self.radii),
            "U": {str(R): b for R, b in self.U.items()},
            "V": {str(R): b for R, b in self.V.items()},
            "margin": self.margin,
            "proper_on_window": self.proper_on_window,
            "balls": [
                {
                    "center": space.serialize(b.center),
                    "radius": b.radius,
                    "size": b.size,
                    "height_band": list(b.height_band) if b.height_band else None,
                    "rows_met": b.rows_met,
                    "confined": b.confined,
                }
                for b in self.balls
            ],
        }


def check_lattice_map(
    phi: LatticeHomotopy,
    space: SpaceOracle,
    radii: list,
    target_balls: list = (),
    margin: int | None = None,
    height_limits: list | None = None,
) -> ControlCertificate:
    """Scan the whole lattice window.

    U[R] is the largest distance between phi(i, h) and phi(i', h) with
    |i - i'| < R; V[R] the largest between phi(i, h) and phi(i, h') with
    |h - h'| < R.  A target ball counts as confined when its lattice preimage
    stays below row H - margin (default margin max(1, H // 4)).  Passing
    ``height_limits`` (one per ball) replaces that row bound, e.g. by the
    last height at which a reference ray visits the ball.
    """
    radii = tuple(sorted(radii))
    if not radii or radii[0] <= 0:
        raise SpaceError("radii must be positive")
    H = phi.H
    margin = max(1, H // 4) if margin is None else margin
    top = radii[-1]
    dist = space.distance
    by_gap_u = [0] * top
    by_gap_v = [0] * top
    for h, row in enumerate(phi.rows):
        for i, x in enumerate(row):
            for g in range(1, min(top, h + 1 - i)):
                d = dist(x, row[i + g])
                if d > by_gap_u[g]:
                    by_gap_u[g] = d
            for g in range(1, min(top, H + 1 - h)):
                d = dist(x, phi.rows[h + g][i])
                if d > by_gap_v[g]:
                    by_gap_v[g] = d
    U = {R: max(by_gap_u[:R]) for R in radii}
    V = {R: max(by_gap_v[:R]) for R in radii}
    balls = []
    for n, (c, rho) in enumerate(target_balls):
        hs = [h for h, row in enumerate(phi.rows) for x in row if dist(c, x) <= rho]
        band = (min(hs), max(hs)) if hs else None
        limit = H - margin if height_limits is None else height_limits[n]
        confined = band is None or band[1] <= limit
        balls.append(BallEvidence(c, rho, len(hs), band, len(set(hs)), confined))
    return ControlCertificate(H, radii, U, V, balls, margin)

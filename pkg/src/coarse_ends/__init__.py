"""Desk-scale computations of ends and coarse path components of graphs."""
from __future__ import annotations

__version__ = "0.1.0"

from .space import (  # noqa: E402
    HorizonError,
    SpaceError,
    SpaceOracle,
    StaircaseAddress,
    VertexRay,
    ball,
    build_space,
    components_outside,
    geodesic,
)
from .ends import EndsProfile, EndVerdict, ends_profile, same_end, stabilized_end_count  # noqa: E402

__all__ = [
    "EndVerdict",
    "EndsProfile",
    "HorizonError",
    "SpaceError",
    "SpaceOracle",
    "StaircaseAddress",
    "VertexRay",
    "ball",
    "build_space",
    "components_outside",
    "ends_profile",
    "geodesic",
    "same_end",
    "stabilized_end_count",
]

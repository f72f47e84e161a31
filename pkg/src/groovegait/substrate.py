"""Groove-patterned terrain built from axis-aligned rectangular tiles.

Angles at this module's boundary come in two conventions.  Groove angles
stored on :class:`GrooveSpec` use the right-turn-positive convention of
the experiments (a positive groove steers the robot to the right).
Headings passed to the geometric queries are internal: degrees,
counter-clockwise-positive from the world +x axis seen from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from groovegait import _kernel
from groovegait.errors import InvalidQueryError

BACKGROUND = -1

DEFAULT_PITCH_MM = 0.45
DEFAULT_RIDGE_HEIGHT_MM = 0.15


def paper_angle_to_internal(angle_deg: float) -> float:
    """Right-turn-positive degrees to counter-clockwise-positive degrees."""
    return -angle_deg


def internal_angle_to_paper(angle_deg: float) -> float:
    # + 0.0 turns a negative zero into a plain zero
    return -angle_deg + 0.0


@dataclass(frozen=True)
class GrooveSpec:
    angle_deg: float = 0.0
    pitch_mm: float = DEFAULT_PITCH_MM
    ridge_height_mm: float = DEFAULT_RIDGE_HEIGHT_MM

    def __post_init__(self):
        if not -90.0 <= self.angle_deg <= 90.0:
            raise ValueError(f"angle_deg must lie in [-90, 90], got {self.angle_deg}")
        if not self.pitch_mm > 0:
            raise ValueError(f"pitch_mm must be > 0, got {self.pitch_mm}")
        if not self.ridge_height_mm >= 0:
            raise ValueError(f"ridge_height_mm must be >= 0, got {self.ridge_height_mm}")

    @property
    def normal_rad(self) -> float:
        """Groove-normal direction, internal convention, radians."""
        return math.radians(paper_angle_to_internal(self.angle_deg))

    def mirrored(self) -> GrooveSpec:
        return replace(self, angle_deg=-self.angle_deg + 0.0)


@dataclass(frozen=True)
class SubstrateTile:
    id: int
    x_min_mm: float
    x_max_mm: float
    y_min_mm: float
    y_max_mm: float
    groove: GrooveSpec = field(default_factory=GrooveSpec)

    def __post_init__(self):
        if not self.x_min_mm < self.x_max_mm:
            raise ValueError(f"tile {self.id}: x_min_mm must be < x_max_mm")
        if not self.y_min_mm < self.y_max_mm:
            raise ValueError(f"tile {self.id}: y_min_mm must be < y_max_mm")
        if self.id < 0:
            raise ValueError(f"tile id must be >= 0, got {self.id}")

    @property
    def width_mm(self) -> float:
        return self.x_max_mm - self.x_min_mm

    @property
    def height_mm(self) -> float:
        return self.y_max_mm - self.y_min_mm

    def contains(self, point) -> bool:
        x, y = point
        return self.x_min_mm <= x <= self.x_max_mm and self.y_min_mm <= y <= self.y_max_mm


@dataclass(frozen=True)
class WorldMap:
    """Ordered tiles over a background groove; later tiles win on overlap."""

    tiles: tuple[SubstrateTile, ...] = ()
    background: GrooveSpec = field(default_factory=GrooveSpec)

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(self.tiles))
        ids = [t.id for t in self.tiles]
        if len(set(ids)) != len(ids):
            raise ValueError(f"tile ids must be unique, got {ids}")

    @classmethod
    def uniform(cls, angle_deg: float = 0.0, **groove_kw) -> WorldMap:
        return cls((), GrooveSpec(angle_deg, **groove_kw))

    @cached_property
    def packed(self):
        """Array form consumed by the compiled kernel."""
        n = len(self.tiles)
        bounds = np.empty((n, 4))
        normal = np.empty(n + 1)
        pitch = np.empty(n + 1)
        corner = np.zeros((n + 1, 2))
        for i, t in enumerate(self.tiles):
            bounds[i] = (t.x_min_mm, t.x_max_mm, t.y_min_mm, t.y_max_mm)
            normal[i] = t.groove.normal_rad
            pitch[i] = t.groove.pitch_mm
            corner[i] = (t.x_min_mm, t.y_min_mm)
        normal[n] = self.background.normal_rad
        pitch[n] = self.background.pitch_mm
        return bounds, normal, pitch, corner

    @cached_property
    def tile_ids(self) -> np.ndarray:
        """Kernel index -> tile id, with the background index mapped to BACKGROUND."""
        return np.array([t.id for t in self.tiles] + [BACKGROUND], dtype=np.int64)

    def index_of(self, point) -> int:
        """Kernel index of the tile owning ``point`` (``len(tiles)`` for background)."""
        x, y = point
        return _kernel.locate(self.packed[0], float(x), float(y))

    def groove_at(self, point) -> GrooveSpec:
        i = self.index_of(point)
        return self.tiles[i].groove if i < len(self.tiles) else self.background

    def tile(self, tile_id: int) -> SubstrateTile:
        for t in self.tiles:
            if t.id == tile_id:
                return t
        raise KeyError(tile_id)

    def with_angle(self, angle_deg: float) -> WorldMap:
        """Same geometry with every groove (background included) set to ``angle_deg``."""
        tiles = tuple(replace(t, groove=replace(t.groove, angle_deg=angle_deg)) for t in self.tiles)
        return WorldMap(tiles, replace(self.background, angle_deg=angle_deg))


def locate(world: WorldMap, point) -> int:
    """Id of the highest-priority tile whose closed rectangle holds ``point``, else BACKGROUND."""
    return int(world.tile_ids[world.index_of(point)])


def groove_relative_angle(groove: GrooveSpec, heading_deg: float) -> float:
    """Signed angle in (-90, 90] from an internal heading to the groove-normal axis."""
    normal = paper_angle_to_internal(groove.angle_deg)
    return _kernel.fold_axis(normal - heading_deg, 180.0)


def snap_to_ridge(tile: SubstrateTile, point) -> tuple[float, float]:
    """Move ``point`` along the groove normal onto the nearest ridge line.

    Ridge lines sit at whole multiples of the pitch along the normal,
    counted from the tile's (x_min, y_min) corner.  Half-pitch ties go
    to the lower-index line.
    """
    if not tile.contains(point):
        raise InvalidQueryError(f"point {tuple(point)} is outside tile {tile.id}")
    x, y = float(point[0]), float(point[1])
    dx, dy = _kernel.snap_offset(x, y, tile.x_min_mm, tile.y_min_mm,
                                 tile.groove.normal_rad, tile.groove.pitch_mm)
    return x + dx, y + dy

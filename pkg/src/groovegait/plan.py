"""Inverse substrate design: choose groove angles for a row of plates.

Plates are equal-length strips laid one after another along world +x,
starting at the robot's initial front-foot x.  Each strip spans the full
lateral width of the course, so the robot stays on the row unless it
turns around.  A plate's exit is reached at the first full cycle that
leaves the front foot beyond the strip's far edge.

The greedy pass picks one plate at a time by exhaustive simulation of
every palette angle; ``refine`` then treats the angles as continuous and
runs coordinate descent on the miss distance to the final waypoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from groovegait import _kernel
from groovegait.gait import GaitParams
from groovegait.sim import Scenario, Trajectory, run, run_until_x
from groovegait.substrate import (DEFAULT_PITCH_MM, DEFAULT_RIDGE_HEIGHT_MM, GrooveSpec,
                                  SubstrateTile, WorldMap)


@dataclass(frozen=True)
class PathTarget:
    waypoints: tuple[tuple[float, float], ...]
    tolerance_mm: float = 1.0

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.waypoints)
        object.__setattr__(self, "waypoints", pts)
        if len(pts) < 2:
            raise ValueError("a target needs at least 2 waypoints")
        if any(a == b for a, b in zip(pts, pts[1:])):
            raise ValueError("consecutive waypoints must be distinct")
        if not self.tolerance_mm > 0:
            raise ValueError(f"tolerance_mm must be > 0, got {self.tolerance_mm}")

    def mirrored(self, y_axis: float = 0.0) -> PathTarget:
        return PathTarget(tuple((x, 2 * y_axis - y) for x, y in self.waypoints), self.tolerance_mm)


@dataclass(frozen=True)
class TilePalette:
    allowed_angles_deg: tuple[float, ...]
    tile_length_mm: float
    max_tiles: int
    tile_width_mm: float | None = None
    pitch_mm: float = DEFAULT_PITCH_MM
    ridge_height_mm: float = DEFAULT_RIDGE_HEIGHT_MM

    def __post_init__(self):
        object.__setattr__(self, "allowed_angles_deg",
                           tuple(float(a) for a in self.allowed_angles_deg))
        if not self.allowed_angles_deg:
            raise ValueError("palette needs at least one groove angle")
        if any(not -90 <= a <= 90 for a in self.allowed_angles_deg):
            raise ValueError("palette angles must lie in [-90, 90]")
        if not self.tile_length_mm > 0:
            raise ValueError(f"tile_length_mm must be > 0, got {self.tile_length_mm}")
        if self.max_tiles < 1:
            raise ValueError(f"max_tiles must be >= 1, got {self.max_tiles}")
        if self.tile_width_mm is not None and not self.tile_width_mm > 0:
            raise ValueError("tile_width_mm must be > 0")

    @property
    def width_mm(self) -> float:
        if self.tile_width_mm is not None:
            return self.tile_width_mm
        # wide enough that no course within budget can leave the row sideways
        return 2.0 * self.max_tiles * self.tile_length_mm + 100.0


@dataclass(frozen=True)
class Plan:
    tiles: tuple[tuple[float, float], ...]
    predicted: Trajectory
    converged: bool
    metrics: dict = field(default_factory=dict)
    greedy_scores: tuple[dict, ...] = ()
    course: _Course | None = field(default=None, repr=False, compare=False)

    @property
    def angles_deg(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.tiles)

    @property
    def world(self) -> WorldMap:
        return self.predicted.scenario.world


@dataclass(frozen=True)
class _Course:
    """Everything needed to turn a list of angles into a predicted run."""

    palette: TilePalette
    params: GaitParams
    rear_mm: tuple[float, float]
    heading_deg: float

    @property
    def start(self):
        return Scenario(WorldMap(), self.params, self.rear_mm, self.heading_deg).initial_state()

    @property
    def origin(self) -> tuple[float, float]:
        return self.start.front_mm

    def world(self, angles: Sequence[float]) -> WorldMap:
        x0, y0 = self.origin
        length, half = self.palette.tile_length_mm, 0.5 * self.palette.width_mm
        tiles = tuple(
            SubstrateTile(i, x0 + i * length, x0 + (i + 1) * length, y0 - half, y0 + half,
                          GrooveSpec(a, self.palette.pitch_mm, self.palette.ridge_height_mm))
            for i, a in enumerate(angles))
        return WorldMap(tiles)

    def simulate(self, angles: Sequence[float]) -> Trajectory:
        scenario = Scenario(self.world(angles), self.params, self.rear_mm, self.heading_deg)
        if not angles:
            return run(scenario)
        x_end = self.origin[0] + len(angles) * self.palette.tile_length_mm
        per_cycle = self.params.beta * self.params.stroke_mm
        cap = math.ceil(4.0 * len(angles) * self.palette.tile_length_mm / per_cycle) + 1
        return run_until_x(scenario, x_end, cap)


def closest_approach(path: np.ndarray, point) -> float:
    """Shortest distance from ``point`` to the polyline through ``path``."""
    p = np.asarray(point, dtype=float)
    if len(path) == 1:
        return float(np.linalg.norm(path[0] - p))
    a, b = path[:-1], path[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.divide(np.einsum("ij,ij->i", p - a, ab), denom,
                  out=np.zeros_like(denom), where=denom > 0)
    t = np.clip(t, 0.0, 1.0)
    nearest = a + t[:, None] * ab
    return float(np.min(np.hypot(*(nearest - p).T)))


def heading_error(trajectory: Trajectory, waypoint) -> float:
    """Angle (radians, >= 0) between the body axis and the bearing to ``waypoint``.

    Measured at the last contracted sample whose front foot is still short
    of the waypoint's x, so a waypoint inside the final plate is judged
    from just before the robot draws level with it.
    """
    wx, wy = waypoint
    contracted = np.arange(0, len(trajectory), 2)
    short = contracted[trajectory.front[contracted, 0] < wx]
    i = int(short[-1]) if len(short) else int(contracted[-1])
    fx, fy = trajectory.front[i]
    bearing = math.atan2(wy - fy, wx - fx)
    return abs(_kernel.wrap(bearing - float(trajectory.axis_rad[i]), math.pi))


def evaluate(plan: Plan, target: PathTarget) -> dict:
    path = plan.predicted.front
    misses = [closest_approach(path, w) for w in target.waypoints]
    return {
        "final_miss_mm": misses[-1],
        "max_waypoint_miss_mm": max(misses),
        "total_course_length_mm": float(sum(length for _, length in plan.tiles)),
    }


def _make_plan(course: _Course, angles, target, scores=()) -> Plan:
    traj = course.simulate(angles)
    plan = Plan(tuple((float(a), course.palette.tile_length_mm) for a in angles), traj, False,
                greedy_scores=tuple(scores), course=course)
    metrics = evaluate(plan, target)
    return replace(plan, converged=metrics["final_miss_mm"] <= target.tolerance_mm,
                   metrics=metrics)


def _pending(traj: Trajectory, target: PathTarget) -> list[int]:
    """Waypoints neither reached within tolerance nor already behind the front foot."""
    x_now = traj.front[-1, 0]
    return [j for j, w in enumerate(target.waypoints)
            if closest_approach(traj.front, w) > target.tolerance_mm and w[0] > x_now]


def plan_greedy(target: PathTarget, palette: TilePalette, params: GaitParams,
                initial_rear_mm=(0.0, 0.0), initial_heading_deg: float = 0.0) -> Plan:
    """Lay plates one at a time, each chosen to point the robot at the next waypoint.

    Candidates are scored by heading error toward the first pending
    waypoint; ties go to the smaller absolute angle, then the negative one.
    """
    course = _Course(palette, params, (float(initial_rear_mm[0]), float(initial_rear_mm[1])),
                     float(initial_heading_deg))
    final = len(target.waypoints) - 1
    angles: list[float] = []
    scores = []
    traj = course.simulate(angles)
    for _ in range(palette.max_tiles):
        if closest_approach(traj.front, target.waypoints[final]) <= target.tolerance_mm:
            break
        pending = _pending(traj, target)
        if final not in pending:
            break
        waypoint = target.waypoints[pending[0]]
        step = {}
        best = None
        for angle in palette.allowed_angles_deg:
            cand = course.simulate(angles + [angle])
            err = heading_error(cand, waypoint)
            step[angle] = err
            key = (err, abs(angle), angle)
            if best is None or key < best[0]:
                best = (key, angle, cand)
        angles.append(best[1])
        traj = best[2]
        scores.append(step)
    return _make_plan(course, angles, target, scores)


def refine(plan: Plan, target: PathTarget, params: GaitParams,
           initial_step_deg: float = 5.0, min_step_deg: float = 0.1) -> Plan:
    """Coordinate descent on the plate angles, minimising the final-waypoint miss.

    Each angle tries +/- step; the better of the two replaces it only on
    strict improvement.  The step halves after a pass with no change and
    the search stops once it drops below ``min_step_deg``.
    """
    course = replace(plan.course, params=params)
    final = target.waypoints[-1]

    def miss(angles):
        return closest_approach(course.simulate(angles).front, final)

    angles = list(plan.angles_deg)
    current = miss(angles)
    step = float(initial_step_deg)
    while step >= min_step_deg and angles:
        improved = False
        for i in range(len(angles)):
            best = None
            for a in (angles[i] - step, angles[i] + step):
                a = min(90.0, max(-90.0, a))
                if a == angles[i]:
                    continue
                key = (miss(angles[:i] + [a] + angles[i + 1:]), abs(a), a)
                if best is None or key < best[0]:
                    best = (key, a)
            if best is not None and best[0][0] < current:
                angles[i] = best[1]
                current = best[0][0]
                improved = True
        if not improved:
            step *= 0.5
    if angles == list(plan.angles_deg) and course == plan.course:
        return plan
    return _make_plan(course, angles, target, plan.greedy_scores)


def resimulate(plan: Plan) -> Trajectory:
    """Fresh run of the plan's plates from its recorded start."""
    return plan.course.simulate(list(plan.angles_deg))

"""Scenario runs, interface crossings, summaries and groove-angle sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from groovegait import _kernel
from groovegait.errors import DegenerateStateError
from groovegait.gait import GaitParams, Phase, RobotState
from groovegait.substrate import WorldMap, paper_angle_to_internal


@dataclass(frozen=True)
class Scenario:
    world: WorldMap = field(default_factory=WorldMap)
    params: GaitParams = field(default_factory=GaitParams)
    initial_rear_mm: tuple[float, float] = (0.0, 0.0)
    initial_heading_deg: float = 0.0
    cycles: int = 0
    name: str = ""

    def __post_init__(self):
        if self.cycles < 0:
            raise ValueError(f"cycles must be >= 0, got {self.cycles}")
        object.__setattr__(self, "initial_rear_mm",
                           (float(self.initial_rear_mm[0]), float(self.initial_rear_mm[1])))

    @property
    def duration_s(self) -> float:
        return self.cycles / self.params.frequency_hz

    def initial_state(self) -> RobotState:
        return RobotState.start(self.initial_rear_mm,
                                paper_angle_to_internal(self.initial_heading_deg), self.params)


class Sample(NamedTuple):
    time_s: float
    phase: Phase
    rear_mm: tuple[float, float]
    front_mm: tuple[float, float]
    heading_deg: float
    front_tile_id: int
    rear_tile_id: int


class Crossing(NamedTuple):
    sample_index: int
    foot: str
    from_tile: int
    to_tile: int


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples at every half-cycle boundary, stored column-wise.

    ``axis_rad`` is the internal heading; ``heading_deg`` gives the
    right-turn-positive view used in every file format.
    """

    scenario: Scenario
    rear: np.ndarray
    front: np.ndarray
    axis_rad: np.ndarray
    front_tile: np.ndarray
    rear_tile: np.ndarray

    def __len__(self):
        return len(self.axis_rad)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) / (2.0 * self.scenario.params.frequency_hz)

    @property
    def heading_deg(self) -> np.ndarray:
        return -np.degrees(self.axis_rad) + 0.0

    @property
    def phases(self) -> list[Phase]:
        return [Phase.EXTENDED if i % 2 else Phase.CONTRACTED for i in range(len(self))]

    def sample(self, i: int) -> Sample:
        i = range(len(self))[i]
        return Sample(
            i / (2.0 * self.scenario.params.frequency_hz),
            Phase.EXTENDED if i % 2 else Phase.CONTRACTED,
            (float(self.rear[i, 0]), float(self.rear[i, 1])),
            (float(self.front[i, 0]), float(self.front[i, 1])),
            -math.degrees(float(self.axis_rad[i])) + 0.0,
            int(self.front_tile[i]),
            int(self.rear_tile[i]),
        )

    @property
    def samples(self) -> list[Sample]:
        return [self.sample(i) for i in range(len(self))]

    def state(self, i: int) -> RobotState:
        s = self.sample(i)
        return RobotState(s.rear_mm, s.front_mm, s.phase, i // 2, s.time_s, float(self.axis_rad[i]))


def _simulate(scenario: Scenario, start: RobotState, max_cycles: int, stop_x: float = math.inf):
    world, p = scenario.world, scenario.params
    if start.phase is not Phase.CONTRACTED:
        raise ValueError("runs start from a contracted state")
    bounds, normal, pitch, corner = world.packed
    rear, front, axis, tf, tr, status = _kernel.simulate(
        *start.rear_mm, *start.front_mm, start.axis_rad, max_cycles, stop_x,
        bounds, normal, pitch, corner,
        p.l_min_mm, p.l_max_mm, p.k_front, p.k_rear, p.beta, p.snap_to_ridge)
    if status != _kernel.OK:
        raise DegenerateStateError("feet coincided", start.cycle_index + status)
    ids = world.tile_ids
    return rear, front, axis, ids[tf], ids[tr]


def run(scenario: Scenario) -> Trajectory:
    """Simulate ``scenario.cycles`` full cycles from the contracted start."""
    rear, front, axis, tf, tr = _simulate(scenario, scenario.initial_state(), scenario.cycles)
    return Trajectory(scenario, rear, front, axis, tf, tr)


def run_until_x(scenario: Scenario, stop_x: float, max_cycles: int) -> Trajectory:
    """Run whole cycles until the front foot reaches ``x >= stop_x``.

    The returned trajectory's scenario echo records the cycle count that
    was actually run, so ``run(trajectory.scenario)`` reproduces it.
    """
    rear, front, axis, tf, tr = _simulate(scenario, scenario.initial_state(), max_cycles, stop_x)
    done = replace(scenario, cycles=(len(axis) - 1) // 2)
    return Trajectory(done, rear, front, axis, tf, tr)


def crossings(trajectory: Trajectory, world: WorldMap) -> list[Crossing]:
    """Tile changes of either foot between consecutive samples."""
    ids = world.tile_ids
    bounds = world.packed[0]
    front = [int(ids[_kernel.locate(bounds, x, y)]) for x, y in trajectory.front]
    rear = [int(ids[_kernel.locate(bounds, x, y)]) for x, y in trajectory.rear]
    events = []
    for i in range(1, len(front)):
        if front[i] != front[i - 1]:
            events.append(Crossing(i, "front", front[i - 1], front[i]))
        if rear[i] != rear[i - 1]:
            events.append(Crossing(i, "rear", rear[i - 1], rear[i]))
    return events


@dataclass(frozen=True)
class Summary:
    final_heading_deg: float
    net_displacement_mm: float
    path_length_mm: float
    per_tile_mean_heading: dict[int, float]


def summarize(trajectory: Trajectory) -> Summary:
    heading = trajectory.heading_deg
    front = trajectory.front
    steps = np.hypot(*np.diff(front, axis=0).T) if len(front) > 1 else np.zeros(0)
    per_tile = {}
    for tile_id in sorted(set(trajectory.front_tile.tolist())):
        per_tile[tile_id] = float(heading[trajectory.front_tile == tile_id].mean())
    return Summary(
        final_heading_deg=float(heading[-1]),
        net_displacement_mm=math.dist(front[-1], front[0]),
        path_length_mm=float(steps.sum()),
        per_tile_mean_heading=per_tile,
    )


def groove_offsets(trajectory: Trajectory) -> np.ndarray:
    """Signed angle (internal radians) from the body axis to the groove normal
    under the front foot, sampled at every contracted state."""
    world = trajectory.scenario.world
    _, normal, _, _ = world.packed
    bounds = world.packed[0]
    out = np.empty((len(trajectory) + 1) // 2)
    for c, i in enumerate(range(0, len(trajectory), 2)):
        x, y = trajectory.front[i]
        t = _kernel.locate(bounds, x, y)
        out[c] = _kernel.fold_axis(normal[t] - trajectory.axis_rad[i], math.pi)
    return out


class SweepRow(NamedTuple):
    groove_angle_deg: float
    final_heading_deg: float
    cycles_to_half_alignment: int | None


def half_alignment_cycle(trajectory: Trajectory) -> int | None:
    """First cycle whose groove offset is at most half the initial one."""
    delta = np.abs(groove_offsets(trajectory))
    if delta[0] == 0.0:
        return None
    hits = np.nonzero(delta[1:] <= 0.5 * delta[0])[0]
    return int(hits[0]) + 1 if len(hits) else None


def sweep(base: Scenario, angles_deg: Sequence[float]) -> list[SweepRow]:
    """Re-run ``base`` with every groove set to each angle in turn."""
    if not len(angles_deg):
        raise ValueError("sweep needs at least one angle")
    rows = []
    for angle in angles_deg:
        traj = run(replace(base, world=base.world.with_angle(angle)))
        rows.append(SweepRow(float(angle), float(traj.heading_deg[-1]),
                             half_alignment_cycle(traj)))
    return rows

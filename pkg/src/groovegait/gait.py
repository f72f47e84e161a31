"""Half-cycle updates of the anchor-extend-contract gait.

Extension (voltage on): the front foot slips forward by ``beta`` of the
stroke along the body axis deflected toward the groove normal under the
front foot, the rear foot backslides by the remaining share.  The rear is
then re-placed so the body has exactly ``l_max`` length along the new
chord.  Contraction (voltage off): the front foot holds and the rear foot
is pulled in by the full stroke, after which the body is renormalised to
``l_min``.

Deflection of a foot's slip direction is ``k * delta`` where ``delta`` is
the signed angle from the body axis to the groove-normal axis under that
foot.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from groovegait import _kernel
from groovegait.errors import DegenerateStateError, OutOfRangeError
from groovegait.substrate import WorldMap


class Phase(str, enum.Enum):
    CONTRACTED = "contracted"
    EXTENDED = "extended"

    @property
    def offset(self) -> int:
        return 0 if self is Phase.CONTRACTED else 1


@dataclass(frozen=True)
class GaitParams:
    l_min_mm: float = 25.0
    l_max_mm: float = 27.0
    v_max_kv: float = 1.9
    frequency_hz: float = 0.4
    k_front: float = 0.5
    k_rear: float = 0.0
    beta: float = 1.0
    snap_to_ridge: bool = False

    def __post_init__(self):
        if not 0 < self.l_min_mm < self.l_max_mm:
            raise ValueError("need 0 < l_min_mm < l_max_mm, got "
                             f"l_min_mm={self.l_min_mm}, l_max_mm={self.l_max_mm}")
        if not self.v_max_kv > 0:
            raise ValueError(f"v_max_kv must be > 0, got {self.v_max_kv}")
        if not self.frequency_hz > 0:
            raise ValueError(f"frequency_hz must be > 0, got {self.frequency_hz}")
        if not 0 <= self.k_front <= 1:
            raise ValueError(f"k_front must lie in [0, 1], got {self.k_front}")
        if not 0 <= self.k_rear <= 1:
            raise ValueError(f"k_rear must lie in [0, 1], got {self.k_rear}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")

    @property
    def stroke_mm(self) -> float:
        return self.l_max_mm - self.l_min_mm

    @property
    def half_period_s(self) -> float:
        return 1.0 / (2.0 * self.frequency_hz)

    def length(self, phase: Phase) -> float:
        return self.l_min_mm if phase is Phase.CONTRACTED else self.l_max_mm


@dataclass(frozen=True)
class RobotState:
    """Foot positions plus the carried body axis.

    ``axis_rad`` is the internal heading in radians.  Leave it out to have
    it derived from the feet; the steppers carry it forward themselves.
    """

    rear_mm: tuple[float, float]
    front_mm: tuple[float, float]
    phase: Phase = Phase.CONTRACTED
    cycle_index: int = 0
    time_s: float = 0.0
    axis_rad: float | None = None

    def __post_init__(self):
        rear = (float(self.rear_mm[0]), float(self.rear_mm[1]))
        front = (float(self.front_mm[0]), float(self.front_mm[1]))
        object.__setattr__(self, "rear_mm", rear)
        object.__setattr__(self, "front_mm", front)
        object.__setattr__(self, "phase", Phase(self.phase))
        if self.axis_rad is None:
            dx = front[0] - rear[0]
            dy = front[1] - rear[1]
            if dx == 0.0 and dy == 0.0:
                raise DegenerateStateError("front and rear feet coincide", self.cycle_index)
            object.__setattr__(self, "axis_rad", math.atan2(dy, dx))

    @property
    def body_length_mm(self) -> float:
        return math.dist(self.front_mm, self.rear_mm)

    @classmethod
    def start(cls, rear_mm, heading_deg: float, params: GaitParams) -> RobotState:
        """Contracted state at cycle 0 with ``heading_deg`` internal."""
        psi = _kernel.wrap(math.radians(heading_deg), math.pi)
        rx, ry = float(rear_mm[0]), float(rear_mm[1])
        front = (rx + params.l_min_mm * math.cos(psi), ry + params.l_min_mm * math.sin(psi))
        return cls((rx, ry), front, Phase.CONTRACTED, 0, 0.0, psi)


def length_at_voltage(params: GaitParams, v_kv: float) -> float:
    """Body length under a static drive voltage; linear between the stroke ends."""
    if not 0 <= v_kv <= params.v_max_kv:
        raise OutOfRangeError(f"voltage {v_kv} kV outside [0, {params.v_max_kv}] kV")
    return params.l_min_mm + params.stroke_mm * (v_kv / params.v_max_kv)


def heading(state: RobotState) -> float:
    """Body-axis direction in internal degrees, in (-180, 180]."""
    return math.degrees(state.axis_rad)


def _time(params: GaitParams, cycle_index: int, phase: Phase) -> float:
    return (2 * cycle_index + phase.offset) / (2.0 * params.frequency_hz)


def extension_step(state: RobotState, world: WorldMap, params: GaitParams) -> RobotState:
    if state.phase is not Phase.CONTRACTED:
        raise ValueError("extension_step needs a contracted state")
    bounds, normal, pitch, corner = world.packed
    rx, ry, fx, fy, psi, ok = _kernel.extend(
        *state.rear_mm, *state.front_mm, state.axis_rad, bounds, normal, pitch, corner,
        params.l_min_mm, params.l_max_mm, params.k_front, params.k_rear, params.beta,
        params.snap_to_ridge)
    if not ok:
        raise DegenerateStateError("extension collapsed the body", state.cycle_index)
    return RobotState((rx, ry), (fx, fy), Phase.EXTENDED, state.cycle_index,
                      _time(params, state.cycle_index, Phase.EXTENDED), psi)


def contraction_step(state: RobotState, world: WorldMap, params: GaitParams) -> RobotState:
    if state.phase is not Phase.EXTENDED:
        raise ValueError("contraction_step needs an extended state")
    bounds, normal, _, _ = world.packed
    rx, ry, fx, fy, psi, ok = _kernel.contract(
        *state.rear_mm, *state.front_mm, state.axis_rad, bounds, normal,
        params.l_min_mm, params.l_max_mm, params.k_rear)
    if not ok:
        raise DegenerateStateError("contraction collapsed the body", state.cycle_index)
    cycle = state.cycle_index + 1
    return RobotState((rx, ry), (fx, fy), Phase.CONTRACTED, cycle,
                      _time(params, cycle, Phase.CONTRACTED), psi)


def full_cycle(state: RobotState, world: WorldMap, params: GaitParams) -> RobotState:
    return contraction_step(extension_step(state, world, params), world, params)

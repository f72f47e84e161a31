"""Quasi-static simulator of an inchworm robot steered by grooved substrates.

Includes calibration of the groove-coupling model, inverse design of
substrate tilings, and STL export of the tiles.
"""

from groovegait.errors import (ArityError, DegenerateStateError, GeometryError, GrooveGaitError,
                               InvalidQueryError, OutOfRangeError, ParseError)
from groovegait.fit import (FitProblem, FitResult, ObservationSeries, fit_golden,
                            fit_nelder_mead, loss)
from groovegait.formats import load_scenario
from groovegait.gait import (GaitParams, Phase, RobotState, contraction_step, extension_step,
                             full_cycle, heading, length_at_voltage)
from groovegait.mesh import TriangleMesh, substrate_mesh, write_stl
from groovegait.plan import (PathTarget, Plan, TilePalette, evaluate, plan_greedy, refine)
from groovegait.sim import Scenario, Trajectory, crossings, run, summarize, sweep
from groovegait.substrate import (BACKGROUND, GrooveSpec, SubstrateTile, WorldMap,
                                  groove_relative_angle, locate, paper_angle_to_internal,
                                  snap_to_ridge)

__version__ = "0.1.0"

__all__ = [
    "ArityError", "DegenerateStateError", "GeometryError", "GrooveGaitError",
    "InvalidQueryError", "OutOfRangeError", "ParseError",
    "FitProblem", "FitResult", "ObservationSeries", "fit_golden", "fit_nelder_mead", "loss",
    "load_scenario",
    "GaitParams", "Phase", "RobotState", "contraction_step", "extension_step", "full_cycle",
    "heading", "length_at_voltage",
    "TriangleMesh", "substrate_mesh", "write_stl",
    "PathTarget", "Plan", "TilePalette", "evaluate", "plan_greedy", "refine",
    "Scenario", "Trajectory", "crossings", "run", "summarize", "sweep",
    "BACKGROUND", "GrooveSpec", "SubstrateTile", "WorldMap", "groove_relative_angle", "locate",
    "paper_angle_to_internal", "snap_to_ridge",
]

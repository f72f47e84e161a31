"""Command-line front end.

Exit status: 0 on success, 1 for bad input (unreadable or invalid files,
arguments, runs that degenerate), 2 for anything unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from groovegait import fit, formats, mesh, plan, sim, svg
from groovegait.errors import GrooveGaitError
from groovegait.substrate import GrooveSpec, SubstrateTile

log = logging.getLogger("groovegait")


def _emit(text: str, output) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        formats.write_text(output, text)


def _angles(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("angle list is empty")
    return values


def cmd_simulate(args) -> None:
    traj = sim.run(formats.load_scenario(args.scenario))
    _emit(formats.trajectory_csv(traj), args.output)


def cmd_sweep(args) -> None:
    base = formats.load_scenario(args.scenario)
    _emit(formats.sweep_csv(sim.sweep(base, args.angles)), args.output)


def calibration_report(result: fit.FitResult) -> str:
    lines = [f"method: {result.method}"]
    lines += [f"{name}: {formats.fmt(value)}" for name, value in result.params.items()]
    lines += [
        f"sse: {formats.fmt(result.sse)}",
        f"evaluations: {result.evaluations}",
        f"converged: {'true' if result.converged else 'false'}",
    ]
    lines += [f"note: {note}" for note in result.notes]
    return "\n".join(lines) + "\n"


def cmd_calibrate(args) -> None:
    scenario, free, bounds, method = formats.load_problem(args.problem)
    points = formats.read_observations(formats.resolve(args.observations, suffix=".csv"))
    try:
        series = fit.ObservationSeries(scenario, tuple(points))
        problem = fit.FitProblem((series,), free, bounds)
    except ValueError as exc:
        raise GrooveGaitError(str(exc)) from None
    method = args.method or method
    result = fit.fit_golden(problem) if method == "golden" else fit.fit_nelder_mead(problem)
    _emit(calibration_report(result), args.output)


def cmd_plan(args) -> None:
    target, params, rear, heading = formats.load_target(args.target)
    palette = formats.load_palette(args.palette)
    result = plan.plan_greedy(target, palette, params, rear, heading)
    if not args.no_refine:
        result = plan.refine(result, target, params)
    if not result.converged:
        log.info("plan did not reach the final waypoint within %s mm (miss %s mm)",
                 formats.fmt(target.tolerance_mm), formats.fmt(result.metrics["final_miss_mm"]))
    formats.write_text(args.output, formats.plan_text(result))
    predicted = args.trajectory or str(Path(args.output).with_suffix("")) + "_predicted.csv"
    formats.write_text(predicted, formats.trajectory_csv(result.predicted))


def _plan_tiles(path, width: float) -> list[SubstrateTile]:
    tiles, x = [], 0.0
    for i, (angle, length) in enumerate(formats.read_plan(path)):
        tiles.append(SubstrateTile(i, x, x + length, -0.5 * width, 0.5 * width, GrooveSpec(angle)))
        x += length
    return tiles


def cmd_mesh(args) -> None:
    source = Path(args.input)
    if source.suffix.lower() in (".yaml", ".yml") or not source.exists():
        tiles = formats.load_scenario(args.input).world.tiles
    else:
        tiles = _plan_tiles(source, args.plate_width)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for tile in tiles:
        n = mesh.write_stl(mesh.substrate_mesh(tile, args.thickness), out / f"tile_{tile.id}.stl")
        log.info("tile_%d.stl: %d bytes", tile.id, n)


def cmd_plot(args) -> None:
    series, markers = [], []
    for i, path in enumerate(args.csv):
        cols = formats.read_trajectory_csv(path)
        series.append((Path(path).stem, cols["time_s"], cols["heading_deg"]))
        if args.tile_markers and i == 0:
            markers = svg.tile_boundaries(cols["time_s"], cols["front_tile"])
    _emit(svg.render(series, markers), args.output)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="groovegait",
        description="Groove-steered inchworm robot: simulate, sweep, calibrate, plan, mesh, plot. "
                    "Angles are degrees, positive = right turn.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario, write a trajectory CSV")
    s.add_argument("scenario", help="scenario file or shipped name (fig8a, fig8b, fig9a, fig9b)")
    s.add_argument("-o", "--output", help="output CSV (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="rerun a scenario over a list of uniform groove angles")
    s.add_argument("scenario")
    s.add_argument("--angles", type=_angles, default=[0.0, 5.0, 15.0, 30.0],
                   help="comma-separated groove angles (default: 0,5,15,30)")
    s.add_argument("-o", "--output", help="output CSV (default: stdout)")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("calibrate", help="fit gait parameters to observed headings")
    s.add_argument("problem", help="problem file (or shipped name, e.g. fig9a_anchor)")
    s.add_argument("observations", help="CSV with header time_s,heading_deg")
    s.add_argument("--method", choices=("golden", "nelder-mead"),
                   help="override the problem file's method")
    s.add_argument("-o", "--output", help="report file (default: stdout)")
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("plan", help="choose plate angles that steer the robot to waypoints")
    s.add_argument("target")
    s.add_argument("palette")
    s.add_argument("-o", "--output", required=True, help="plan file")
    s.add_argument("--trajectory", help="predicted trajectory CSV "
                                        "(default: <plan>_predicted.csv)")
    s.add_argument("--no-refine", action="store_true", help="stop after the greedy pass")
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("mesh", help="write one STL per tile of a scenario or plan file")
    s.add_argument("input", help="scenario (.yaml or shipped name) or plan file")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--thickness", type=float, default=mesh.DEFAULT_BASE_THICKNESS_MM,
                   help="slab thickness in mm (default: %(default)s)")
    s.add_argument("--plate-width", type=float, default=100.0,
                   help="plate width in mm for plan files (default: %(default)s)")
    s.set_defaults(func=cmd_mesh)

    s = sub.add_parser("plot", help="heading-versus-time SVG from trajectory CSVs")
    s.add_argument("csv", nargs="+")
    s.add_argument("--tile-markers", action="store_true",
                   help="mark the first trajectory's front-foot tile changes")
    s.add_argument("-o", "--output", help="output SVG (default: stdout)")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("groovegait: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)
    log.propagate = False
    try:
        args.func(args)
    except (GrooveGaitError, ValueError, OSError) as exc:
        log.error("error: %s", exc)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        log.error("internal error: %s: %s", type(exc).__name__, exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

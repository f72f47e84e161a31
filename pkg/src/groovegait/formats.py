"""Text file formats: scenario/target/palette/problem YAML, CSVs and plan files.

Every angle in these files is right-turn-positive degrees.  Output is
byte-reproducible: fixed column order, ``.9g`` floats, LF line endings.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from importlib import resources
from pathlib import Path

import yaml

from groovegait.errors import ParseError
from groovegait.gait import GaitParams
from groovegait.sim import Trajectory
from groovegait.substrate import (DEFAULT_PITCH_MM, DEFAULT_RIDGE_HEIGHT_MM, GrooveSpec,
                                  SubstrateTile, WorldMap)

log = logging.getLogger("groovegait")

TRAJECTORY_HEADER = ("time_s", "phase", "rear_x_mm", "rear_y_mm", "front_x_mm", "front_y_mm",
                     "heading_deg", "front_tile", "rear_tile")
OBSERVATION_HEADER = ("time_s", "heading_deg")
SWEEP_HEADER = ("groove_angle_deg", "final_heading_deg", "cycles_to_half_alignment")

GAIT_KEYS = ("l_min_mm", "l_max_mm", "v_max_kv", "frequency_hz", "k_front", "k_rear", "beta",
             "snap_to_ridge")


def fmt(x: float, digits: int = 9) -> str:
    """Shortest ``digits``-significant rendering; never emits ``-0``."""
    return format(float(x) + 0.0, f".{digits}g")


# --- YAML with line numbers -------------------------------------------------

class _Mapping(dict):
    line: int = 0

    def __init__(self):
        super().__init__()
        self.lines = {}

    def line_of(self, key) -> int:
        return self.lines.get(key, self.line)


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _Mapping()
    out.line = node.start_mark.line + 1
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", line=key_node.start_mark.line + 1)
        out[key] = loader.construct_object(value_node, deep=True)
        out.lines[key] = key_node.start_mark.line + 1
    return out


_Loader.add_constructor("tag:yaml.org,2002:map", _construct_mapping)


class _Doc:
    """Parsed YAML plus the path, for diagnostics."""

    def __init__(self, path):
        self.path = str(path)
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read file: {exc.strerror}", self.path) from exc
        try:
            data = yaml.load(text, Loader=_Loader)
        except ParseError as exc:
            raise ParseError(exc.message, self.path, exc.line) from None
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", self.path,
                             mark.line + 1 if mark else None) from None
        if not isinstance(data, _Mapping):
            raise ParseError("top level must be a mapping", self.path, 1)
        self.root = data

    def error(self, message, line=None):
        return ParseError(message, self.path, line)

    def section(self, parent: _Mapping, key, required=True, allowed=None) -> _Mapping:
        if key not in parent:
            if required:
                raise self.error(f"missing section '{key}'", parent.line)
            empty = _Mapping()
            empty.line = parent.line
            return empty
        value = parent[key]
        if not isinstance(value, _Mapping):
            raise self.error(f"'{key}' must be a mapping", parent.line_of(key))
        if allowed is not None:
            self.reject_unknown(value, allowed, key)
        return value

    def reject_unknown(self, mapping: _Mapping, allowed, where):
        for key in mapping:
            if key not in allowed:
                raise self.error(f"unknown key {key!r} in '{where}' "
                                 f"(expected one of: {', '.join(allowed)})", mapping.line_of(key))

    def number(self, mapping: _Mapping, key, where, default=None, integer=False, missing=None):
        """Numeric field; a missing one takes ``default`` and is noted in ``missing``
        (or logged at once when no list is given)."""
        if key not in mapping:
            if default is None:
                raise self.error(f"missing field '{where}.{key}'", mapping.line)
            if missing is None:
                self.note_defaults(mapping, where, [f"{key}={default}"])
            else:
                missing.append(f"{key}={default}")
            return default
        value = mapping[key]
        ok = isinstance(value, int) if integer else isinstance(value, (int, float))
        if isinstance(value, bool) or not ok or (not integer and not math.isfinite(value)):
            kind = "an integer" if integer else "a finite number"
            raise self.error(f"field '{where}.{key}' must be {kind}, got {value!r}",
                             mapping.line_of(key))
        return value if integer else float(value)

    def note_defaults(self, mapping: _Mapping, where, items):
        if items:
            log.info("%s:%d: defaults applied in '%s': %s", self.path, mapping.line, where,
                     ", ".join(items))

    def pair(self, mapping: _Mapping, key, where):
        value = mapping.get(key)
        if (not isinstance(value, list) or len(value) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
            raise self.error(f"field '{where}.{key}' must be a pair of numbers",
                             mapping.line_of(key))
        return float(value[0]), float(value[1])

    def build(self, factory, line, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except ValueError as exc:
            raise self.error(str(exc), line) from None


def shipped_path(name: str) -> Path:
    """Path of a scenario/problem file shipped with the package."""
    return Path(str(resources.files("groovegait") / "scenarios" / name))


def resolve(path_or_name, suffix=".yaml", base: Path | None = None) -> Path:
    """A real path, a path relative to ``base``, or the name of a shipped file."""
    p = Path(path_or_name)
    if p.exists():
        return p
    if base is not None and (base / p).exists():
        return base / p
    shipped = shipped_path(p.name if p.suffix else p.name + suffix)
    if shipped.exists():
        return shipped
    raise ParseError(f"no such file or shipped scenario: {path_or_name}")


def _gait(doc: _Doc, root: _Mapping) -> GaitParams:
    section = doc.section(root, "gait", required=False, allowed=GAIT_KEYS)
    defaults = GaitParams()
    values, missing = {}, []
    for key in GAIT_KEYS:
        if key == "snap_to_ridge":
            value = section.get(key, defaults.snap_to_ridge)
            if not isinstance(value, bool):
                raise doc.error("field 'gait.snap_to_ridge' must be true or false",
                                section.line_of(key))
            values[key] = value
        else:
            values[key] = doc.number(section, key, "gait", getattr(defaults, key),
                                     missing=missing)
    doc.note_defaults(section, "gait", missing)
    return doc.build(GaitParams, section.line, **values)


def _groove(doc: _Doc, mapping: _Mapping, where) -> GrooveSpec:
    missing = []
    angle = doc.number(mapping, "groove_angle_deg", where, 0.0, missing=missing)
    pitch = doc.number(mapping, "pitch_mm", where, DEFAULT_PITCH_MM, missing=missing)
    height = doc.number(mapping, "ridge_height_mm", where, DEFAULT_RIDGE_HEIGHT_MM, missing=missing)
    # name the file's field, not the constructor's
    for key, ok, rule in (("groove_angle_deg", -90 <= angle <= 90, "lie in [-90, 90]"),
                          ("pitch_mm", pitch > 0, "be > 0"),
                          ("ridge_height_mm", height >= 0, "be >= 0")):
        if not ok:
            raise doc.error(f"field '{where}.{key}' must {rule}", mapping.line_of(key))
    groove = GrooveSpec(angle, pitch, height)
    doc.note_defaults(mapping, where, missing)
    return groove


TILE_KEYS = ("id", "bounds_mm", "groove_angle_deg", "pitch_mm", "ridge_height_mm")
GROOVE_KEYS = ("groove_angle_deg", "pitch_mm", "ridge_height_mm")


def _world(doc: _Doc, root: _Mapping) -> WorldMap:
    background = GrooveSpec()
    if "background" in root:
        background = _groove(doc, doc.section(root, "background", allowed=GROOVE_KEYS),
                             "background")
    records = root.get("tiles", [])
    if not isinstance(records, list):
        raise doc.error("'tiles' must be a list of tile records", root.line_of("tiles"))
    tiles = []
    for i, rec in enumerate(records):
        if not isinstance(rec, _Mapping):
            raise doc.error(f"tile record {i} must be a mapping", root.line_of("tiles"))
        doc.reject_unknown(rec, TILE_KEYS, f"tiles[{i}]")
        tile_id = doc.number(rec, "id", f"tiles[{i}]", i, integer=True) if "id" in rec else i
        bounds = rec.get("bounds_mm")
        if (not isinstance(bounds, list) or len(bounds) != 4
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in bounds)):
            raise doc.error(f"field 'tiles[{i}].bounds_mm' must be [x_min, x_max, y_min, y_max]",
                            rec.line_of("bounds_mm"))
        groove = _groove(doc, rec, f"tiles[{i}]")
        tiles.append(doc.build(SubstrateTile, rec.line_of("bounds_mm"), tile_id, *map(float, bounds), groove))
    return doc.build(WorldMap, root.line_of("tiles"), tuple(tiles), background)


SCENARIO_KEYS = ("description", "gait", "background", "tiles", "initial", "run")


def load_scenario(path_or_name):
    """Read a scenario file (or a shipped scenario by name)."""
    from groovegait.sim import Scenario

    path = resolve(path_or_name)
    doc = _Doc(path)
    doc.reject_unknown(doc.root, SCENARIO_KEYS, "scenario")
    params = _gait(doc, doc.root)
    world = _world(doc, doc.root)
    initial = doc.section(doc.root, "initial", required=False, allowed=("rear_mm", "heading_deg"))
    rear = doc.pair(initial, "rear_mm", "initial") if "rear_mm" in initial else (0.0, 0.0)
    heading = doc.number(initial, "heading_deg", "initial", 0.0)
    run_section = doc.section(doc.root, "run", allowed=("cycles",))
    cycles = doc.number(run_section, "cycles", "run", integer=True)
    name = path.stem
    return doc.build(Scenario, run_section.line, world, params, rear, heading, cycles, name)


def load_target(path):
    """Target file: waypoints plus optional gait and start sections.

    Returns ``(PathTarget, GaitParams, initial_rear_mm, initial_heading_deg)``.
    """
    from groovegait.plan import PathTarget

    doc = _Doc(resolve(path))
    doc.reject_unknown(doc.root, ("description", "waypoints_mm", "tolerance_mm", "gait",
                                  "initial"), "target")
    raw = doc.root.get("waypoints_mm")
    if not isinstance(raw, list):
        raise doc.error("'waypoints_mm' must be a list of [x, y] pairs", doc.root.line)
    holder = _Mapping()
    points = []
    for i, item in enumerate(raw):
        holder.clear()
        holder["p"] = item
        holder.line = doc.root.line_of("waypoints_mm")
        points.append(doc.pair(holder, "p", f"waypoints_mm[{i}]"))
    tol = doc.number(doc.root, "tolerance_mm", "target", 1.0)
    target = doc.build(PathTarget, doc.root.line_of("waypoints_mm"), tuple(points), tol)
    params = _gait(doc, doc.root)
    initial = doc.section(doc.root, "initial", required=False, allowed=("rear_mm", "heading_deg"))
    rear = doc.pair(initial, "rear_mm", "initial") if "rear_mm" in initial else (0.0, 0.0)
    heading = doc.number(initial, "heading_deg", "initial", 0.0)
    return target, params, rear, heading


def load_palette(path):
    from groovegait.plan import TilePalette

    doc = _Doc(resolve(path))
    keys = ("description", "allowed_angles_deg", "tile_length_mm", "max_tiles", "tile_width_mm",
            "pitch_mm", "ridge_height_mm")
    doc.reject_unknown(doc.root, keys, "palette")
    angles = doc.root.get("allowed_angles_deg")
    if (not isinstance(angles, list)
            or any(isinstance(a, bool) or not isinstance(a, (int, float)) for a in angles)):
        raise doc.error("'allowed_angles_deg' must be a list of numbers",
                        doc.root.line_of("allowed_angles_deg"))
    width = None
    if "tile_width_mm" in doc.root:
        width = doc.number(doc.root, "tile_width_mm", "palette")
    missing = []
    palette = doc.build(
        TilePalette, doc.root.line,
        tuple(float(a) for a in angles),
        doc.number(doc.root, "tile_length_mm", "palette"),
        doc.number(doc.root, "max_tiles", "palette", integer=True),
        width,
        doc.number(doc.root, "pitch_mm", "palette", DEFAULT_PITCH_MM, missing=missing),
        doc.number(doc.root, "ridge_height_mm", "palette", DEFAULT_RIDGE_HEIGHT_MM,
                   missing=missing),
    )
    doc.note_defaults(doc.root, "palette", missing)
    return palette


def load_problem(path):
    """Calibration problem: scenario reference, free parameters with bounds, method.

    Returns ``(Scenario, free_params, bounds, method)``; ``method`` is
    ``"golden"`` or ``"nelder-mead"``.
    """
    path = resolve(path)
    doc = _Doc(path)
    doc.reject_unknown(doc.root, ("description", "scenario", "free", "method"), "problem")
    ref = doc.root.get("scenario")
    if not isinstance(ref, str):
        raise doc.error("'scenario' must name a scenario file", doc.root.line_of("scenario"))
    scenario = load_scenario(resolve(ref, base=path.parent))
    free = doc.section(doc.root, "free")
    names, bounds = [], {}
    for name in free:
        bounds[name] = doc.pair(free, name, "free")
        names.append(name)
    method = doc.root.get("method", "golden" if len(names) == 1 else "nelder-mead")
    if method not in ("golden", "nelder-mead"):
        raise doc.error(f"method must be 'golden' or 'nelder-mead', got {method!r}",
                        doc.root.line_of("method"))
    return scenario, tuple(names), bounds, method


# --- CSV ----------------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def trajectory_csv(trajectory: Trajectory) -> str:
    headings = trajectory.heading_deg
    times = trajectory.times
    rows = []
    for i in range(len(trajectory)):
        rows.append((
            fmt(times[i]), "extended" if i % 2 else "contracted",
            fmt(trajectory.rear[i, 0]), fmt(trajectory.rear[i, 1]),
            fmt(trajectory.front[i, 0]), fmt(trajectory.front[i, 1]),
            fmt(headings[i]), int(trajectory.front_tile[i]), int(trajectory.rear_tile[i]),
        ))
    return _csv_text(TRAJECTORY_HEADER, rows)


def sweep_csv(rows) -> str:
    return _csv_text(SWEEP_HEADER, [
        (fmt(r.groove_angle_deg), fmt(r.final_heading_deg),
         "" if r.cycles_to_half_alignment is None else r.cycles_to_half_alignment)
        for r in rows])


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_rows(path, header):
    path = str(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from exc
    if not rows or tuple(c.strip() for c in rows[0]) != tuple(header):
        raise ParseError(f"header must be '{','.join(header)}'", path, 1)
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
        yield lineno, row


def _float(text, path, lineno, column):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column '{column}': not a number: {text!r}", path, lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"column '{column}': value must be finite", path, lineno)
    return value


def read_observations(path) -> list[tuple[float, float]]:
    """``time_s,heading_deg`` rows, times strictly increasing."""
    points = []
    for lineno, row in _read_rows(path, OBSERVATION_HEADER):
        t = _float(row[0], path, lineno, "time_s")
        h = _float(row[1], path, lineno, "heading_deg")
        if t < 0:
            raise ParseError("time_s must be nonnegative", str(path), lineno)
        if points and t <= points[-1][0]:
            raise ParseError("time_s must be strictly increasing", str(path), lineno)
        points.append((t, h))
    return points


def read_trajectory_csv(path) -> dict:
    """Columns of a trajectory CSV: time, heading and front tile id."""
    times, headings, tiles = [], [], []
    for lineno, row in _read_rows(path, TRAJECTORY_HEADER):
        times.append(_float(row[0], path, lineno, "time_s"))
        headings.append(_float(row[6], path, lineno, "heading_deg"))
        try:
            tiles.append(int(row[7]))
        except ValueError:
            raise ParseError(f"column 'front_tile': not an integer: {row[7]!r}",
                             str(path), lineno) from None
    if not times:
        raise ParseError("no data rows", str(path))
    return {"time_s": times, "heading_deg": headings, "front_tile": tiles}


# --- plan files ------------------------------------------------------------------

def plan_text(plan) -> str:
    lines = [f"{fmt(a)},{fmt(length)}" for a, length in plan.tiles]
    m = plan.metrics
    lines.append("# " + ",".join([
        f"final_miss_mm={fmt(m['final_miss_mm'])}",
        f"max_waypoint_miss_mm={fmt(m['max_waypoint_miss_mm'])}",
        f"total_course_length_mm={fmt(m['total_course_length_mm'])}",
        f"converged={'true' if plan.converged else 'false'}",
    ]))
    return "\n".join(lines) + "\n"


def read_plan(path) -> list[tuple[float, float]]:
    """``angle_deg,length_mm`` lines; ``#`` comments and blank lines skipped."""
    path = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from exc
    tiles = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError("expected 'angle_deg,length_mm'", path, lineno)
        angle = _float(parts[0], path, lineno, "angle_deg")
        length = _float(parts[1], path, lineno, "length_mm")
        if not -90 <= angle <= 90 or not length > 0:
            raise ParseError("angle must lie in [-90, 90] and length must be > 0", path, lineno)
        tiles.append((angle, length))
    return tiles

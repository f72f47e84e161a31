"""Watertight substrate meshes and binary STL output.

A tile becomes a slab of the tile's footprint whose top carries a
triangular ridge wave.  Measured along the groove normal from the tile's
(x_min, y_min) corner, the wave has valleys at whole multiples of the
pitch and apexes half way between, so each pitch interval holds one
triangular-prism ridge.  The top surface is split into strips between
the wave's crease lines; every strip is planar, and strips, side walls
and bottom share vertices exactly.
"""

from __future__ import annotations

import bisect
import io
import math
import struct
from collections import Counter
from dataclasses import dataclass

import numpy as np

from groovegait.errors import GeometryError
from groovegait.substrate import SubstrateTile

STL_HEADER = b"groove-gait substrate".ljust(80, b" ")
DEFAULT_BASE_THICKNESS_MM = 2.0

_STL_RECORD = np.dtype([("normal", "<f4", (3,)), ("vertices", "<f4", (3, 3)), ("attr", "<u2")])

# lines closer than this (mm) to a corner are moved onto it
_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    @classmethod
    def empty(cls) -> TriangleMesh:
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    def __len__(self):
        return len(self.triangles)

    @property
    def corners(self) -> np.ndarray:
        """(n, 3, 3) triangle corner coordinates."""
        return self.vertices[self.triangles]

    @property
    def normals(self) -> np.ndarray:
        if not len(self):
            return np.zeros((0, 3))
        c = self.corners
        n = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        return np.divide(n, norm, out=np.zeros_like(n), where=norm > 0)

    def signed_volume(self) -> float:
        c = self.corners
        return float(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0)


def edge_counts(mesh: TriangleMesh) -> Counter:
    """Undirected edge -> number of triangles using it."""
    counts = Counter()
    for a, b, c in mesh.triangles.tolist():
        for e in ((a, b), (b, c), (c, a)):
            counts[(min(e), max(e))] += 1
    return counts


def is_watertight(mesh: TriangleMesh) -> bool:
    return bool(len(mesh)) and all(n == 2 for n in edge_counts(mesh).values())


def _unit_normal(tile: SubstrateTile) -> tuple[float, float]:
    theta = tile.groove.normal_rad
    c, s = math.cos(theta), math.sin(theta)
    # exact zeros keep axis-aligned grooves axis-aligned
    return (0.0 if abs(c) < 1e-15 else c), (0.0 if abs(s) < 1e-15 else s)


def _wave(s: float, pitch: float) -> float:
    """Ridge profile in [0, 1]: 0 at multiples of the pitch, 1 half way."""
    u = s / pitch - math.floor(s / pitch)
    return 1.0 - abs(2.0 * u - 1.0)


def substrate_mesh(tile: SubstrateTile, base_thickness_mm: float = DEFAULT_BASE_THICKNESS_MM
                   ) -> TriangleMesh:
    if not base_thickness_mm > 0:
        raise GeometryError(f"base thickness must be > 0, got {base_thickness_mm}")
    pitch, height = tile.groove.pitch_mm, tile.groove.ridge_height_mm
    if pitch > min(tile.width_mm, tile.height_mm):
        raise GeometryError(f"tile {tile.id}: pitch {pitch} mm exceeds the tile's "
                            f"smaller side {min(tile.width_mm, tile.height_mm)} mm")
    x0, x1, y0, y1 = tile.x_min_mm, tile.x_max_mm, tile.y_min_mm, tile.y_max_mm
    w, h_ = x1 - x0, y1 - y0
    c, s = _unit_normal(tile)

    def s_of(x, y):
        return (x - x0) * c + (y - y0) * s

    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    corner_s = [s_of(*p) for p in corners]
    s_lo, s_hi = min(corner_s), max(corner_s)

    # crease lines strictly inside the footprint, keyed by half-pitch index m
    lines = []
    if height > 0:
        half = 0.5 * pitch
        for m in range(math.floor(s_lo / half), math.ceil(s_hi / half) + 1):
            value = m * half
            if value - s_lo > _EPS and s_hi - value > _EPS:
                lines.append((m, value))

    # perimeter points: (perimeter parameter, x, y, s, z-profile, line slot or None)
    edges = [((x0, y0), (x1, y0), 0.0), ((x1, y0), (x1, y1), w),
             ((x1, y1), (x0, y1), w + h_), ((x0, y1), (x0, y0), 2 * w + h_)]
    corner_slot = {}
    points = []
    for k, (p, s_c) in enumerate(zip(corners, corner_s)):
        points.append([edges[k][2], p[0], p[1], s_c, _wave(s_c, pitch), set()])
        corner_slot[k] = len(points) - 1
    for slot, (m, value) in enumerate(lines):
        hit = 0
        for k, s_c in enumerate(corner_s):
            if abs(s_c - value) <= _EPS:
                points[corner_slot[k]][5].add(slot)
                points[corner_slot[k]][4] = float(m % 2)
                hit += 1
        for k, (p, q, t0) in enumerate(edges):
            sp, sq = corner_s[k], corner_s[(k + 1) % 4]
            if min(sp, sq) + _EPS < value < max(sp, sq) - _EPS:
                frac = (value - sp) / (sq - sp)
                x = p[0] + frac * (q[0] - p[0])
                y = p[1] + frac * (q[1] - p[1])
                if p[1] == q[1]:
                    y = p[1]
                    t = t0 + abs(x - p[0])
                else:
                    x = p[0]
                    t = t0 + abs(y - p[1])
                points.append([t, x, y, value, float(m % 2), {slot}])
                hit += 1
        if hit != 2:
            raise GeometryError(f"tile {tile.id}: crease line {m} met the border {hit} times")
    points.sort(key=lambda r: r[0])
    n = len(points)

    xy = np.array([(r[1], r[2]) for r in points])
    z_top = base_thickness_mm + height * np.array([r[4] for r in points])
    vertices = np.vstack([
        np.column_stack([xy, z_top]),
        np.column_stack([xy, np.zeros(n)]),
    ])

    values = [v for _, v in lines]
    # strip j lies between line j-1 and line j; points on a line belong to both sides
    strips = [[] for _ in range(len(lines) + 1)]
    for i, r in enumerate(points):
        owners = sorted({k for slot in r[5] for k in (slot, slot + 1)}) or \
            [bisect.bisect_left(values, r[3])]
        for j in owners:
            strips[j].append(i)

    triangles = []
    for j, poly in enumerate(strips):
        if len(poly) < 3:
            raise GeometryError(f"tile {tile.id}: degenerate strip {j}")
        for a, b in zip(poly[1:-1], poly[2:]):
            triangles.append((poly[0], a, b))
            triangles.append((n + poly[0], n + b, n + a))
    for i in range(n):
        j = (i + 1) % n
        triangles.append((n + i, n + j, j))
        triangles.append((n + i, j, i))
    return TriangleMesh(vertices, np.array(triangles, dtype=np.int64))


def ridge_volume(tile: SubstrateTile) -> float:
    """Ridge material above the slab, integrated in closed form.

    The footprint's area density along the groove-normal coordinate is a
    trapezoid (a box when the groove is axis-aligned) and the ridge profile
    is piecewise linear, so between breakpoints the integrand is quadratic
    and Simpson's rule is exact.
    """
    height, pitch = tile.groove.ridge_height_mm, tile.groove.pitch_mm
    if height == 0:
        return 0.0
    c, s = _unit_normal(tile)
    w, h_ = tile.width_mm, tile.height_mm
    span_u = sorted((0.0, w * c))
    span_v = sorted((0.0, h_ * s))
    if c == 0.0:
        lo, hi = span_v
        pts = [lo, hi]

        def density(x):
            return w / abs(s)
    elif s == 0.0:
        lo, hi = span_u
        pts = [lo, hi]

        def density(x):
            return h_ / abs(c)
    else:
        l1, l2 = span_u[1] - span_u[0], span_v[1] - span_v[0]
        lo, hi = span_u[0] + span_v[0], span_u[1] + span_v[1]
        m = min(l1, l2)
        scale = 1.0 / (abs(c) * abs(s))
        pts = [lo, lo + m, hi - m, hi]

        def density(x):
            return scale * max(0.0, min(x - lo, m, hi - x))

    half = 0.5 * pitch
    pts += [k * half for k in range(math.ceil(lo / half), math.floor(hi / half) + 1)]
    pts = sorted(p for p in set(pts) if lo <= p <= hi)
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        mid = 0.5 * (a + b)
        fa = _wave(a, pitch) * density(a)
        fm = _wave(mid, pitch) * density(mid)
        fb = _wave(b, pitch) * density(b)
        total += (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return height * total


def slab_volume(tile: SubstrateTile, base_thickness_mm: float = DEFAULT_BASE_THICKNESS_MM) -> float:
    return tile.width_mm * tile.height_mm * base_thickness_mm


def stl_bytes(mesh: TriangleMesh) -> bytes:
    records = np.zeros(len(mesh), dtype=_STL_RECORD)
    if len(mesh):
        records["normal"] = mesh.normals
        records["vertices"] = mesh.corners
    return STL_HEADER + struct.pack("<I", len(mesh)) + records.tobytes()


def write_stl(mesh: TriangleMesh, sink) -> int:
    """Write binary little-endian STL to a byte stream or path; returns bytes written."""
    data = stl_bytes(mesh)
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    return len(data)


def read_stl(data: bytes | io.BufferedIOBase):
    """Parse binary STL into (normals (n, 3), corners (n, 3, 3)) as float32."""
    if not isinstance(data, (bytes, bytearray)):
        data = data.read()
    if len(data) < 84:
        raise GeometryError("STL shorter than its header")
    (count,) = struct.unpack_from("<I", data, 80)
    if len(data) != 84 + 50 * count:
        raise GeometryError(f"STL length {len(data)} does not match {count} triangles")
    records = np.frombuffer(data, dtype=_STL_RECORD, count=count, offset=84)
    return records["normal"].copy(), records["vertices"].copy()

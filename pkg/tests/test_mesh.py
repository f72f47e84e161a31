import io
import math
import struct
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groovegait.errors import GeometryError
from groovegait.mesh import (STL_HEADER, TriangleMesh, is_watertight, read_stl, ridge_volume,
                             slab_volume, stl_bytes, substrate_mesh, write_stl)
from groovegait.substrate import GrooveSpec, SubstrateTile


def tile(angle=0.0, w=9.0, h=6.0, pitch=0.45, height=0.15):
    return SubstrateTile(3, 10.0, 10.0 + w, -2.0, -2.0 + h, GrooveSpec(angle, pitch, height))


def audit(mesh):
    """Independent check: every undirected edge appears exactly twice, once per direction."""
    directed = Counter()
    for a, b, c in mesh.triangles.tolist():
        directed.update([(a, b), (b, c), (c, a)])
    undirected = Counter()
    for (a, b), n in directed.items():
        undirected[frozenset((a, b))] += n
    return all(n == 2 for n in undirected.values()) and all(n == 1 for n in directed.values())


def areas(mesh):
    c = mesh.corners
    return 0.5 * np.linalg.norm(np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]), axis=1)


def parse_stl(data: bytes):
    """Hand-rolled reader, separate from the package's numpy one."""
    header, (count,) = data[:80], struct.unpack("<I", data[80:84])
    tris = []
    for i in range(count):
        rec = struct.unpack("<12fH", data[84 + 50 * i: 134 + 50 * i])
        tris.append((rec[:3], (rec[3:6], rec[6:9], rec[9:12]), rec[12]))
    return header, tris


def test_flat_slab_is_a_box():
    mesh = substrate_mesh(tile(height=0.0))
    assert len(mesh) == 12
    assert audit(mesh)
    assert mesh.signed_volume() == pytest.approx(9 * 6 * 2.0, rel=1e-12)


def test_axis_aligned_ridge_count():
    t = tile(0.0, w=9.0)
    mesh = substrate_mesh(t)
    apex = mesh.vertices[np.isclose(mesh.vertices[:, 2], 2.15)]
    assert len(np.unique(np.round(apex[:, 0], 9))) == round(9.0 / 0.45)
    assert audit(mesh)


@pytest.mark.parametrize("angle", [0.0, 5.0, 15.0, 30.0, -35.0, 45.0, 60.0, 89.9, 90.0, -90.0,
                                   0.001])
def test_rotated_grooves_watertight(angle):
    t = tile(angle)
    mesh = substrate_mesh(t)
    assert audit(mesh) and is_watertight(mesh)
    assert areas(mesh).min() > 1e-12
    expected = slab_volume(t) + ridge_volume(t)
    assert mesh.signed_volume() == pytest.approx(expected, rel=1e-9)


def test_outward_normals():
    mesh = substrate_mesh(tile(30.0))
    centre = mesh.vertices.mean(axis=0)
    n, c = mesh.normals, mesh.corners.mean(axis=1)
    bottom = np.isclose(c[:, 2], 0.0) & np.isclose(n[:, 2], -1.0)
    top = c[:, 2] > 2.0
    assert bottom.sum() > 0 and np.all(n[top, 2] > 0)
    # walls face away from the footprint centre
    wall = np.abs(n[:, 2]) < 1e-12
    assert np.all(np.einsum("ij,ij->i", n[wall, :2], c[wall, :2] - centre[:2]) > 0)


def test_axis_aligned_ridge_volume_hand_count():
    # 20 whole triangular prisms of cross-section 0.45 * 0.15 / 2 and length 6
    assert ridge_volume(tile(0.0)) == pytest.approx(20 * 0.5 * 0.45 * 0.15 * 6.0, rel=1e-12)


@given(st.floats(-90, 90), st.floats(1.0, 12.0), st.floats(1.0, 12.0), st.floats(0.2, 1.0),
       st.floats(0.0, 0.5))
@settings(max_examples=40)
def test_any_tile_watertight_with_closed_form_volume(angle, w, h, pitch, height):
    t = tile(angle, w, h, pitch, height)
    mesh = substrate_mesh(t)
    assert audit(mesh)
    assert mesh.signed_volume() == pytest.approx(slab_volume(t) + ridge_volume(t), rel=1e-6)


def test_pitch_larger_than_tile():
    with pytest.raises(GeometryError):
        substrate_mesh(tile(0.0, w=0.4, h=5.0))
    with pytest.raises(GeometryError):
        substrate_mesh(tile(), base_thickness_mm=0.0)


def test_stl_slab_bytes():
    mesh = substrate_mesh(tile(height=0.0))
    data = stl_bytes(mesh)
    assert len(data) == 684
    header, tris = parse_stl(data)
    assert header == STL_HEADER and header.startswith(b"groove-gait substrate")
    assert header == b"groove-gait substrate" + b" " * 59
    assert len(tris) == 12 and all(attr == 0 for _, _, attr in tris)


def test_stl_empty_mesh():
    buf = io.BytesIO()
    assert write_stl(TriangleMesh.empty(), buf) == 84
    assert buf.getvalue()[80:] == struct.pack("<I", 0)


def test_stl_roundtrip_single_precision(tmp_path):
    mesh = substrate_mesh(tile(30.0))
    path = tmp_path / "t.stl"
    n = write_stl(mesh, path)
    data = path.read_bytes()
    assert n == len(data) == 84 + 50 * len(mesh)
    _, tris = parse_stl(data)
    got = np.array([v for _, v, _ in tris], dtype=np.float32)
    assert np.array_equal(got, mesh.corners.astype(np.float32))
    normals, corners = read_stl(data)
    assert np.array_equal(corners, got)
    assert np.allclose(normals, mesh.normals, atol=1e-6)


def test_read_stl_rejects_bad_length():
    with pytest.raises(GeometryError):
        read_stl(b"x" * 90)
    with pytest.raises(GeometryError):
        read_stl(b"x" * 10)


def test_mesh_deterministic():
    a, b = stl_bytes(substrate_mesh(tile(17.0))), stl_bytes(substrate_mesh(tile(17.0)))
    assert a == b and not math.isnan(float(np.frombuffer(a[84:96], "<f4")[0]))

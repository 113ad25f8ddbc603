"""Polygonalization of the alpha field via marching cubes, plus binary STL I/O."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage import measure

from .volume import Volume

STL_HEADER_BYTES = 80
STL_TRIANGLE_BYTES = 50  # 12 float32 + uint16 attribute


@dataclass
class MeshModel:
    """Indexed triangle mesh in world mm with per-triangle unit normals."""

    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int vertex indices
    normals: np.ndarray  # (T, 3) float64, unit, pointing from solid to empty

    @classmethod
    def empty(cls) -> "MeshModel":
        return cls(
            vertices=np.zeros((0, 3)),
            triangles=np.zeros((0, 3), dtype=np.int64),
            normals=np.zeros((0, 3)),
        )

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)


def polygonize(volume: Volume, isovalue: float) -> MeshModel:
    """Extract the marching-cubes isosurface of a/255 at ``isovalue``.

    Edge crossings are positioned by linear interpolation; closed alpha fields
    yield watertight meshes whose normals point from solid to empty. A volume
    the isosurface never crosses yields an empty mesh.
    """
    if not 0.0 < isovalue < 1.0:
        raise ValueError(f"isovalue must be in (0, 1), got {isovalue}")
    a = volume.alpha.astype(np.float32) / 255.0
    if float(a.min()) >= isovalue or float(a.max()) <= isovalue:
        return MeshModel.empty()
    # verts come back in (k, j, i) index space. skimage's winding faces into
    # the solid there, but the (k,j,i)->(x,y,z) column swap is an odd
    # permutation, which flips orientation: cross products of the swapped
    # coordinates already point from solid to empty.
    verts, faces, _, _ = measure.marching_cubes(a, level=isovalue)
    world = verts[:, ::-1] * np.asarray(volume.spacing) + np.asarray(volume.origin)
    va = world[faces[:, 0]]
    vb = world[faces[:, 1]]
    vc = world[faces[:, 2]]
    cross = np.cross(vb - va, vc - va)
    lengths = np.linalg.norm(cross, axis=1)
    keep = lengths > 1e-12
    normals = cross[keep] / lengths[keep][:, None]
    return MeshModel(
        vertices=world,
        triangles=faces[keep].astype(np.int64),
        normals=normals,
    )


def export_stl(mesh: MeshModel, path: str | Path) -> int:
    """Write the mesh as little-endian binary STL; returns the triangle count.

    Layout: 80-byte header, uint32 count, then per triangle 12 float32
    (normal, three vertices) plus a zero uint16 attribute; the file is exactly
    84 + 50*count bytes.
    """
    path = Path(path)
    count = mesh.triangle_count
    header = b"voxelhaptics binary STL".ljust(STL_HEADER_BYTES, b"\0")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<I", count))
        for t in range(count):
            tri = mesh.triangles[t]
            record = np.empty(12, dtype="<f4")
            record[0:3] = mesh.normals[t]
            record[3:6] = mesh.vertices[tri[0]]
            record[6:9] = mesh.vertices[tri[1]]
            record[9:12] = mesh.vertices[tri[2]]
            fh.write(record.tobytes())
            fh.write(struct.pack("<H", 0))
    return count


def read_stl(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a binary STL back into (normals, triangle vertices (T, 3, 3)), both float32."""
    raw = Path(path).read_bytes()
    if len(raw) < STL_HEADER_BYTES + 4:
        raise ValueError(f"{path}: truncated STL header")
    (count,) = struct.unpack_from("<I", raw, STL_HEADER_BYTES)
    expected = STL_HEADER_BYTES + 4 + STL_TRIANGLE_BYTES * count
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {count} triangles, got {len(raw)}")
    normals = np.empty((count, 3), dtype=np.float32)
    tris = np.empty((count, 3, 3), dtype=np.float32)
    offset = STL_HEADER_BYTES + 4
    for t in range(count):
        values = np.frombuffer(raw, dtype="<f4", count=12, offset=offset)
        normals[t] = values[0:3]
        tris[t] = values[3:12].reshape(3, 3)
        offset += STL_TRIANGLE_BYTES
    return normals, tris

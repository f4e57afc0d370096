"""Triangulated disks and piecewise-linear Hamiltonians on them.

Areas are measured with the normalized form ``dx dy / pi`` so the unit disk
has total measure 1.

Text format for a mesh with vertex values (``read_field`` / ``write_field``)::

    # comment lines start with '#'
    vertices <N>
    <x> <y> <value>        (N lines)
    triangles <M>
    <i> <j> <k>            (M lines, 0-based vertex indices)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TriangulatedDisk:
    vertices: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (M, 3), counter-clockwise

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=float)
        tris = np.asarray(self.triangles, dtype=np.int64)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must have shape (N, 2)")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise MeshError("triangles must have shape (M, 3)")
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise MeshError("triangle index out of range")
        signed = _signed_areas(verts, tris)
        flip = signed < 0
        if flip.any():
            tris = tris.copy()
            tris[flip] = tris[flip][:, [0, 2, 1]]
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def areas(self) -> np.ndarray:
        return np.abs(_signed_areas(self.vertices, self.triangles))

    def measure(self) -> np.ndarray:
        """Normalized triangle areas (euclidean area / pi)."""
        return self.areas() / math.pi

    def edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def boundary_edges(self) -> np.ndarray:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        if (counts > 2).any():
            raise MeshError("non-manifold edge")
        return uniq[counts == 1]

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_edges().ravel()] = True
        return mask

    def outer_ring_mask(self) -> np.ndarray:
        """Interior vertices joined by an edge to the boundary."""
        boundary = self.boundary_mask()
        e = self.edges()
        ring = np.zeros_like(boundary)
        touch = boundary[e[:, 0]] ^ boundary[e[:, 1]]
        ring[e[touch].ravel()] = True
        return ring & ~boundary

    def check_disk(self) -> None:
        """Raise MeshError unless the mesh is a triangulated topological disk."""
        if (self.areas() <= 1e-15).any():
            raise MeshError("degenerate triangle")
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all():
            raise MeshError("mesh has isolated vertices")
        bnd = self.boundary_edges()
        euler = self.n_vertices - len(self.edges()) + len(self.triangles)
        if euler != 1:
            raise MeshError(f"Euler characteristic {euler}, a disk has 1")
        degree = np.bincount(bnd.ravel(), minlength=self.n_vertices)
        if len(bnd) == 0 or set(np.unique(degree[degree > 0])) != {2}:
            raise MeshError("boundary is not a simple cycle")


def _signed_areas(verts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a, b, c = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                  - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def disk_mesh(rings: int) -> TriangulatedDisk:
    """Concentric-ring triangulation of the unit disk.

    Ring ``k`` (radius ``k / rings``) carries ``6k`` equally spaced vertices;
    neighbouring rings are zipped together by angle, giving ``6 rings**2``
    triangles with edge length about ``1 / rings``.
    """
    if rings < 1:
        raise MeshError("need at least one ring")
    verts = [(0.0, 0.0)]
    starts = [0]
    for k in range(1, rings + 1):
        starts.append(len(verts))
        r = k / rings
        for j in range(6 * k):
            theta = 2 * math.pi * j / (6 * k)
            verts.append((r * math.cos(theta), r * math.sin(theta)))
    tris = [(0, starts[1] + j, starts[1] + (j + 1) % 6) for j in range(6)]
    for k in range(1, rings):
        inner_n, outer_n = 6 * k, 6 * (k + 1)
        inner = [starts[k] + i for i in range(inner_n)]
        outer = [starts[k + 1] + j for j in range(outer_n)]
        i = j = 0
        while i < inner_n or j < outer_n:
            # advance whichever ring has the smaller next angle
            if j < outer_n and (i == inner_n or (j + 1) * inner_n <= (i + 1) * outer_n):
                tris.append((inner[i % inner_n], outer[j], outer[(j + 1) % outer_n]))
                j += 1
            else:
                tris.append((inner[i], outer[j % outer_n], inner[(i + 1) % inner_n]))
                i += 1
    return TriangulatedDisk(np.array(verts), np.array(tris))


@dataclass(frozen=True, eq=False)
class ScalarField:
    mesh: TriangulatedDisk
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.mesh.n_vertices,):
            raise MeshError("one value per vertex required")
        if not np.isfinite(values).all():
            raise MeshError("non-finite field value")
        object.__setattr__(self, "values", values)

    def scaled(self, t: float) -> "ScalarField":
        return ScalarField(self.mesh, t * self.values)

    def check_support(self) -> None:
        """Compact support: zero on the boundary and on the ring next to it."""
        bad = (self.mesh.boundary_mask() | self.mesh.outer_ring_mask()) & (self.values != 0)
        if bad.any():
            raise MeshError(f"{int(bad.sum())} boundary or outer-ring vertices are nonzero")


def sample_field(mesh: TriangulatedDisk, func: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 clamp_outer_ring: bool = True) -> ScalarField:
    """Sample ``func(x, y)`` at the vertices; optionally force compact support."""
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    values = np.asarray(func(x, y), dtype=float).copy()
    if clamp_outer_ring:
        values[mesh.boundary_mask() | mesh.outer_ring_mask()] = 0.0
    return ScalarField(mesh, values)


def radial_field(mesh: TriangulatedDisk, profile: Callable[[float], float]) -> ScalarField:
    prof = np.vectorize(lambda r: float(profile(float(r))))
    return sample_field(mesh, lambda x, y: prof(np.hypot(x, y)))


def bump_field(mesh: TriangulatedDisk, bumps) -> ScalarField:
    """Sum of compact bumps ``height * (1 - d^2/radius^2)^2``; ``bumps`` holds
    (center_x, center_y, radius, height) tuples."""

    def func(x, y):
        out = np.zeros_like(x)
        for cx, cy, radius, height in bumps:
            d2 = ((x - cx) ** 2 + (y - cy) ** 2) / radius**2
            out += np.where(d2 < 1, height * (1 - d2) ** 2, 0.0)
        return out

    return sample_field(mesh, func)


def read_field(path: str | Path) -> ScalarField:
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    tokens = iter([ln for ln in lines if ln])
    try:
        head = next(tokens).split()
        if head[0] != "vertices":
            raise MeshError("expected 'vertices <N>'")
        rows = [next(tokens).split() for _ in range(int(head[1]))]
        head = next(tokens).split()
        if head[0] != "triangles":
            raise MeshError("expected 'triangles <M>'")
        tris = [next(tokens).split() for _ in range(int(head[1]))]
    except (StopIteration, IndexError) as exc:
        raise MeshError("truncated mesh file") from exc
    try:
        data = np.array(rows, dtype=float).reshape(-1, 3)
        tri_index = np.array(tris, dtype=np.int64).reshape(-1, 3)
    except ValueError as exc:
        raise MeshError(f"malformed mesh file: {exc}") from exc
    mesh = TriangulatedDisk(data[:, :2], tri_index)
    return ScalarField(mesh, data[:, 2])


def write_field(field: ScalarField, path: str | Path) -> None:
    out = ["# hoferbounds mesh", f"vertices {field.mesh.n_vertices}"]
    for (x, y), v in zip(field.mesh.vertices.tolist(), field.values.tolist()):
        out.append(f"{x!r} {y!r} {v!r}")
    out.append(f"triangles {len(field.mesh.triangles)}")
    out.extend(" ".join(map(str, t)) for t in field.mesh.triangles.tolist())
    Path(path).write_text("\n".join(out) + "\n")

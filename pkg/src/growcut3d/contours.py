"""Per-slice closed contours and their voxelization into binary masks.

A contour lives on one slice plane and is filled with the even-odd rule;
points exactly on a polygon edge count as inside. A voxel is set when its
integer center lies inside any polygon of any contour on its slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Axis, BinaryMask, InputError, extract_slice, plane_dims, _check_dims

Vertex = tuple[float, float]


@dataclass(frozen=True)
class ContourSlice:
    """Closed polygons on one slice; vertices are in-plane (u, v) voxel coordinates."""

    axis: Axis
    index: int
    polygons: tuple[tuple[Vertex, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "index", int(self.index))
        polys = []
        for poly in self.polygons:
            verts = tuple((float(u), float(v)) for u, v in poly)
            if len(verts) < 3:
                raise InputError(f"polygon needs >= 3 vertices, got {len(verts)}")
            if any(not (math.isfinite(u) and math.isfinite(v)) for u, v in verts):
                raise InputError("polygon vertices must be finite")
            polys.append(verts)
        object.__setattr__(self, "polygons", tuple(polys))


@dataclass(frozen=True)
class ContourSet:
    slices: tuple[ContourSlice, ...]

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(self.slices))

    def __len__(self) -> int:
        return len(self.slices)


def _fill_polygon(filled: np.ndarray, poly: tuple[Vertex, ...]) -> None:
    """OR the even-odd interior of one polygon (boundary inclusive) into `filled`."""
    height, width = filled.shape
    us = np.array([p[0] for p in poly])
    vs = np.array([p[1] for p in poly])
    u0 = max(0, math.ceil(us.min()))
    u1 = min(width - 1, math.floor(us.max()))
    v0 = max(0, math.ceil(vs.min()))
    v1 = min(height - 1, math.floor(vs.max()))
    if u0 > u1 or v0 > v1:
        return
    U, V = np.meshgrid(np.arange(u0, u1 + 1, dtype=float),
                       np.arange(v0, v1 + 1, dtype=float))
    crossings = np.zeros(U.shape, dtype=np.int64)
    on_edge = np.zeros(U.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        if ax == bx and ay == by:
            on_edge |= (U == ax) & (V == ay)
            continue
        # exact point-on-segment test (cross product zero, within bbox)
        cross = (bx - ax) * (V - ay) - (by - ay) * (U - ax)
        within = ((U >= min(ax, bx)) & (U <= max(ax, bx))
                  & (V >= min(ay, by)) & (V <= max(ay, by)))
        on_edge |= (cross == 0) & within
        # half-open ray cast: edge crosses the horizontal ray to the right of (U, V)
        if ay != by:
            straddles = (ay > V) != (by > V)
            xi = (bx - ax) * (V - ay) / (by - ay) + ax
            crossings += (straddles & (U < xi)).astype(np.int64)
    inside = (crossings % 2 == 1) | on_edge
    filled[v0:v1 + 1, u0:u1 + 1] |= inside


def voxelize_contours(contour_set: ContourSet, dims) -> BinaryMask:
    """Fill all contours into a mask of the given dims; untouched slices stay background."""
    nx, ny, nz = _check_dims(dims)
    bits = np.zeros((nz, ny, nx), dtype=bool)
    for cs in contour_set.slices:
        width, height = plane_dims(cs.axis, (nx, ny, nz))
        plane = np.zeros((height, width), dtype=bool)
        for poly in cs.polygons:
            _fill_polygon(plane, poly)
        # extract_slice validates the index and yields a writable view of `bits`
        view = extract_slice(bits, cs.axis, cs.index)
        view |= plane
    return BinaryMask(bits)

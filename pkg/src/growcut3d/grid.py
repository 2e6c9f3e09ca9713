"""Volumetric data model: intensity grids, binary masks, seeds, ROIs, neighborhoods.

Index conventions used across the package:

* A voxel index is an ``(x, y, z)`` triple; ``dims`` is ``(nx, ny, nz)``.
* Arrays are stored C-contiguous with shape ``(nz, ny, nx)``, i.e. ``arr[z, y, x]``,
  which makes x the fastest-varying axis in memory (flat index ``x + nx*y + nx*ny*z``).
* Slice planes: ``axial`` fixes z (rows y, cols x), ``coronal`` fixes y (rows z,
  cols x), ``sagittal`` fixes x (rows z, cols y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np


class InputError(ValueError):
    """Invalid input data or parameters (CLI exit code 2, HTTP 400/409)."""


class Label(IntEnum):
    UNLABELED = 0
    BG = 1
    FG = 2


class Axis(str, Enum):
    AXIAL = "axial"        # fixes z
    SAGITTAL = "sagittal"  # fixes x
    CORONAL = "coronal"    # fixes y


CONNECTIVITIES = (6, 18, 26)


def _make_offsets(connectivity: int) -> tuple[tuple[int, int, int], ...]:
    out = []
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                order = abs(dx) + abs(dy) + abs(dz)
                if order == 0:
                    continue
                if connectivity == 6 and order > 1:
                    continue
                if connectivity == 18 and order > 2:
                    continue
                out.append((dz, dy, dx))
    return tuple(out)


# Neighbor offsets in fixed lexicographic (dz, dy, dx) order; every sweep and
# tie-break in the package visits neighbors in exactly this order.
OFFSETS = {c: _make_offsets(c) for c in CONNECTIVITIES}


def check_connectivity(connectivity: int) -> int:
    if connectivity not in CONNECTIVITIES:
        raise InputError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity!r}")
    return connectivity


def _check_dims(dims) -> tuple[int, int, int]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d <= 0 for d in dims):
        raise InputError(f"dims must be three positive voxel counts, got {dims!r}")
    return dims


def in_bounds(index, dims) -> bool:
    x, y, z = index
    nx, ny, nz = dims
    return 0 <= x < nx and 0 <= y < ny and 0 <= z < nz


def flat_index(index, dims) -> int:
    """Linear voxel index in canonical x-fastest order."""
    x, y, z = index
    nx, ny, _ = dims
    return x + nx * (y + ny * z)


@dataclass(frozen=True)
class VolumeGrid:
    """3D scalar intensity image with voxel spacing in millimeters.

    ``data`` has shape ``(nz, ny, nx)`` and is frozen read-only after
    construction, so instances are safe to share across threads.
    """

    data: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise InputError(f"volume data must be 3D, got shape {data.shape}")
        if data.size == 0:
            raise InputError("volume has zero voxels")
        if not np.issubdtype(data.dtype, np.number):
            raise InputError(f"volume dtype must be numeric, got {data.dtype}")
        if np.issubdtype(data.dtype, np.floating):
            if not np.all(np.isfinite(data)):
                raise InputError("volume intensities must be finite")
        if data.min() < 0:
            raise InputError("volume intensities must be non-negative")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or any(not (s > 0) or not math.isfinite(s) for s in spacing):
            raise InputError(f"spacing components must be strictly positive, got {self.spacing!r}")
        data = np.ascontiguousarray(data)
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", spacing)

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.data.shape
        return (nx, ny, nz)

    @property
    def intensity_range(self) -> float:
        """max - min intensity; 0 for constant images."""
        return float(self.data.max() - self.data.min())

    def value_at(self, index) -> float:
        x, y, z = index
        return float(self.data[z, y, x])


@dataclass(frozen=True)
class BinaryMask:
    """Boolean foreground map over a voxel grid; shape conventions as VolumeGrid."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 3:
            raise InputError(f"mask must be 3D, got shape {bits.shape}")
        if bits.dtype != np.bool_:
            if not np.isin(bits, (0, 1)).all():
                raise InputError("mask values must be 0/1")
            bits = bits.astype(bool)
        bits = np.ascontiguousarray(bits)
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.bits.shape
        return (nx, ny, nz)

    @property
    def voxel_count(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def empty(cls, dims) -> "BinaryMask":
        nx, ny, nz = _check_dims(dims)
        return cls(np.zeros((nz, ny, nx), dtype=bool))


@dataclass(frozen=True)
class SeedSet:
    """Sparse FG/BG voxel labels used to initialize the automaton.

    Entries are ``((x, y, z), Label)`` pairs; a voxel appears at most once.
    """

    entries: tuple[tuple[tuple[int, int, int], Label], ...]

    def __post_init__(self):
        normalized = []
        seen = set()
        for index, label in self.entries:
            index = tuple(int(v) for v in index)
            label = Label(label)
            if label not in (Label.FG, Label.BG):
                raise InputError(f"seed label must be FG or BG, got {label!r}")
            if index in seen:
                raise InputError(f"duplicate seed voxel {index}")
            seen.add(index)
            normalized.append((index, label))
        object.__setattr__(self, "entries", tuple(normalized))

    def __len__(self) -> int:
        return len(self.entries)

    def count(self, label: Label) -> int:
        return sum(1 for _, lab in self.entries if lab == label)

    def validate_within(self, dims) -> None:
        dims = _check_dims(dims)
        for index, _ in self.entries:
            if not in_bounds(index, dims):
                raise InputError(f"seed voxel {index} outside volume dims {dims}")

    def indices(self, label: Label | None = None) -> list[tuple[int, int, int]]:
        return [idx for idx, lab in self.entries if label is None or lab == label]

    @classmethod
    def from_indices(cls, fg, bg) -> "SeedSet":
        entries = [(tuple(i), Label.FG) for i in fg] + [(tuple(i), Label.BG) for i in bg]
        return cls(tuple(entries))


@dataclass(frozen=True)
class Roi:
    """Axis-aligned inclusive voxel box, ``lo <= hi`` componentwise."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if any(l > h for l, h in zip(lo, hi)) or any(l < 0 for l in lo):
            raise InputError(f"invalid ROI lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def validate_within(self, dims) -> None:
        dims = _check_dims(dims)
        if any(h >= d for h, d in zip(self.hi, dims)):
            raise InputError(f"ROI {self.lo}..{self.hi} exceeds volume dims {dims}")

    @property
    def extents(self) -> tuple[int, int, int]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def shape_zyx(self) -> tuple[int, int, int]:
        ex, ey, ez = self.extents
        return (ez, ey, ex)

    @property
    def slices_zyx(self) -> tuple[slice, slice, slice]:
        (lx, ly, lz), (hx, hy, hz) = self.lo, self.hi
        return (slice(lz, hz + 1), slice(ly, hy + 1), slice(lx, hx + 1))

    def contains(self, index) -> bool:
        return all(l <= v <= h for v, l, h in zip(index, self.lo, self.hi))

    @property
    def voxel_count(self) -> int:
        ex, ey, ez = self.extents
        return ex * ey * ez


def neighbors(index, connectivity: int, dims) -> list[tuple[int, int, int]]:
    """In-bounds neighbors of a voxel, in fixed lexicographic (dz, dy, dx) offset order."""
    dims = _check_dims(dims)
    check_connectivity(connectivity)
    if not in_bounds(index, dims):
        raise InputError(f"index {tuple(index)} outside dims {dims}")
    x, y, z = (int(v) for v in index)
    out = []
    for dz, dy, dx in OFFSETS[connectivity]:
        q = (x + dx, y + dy, z + dz)
        if in_bounds(q, dims):
            out.append(q)
    return out


def compute_roi(seeds: SeedSet, dims, margin_fraction: float = 0.05) -> Roi:
    """Bounding box of the seed voxels, expanded per axis by ceil(margin * extent).

    The expansion is clamped to the volume. The box is a conservative superset
    of the seed hull, so restricting computation to it never drops reachable
    cells.
    """
    dims = _check_dims(dims)
    if len(seeds) == 0:
        raise InputError("cannot compute ROI from an empty seed set")
    if margin_fraction < 0:
        raise InputError(f"margin_fraction must be >= 0, got {margin_fraction}")
    seeds.validate_within(dims)
    arr = np.array(seeds.indices(), dtype=np.int64)
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    extents = hi - lo + 1
    margins = np.array([math.ceil(margin_fraction * int(e)) for e in extents], dtype=np.int64)
    lo = np.maximum(lo - margins, 0)
    hi = np.minimum(hi + margins, np.array(dims) - 1)
    return Roi(tuple(int(v) for v in lo), tuple(int(v) for v in hi))


def crop(volume: VolumeGrid, roi: Roi) -> VolumeGrid:
    """Extract the ROI subgrid (spacing preserved)."""
    roi.validate_within(volume.dims)
    return VolumeGrid(volume.data[roi.slices_zyx].copy(), volume.spacing)


def uncrop(mask: BinaryMask, roi: Roi, dims) -> BinaryMask:
    """Embed an ROI-shaped mask into a full-size mask, background outside."""
    dims = _check_dims(dims)
    roi.validate_within(dims)
    if mask.bits.shape != roi.shape_zyx:
        raise InputError(f"mask shape {mask.bits.shape} does not match ROI shape {roi.shape_zyx}")
    nx, ny, nz = dims
    full = np.zeros((nz, ny, nx), dtype=bool)
    full[roi.slices_zyx] = mask.bits
    return BinaryMask(full)


def extract_slice(array_zyx: np.ndarray, axis: Axis, index: int) -> np.ndarray:
    """2D plane of a (nz, ny, nx) array; see module docstring for row/col axes."""
    axis = Axis(axis)
    nz, ny, nx = array_zyx.shape
    limit = {Axis.AXIAL: nz, Axis.CORONAL: ny, Axis.SAGITTAL: nx}[axis]
    if not 0 <= index < limit:
        raise InputError(f"slice index {index} out of range for {axis.value} axis (0..{limit - 1})")
    if axis == Axis.AXIAL:
        return array_zyx[index, :, :]
    if axis == Axis.CORONAL:
        return array_zyx[:, index, :]
    return array_zyx[:, :, index]


def plane_to_voxel(axis: Axis, index: int, u: int, v: int) -> tuple[int, int, int]:
    """Map in-plane (u=col, v=row) coordinates of a slice to an (x, y, z) voxel."""
    axis = Axis(axis)
    if axis == Axis.AXIAL:
        return (u, v, index)
    if axis == Axis.CORONAL:
        return (u, index, v)
    return (index, u, v)


def plane_dims(axis: Axis, dims) -> tuple[int, int]:
    """(width, height) of slice rasters for the given axis, i.e. (cols, rows)."""
    axis = Axis(axis)
    nx, ny, nz = dims
    if axis == Axis.AXIAL:
        return (nx, ny)
    if axis == Axis.CORONAL:
        return (nx, nz)
    return (ny, nz)

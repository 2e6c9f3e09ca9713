"""GrowCut cellular automaton: reference implementation and optimized engine.

Cells carry (label, strength); a seeded cell starts at strength 1. Each sweep
is synchronous (Jacobi): every examined cell reads the previous buffer, takes
the strongest strictly-greater attack ``g(|C_p - C_q|) * s_q`` from its
neighbors, and adopts that neighbor's label. Neighbors are visited in fixed
lexicographic (dz, dy, dx) offset order; among equal maximal attacks the first
one encountered wins, and an attack equal to the current strength never wins.

``run_reference`` sweeps the whole ROI every iteration. ``run`` must produce
bit-identical labels while applying four shortcuts: computation restricted to
the seed ROI box, sweeps parallelized over disjoint z-slab tiles of the output
buffer, attenuation values optionally precomputed per neighbor offset, and
skipping of saturated (strength 1) cells plus cells with no recently-changed
neighbor. Engine arithmetic is float32 throughout so the cached and on-the-fly
attenuation paths agree exactly.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import (
    OFFSETS,
    BinaryMask,
    InputError,
    Label,
    Roi,
    SeedSet,
    VolumeGrid,
    check_connectivity,
    compute_roi,
    uncrop,
)

logger = logging.getLogger(__name__)

_ONE = np.float32(1.0)


@dataclass(frozen=True)
class GrowCutConfig:
    connectivity: int = 26
    margin_fraction: float = 0.05
    max_iterations: int | None = None  # default: 2 * sum of ROI extents
    distance_cache: bool = True
    tile_size: int = 16384             # voxels per parallel work unit
    thread_count: int = 1
    cache_budget_bytes: int = 256 * 1024 * 1024

    def __post_init__(self):
        check_connectivity(self.connectivity)
        if self.margin_fraction < 0:
            raise InputError(f"margin_fraction must be >= 0, got {self.margin_fraction}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InputError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.tile_size < 1:
            raise InputError(f"tile_size must be >= 1, got {self.tile_size}")
        if self.thread_count < 1:
            raise InputError(f"thread_count must be >= 1, got {self.thread_count}")


@dataclass(frozen=True)
class SegmentationResult:
    """Final mask plus convergence metadata; `labels` are the raw ROI cell labels."""

    mask: BinaryMask
    labels: np.ndarray
    roi: Roi
    iterations: int
    converged: bool


def dist(c1: float, c2: float) -> float:
    """Absolute intensity difference."""
    if not (math.isfinite(c1) and math.isfinite(c2)):
        raise InputError("intensities must be finite")
    return abs(c1 - c2)


def g(d: float, d_max: float) -> float:
    """Attack attenuation 1 - d/d_max, monotone decreasing from 1 to 0 on [0, d_max].

    A zero d_max (constant image) makes every distance 0 and g identically 1.
    """
    if d < 0 or not math.isfinite(d):
        raise InputError(f"distance must be finite and >= 0, got {d}")
    if d > d_max:
        raise InputError(f"distance {d} exceeds normalization constant {d_max}")
    if d_max == 0:
        return 1.0
    return 1.0 - d / d_max


class AutomatonState:
    """Double-buffered (label, strength) cell field over the ROI.

    `labels` / `strengths` view the current buffer; `next_labels` /
    `next_strengths` the back buffer. `active` marks cells to examine in the
    next sweep; anything outside it is guaranteed not to change.
    """

    def __init__(self, roi: Roi, labels_pad, strengths_pad, active):
        self.roi = roi
        self.iteration = 0
        self.active = active
        self._cur_labels = labels_pad
        self._cur_strengths = strengths_pad
        self._next_labels = np.array(labels_pad, copy=True)
        self._next_strengths = np.array(strengths_pad, copy=True)

    @property
    def labels(self) -> np.ndarray:
        return self._cur_labels[1:-1, 1:-1, 1:-1]

    @property
    def strengths(self) -> np.ndarray:
        return self._cur_strengths[1:-1, 1:-1, 1:-1]

    @property
    def next_labels(self) -> np.ndarray:
        return self._next_labels[1:-1, 1:-1, 1:-1]

    @property
    def next_strengths(self) -> np.ndarray:
        return self._next_strengths[1:-1, 1:-1, 1:-1]

    def _swap(self) -> None:
        self._cur_labels, self._next_labels = self._next_labels, self._cur_labels
        self._cur_strengths, self._next_strengths = self._next_strengths, self._cur_strengths


class _Context:
    """Per-run immutable inputs: padded intensities, d_max, offsets, optional g cache."""

    def __init__(self, volume: VolumeGrid, roi: Roi, config: GrowCutConfig, use_cache: bool):
        roi.validate_within(volume.dims)
        cropped = volume.data[roi.slices_zyx].astype(np.float32)
        self.d_max = np.float32(cropped.max() - cropped.min())
        self.intens_pad = np.pad(cropped, 1, mode="edge")
        self.offsets = OFFSETS[config.connectivity]
        self.shape = cropped.shape
        self.g_cache = None
        if use_cache and config.distance_cache and self.d_max > 0:
            estimate = len(self.offsets) * cropped.size * 4
            if estimate <= config.cache_budget_bytes:
                z, y, x = self.shape
                self.g_cache = [
                    _g_window(self.intens_pad, self.d_max, off, 0, z, 0, y, 0, x)
                    for off in self.offsets
                ]
            else:
                logger.warning(
                    "distance cache declined: %d bytes exceeds budget of %d bytes",
                    estimate, config.cache_budget_bytes)

    def g_window(self, k: int, z0, z1, y0, y1, x0, x1):
        """Attenuation values for offset k over a sub-box; None means g == 1 everywhere."""
        if self.d_max == 0:
            return None
        if self.g_cache is not None:
            return self.g_cache[k][z0:z1, y0:y1, x0:x1]
        return _g_window(self.intens_pad, self.d_max, self.offsets[k], z0, z1, y0, y1, x0, x1)


def _g_window(intens_pad, d_max, offset, z0, z1, y0, y1, x0, x1):
    dz, dy, dx = offset
    c = intens_pad[1 + z0:1 + z1, 1 + y0:1 + y1, 1 + x0:1 + x1]
    cq = intens_pad[1 + z0 + dz:1 + z1 + dz, 1 + y0 + dy:1 + y1 + dy, 1 + x0 + dx:1 + x1 + dx]
    return _ONE - np.abs(c - cq) / d_max


def _neighbor_any(mask: np.ndarray, offsets) -> np.ndarray:
    """Cells having at least one True neighbor (the cell itself not counted)."""
    z, y, x = mask.shape
    pad = np.pad(mask, 1, constant_values=False)
    out = np.zeros_like(mask)
    for dz, dy, dx in offsets:
        out |= pad[1 + dz:1 + dz + z, 1 + dy:1 + dy + y, 1 + dx:1 + dx + x]
    return out


def _validate_seeds(volume: VolumeGrid, seeds: SeedSet) -> None:
    seeds.validate_within(volume.dims)
    for label in (Label.FG, Label.BG):
        if seeds.count(label) == 0:
            raise InputError(f"missing {label.name} seeds: at least one required")


def _seed_layout(roi: Roi, seeds: SeedSet):
    """ROI-shaped label/strength/seed-mask arrays with seeds stamped in."""
    z, y, x = roi.shape_zyx
    labels = np.zeros((z, y, x), dtype=np.uint8)
    strengths = np.zeros((z, y, x), dtype=np.float32)
    seed_mask = np.zeros((z, y, x), dtype=bool)
    lx, ly, lz = roi.lo
    for (sx, sy, sz), label in seeds.entries:
        rz, ry, rx = sz - lz, sy - ly, sx - lx
        labels[rz, ry, rx] = int(label)
        strengths[rz, ry, rx] = 1.0
        seed_mask[rz, ry, rx] = True
    return labels, strengths, seed_mask


def initialize(volume: VolumeGrid, seeds: SeedSet, config: GrowCutConfig = GrowCutConfig()) -> AutomatonState:
    """Seeded automaton over the seed ROI; active set = non-seed cells next to a seed."""
    _validate_seeds(volume, seeds)
    roi = compute_roi(seeds, volume.dims, config.margin_fraction)
    labels, strengths, seed_mask = _seed_layout(roi, seeds)
    labels_pad = np.pad(labels, 1, constant_values=int(Label.UNLABELED))
    strengths_pad = np.pad(strengths, 1, constant_values=0.0)
    active = _neighbor_any(seed_mask, OFFSETS[config.connectivity]) & ~seed_mask
    return AutomatonState(roi, labels_pad, strengths_pad, active)


def _tiles(z_extent: int, plane_voxels: int, tile_size: int):
    per_tile = max(1, tile_size // max(1, plane_voxels))
    return [(z0, min(z0 + per_tile, z_extent)) for z0 in range(0, z_extent, per_tile)]


def _sweep_slab(state: AutomatonState, ctx: _Context, examine, changed, z_lo, z_hi) -> None:
    """Compute next-buffer values for examined cells in one z-slab (disjoint output rows)."""
    sub = examine[z_lo:z_hi]
    zs = np.flatnonzero(np.any(sub, axis=(1, 2)))
    if zs.size == 0:
        return
    ys = np.flatnonzero(np.any(sub, axis=(0, 2)))
    xs = np.flatnonzero(np.any(sub, axis=(0, 1)))
    z0, z1 = z_lo + zs[0], z_lo + zs[-1] + 1
    y0, y1 = ys[0], ys[-1] + 1
    x0, x1 = xs[0], xs[-1] + 1

    box = (slice(z0, z1), slice(y0, y1), slice(x0, x1))
    box_pad = (slice(1 + z0, 1 + z1), slice(1 + y0, 1 + y1), slice(1 + x0, 1 + x1))
    cur_s = state._cur_strengths[box_pad]
    cur_l = state._cur_labels[box_pad]
    best = cur_s.copy()
    winner = cur_l.copy()
    for k, (dz, dy, dx) in enumerate(ctx.offsets):
        nbr = (slice(1 + z0 + dz, 1 + z1 + dz),
               slice(1 + y0 + dy, 1 + y1 + dy),
               slice(1 + x0 + dx, 1 + x1 + dx))
        sq = state._cur_strengths[nbr]
        gv = ctx.g_window(k, z0, z1, y0, y1, x0, x1)
        attack = sq if gv is None else gv * sq
        upd = attack > best
        best[upd] = attack[upd]
        winner[upd] = state._cur_labels[nbr][upd]

    ex = examine[box]
    delta = ex & ((best != cur_s) | (winner != cur_l))
    state._next_strengths[box_pad][ex] = best[ex]
    state._next_labels[box_pad][ex] = winner[ex]
    changed[box] = delta


def _sweep(state: AutomatonState, ctx: _Context, config: GrowCutConfig, pool) -> int:
    """One synchronous sweep over the active set; swaps buffers, rebuilds the active set."""
    z, y, x = state.roi.shape_zyx
    examine = state.active & (state.strengths < _ONE)
    changed = np.zeros((z, y, x), dtype=bool)
    if examine.any():
        state._next_strengths[...] = state._cur_strengths
        state._next_labels[...] = state._cur_labels
        tiles = [t for t in _tiles(z, y * x, config.tile_size) if examine[t[0]:t[1]].any()]
        if pool is not None and len(tiles) > 1:
            list(pool.map(lambda t: _sweep_slab(state, ctx, examine, changed, *t), tiles))
        else:
            for t in tiles:
                _sweep_slab(state, ctx, examine, changed, *t)
        state._swap()
    state.iteration += 1
    count = int(changed.sum())
    if count:
        state.active = _neighbor_any(changed, ctx.offsets)
    else:
        state.active = np.zeros((z, y, x), dtype=bool)
    return count


def step(state: AutomatonState, volume: VolumeGrid, config: GrowCutConfig = GrowCutConfig()):
    """One public sweep; returns (state, changed_count). State is updated in place."""
    ctx = _Context(volume, state.roi, config, use_cache=False)
    changed = _sweep(state, ctx, config, pool=None)
    return state, changed


def _default_max_iterations(roi: Roi, config: GrowCutConfig) -> int:
    if config.max_iterations is not None:
        return config.max_iterations
    # label influence travels at most one voxel per sweep
    return 2 * sum(roi.extents)


def _finish(volume, roi, labels, iterations, converged) -> SegmentationResult:
    mask = uncrop(BinaryMask(labels == int(Label.FG)), roi, volume.dims)
    if not converged:
        logger.warning("GrowCut stopped after %d iterations without converging", iterations)
    return SegmentationResult(mask=mask, labels=labels.copy(), roi=roi,
                              iterations=iterations, converged=converged)


def run(volume: VolumeGrid, seeds: SeedSet, config: GrowCutConfig = GrowCutConfig()) -> SegmentationResult:
    """Optimized engine; label output is bit-identical to run_reference."""
    state = initialize(volume, seeds, config)
    ctx = _Context(volume, state.roi, config, use_cache=True)
    max_iterations = _default_max_iterations(state.roi, config)
    pool = ThreadPoolExecutor(max_workers=config.thread_count) if config.thread_count > 1 else None
    converged = False
    try:
        while state.iteration < max_iterations:
            if _sweep(state, ctx, config, pool) == 0:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=True)
    return _finish(volume, state.roi, state.labels, state.iteration, converged)


def run_reference(volume: VolumeGrid, seeds: SeedSet, config: GrowCutConfig = GrowCutConfig()) -> SegmentationResult:
    """Naive oracle: full-ROI synchronous sweeps, no cache, no tiles, no skipping."""
    _validate_seeds(volume, seeds)
    roi = compute_roi(seeds, volume.dims, config.margin_fraction)
    labels, strengths, _ = _seed_layout(roi, seeds)
    cropped = volume.data[roi.slices_zyx].astype(np.float32)
    d_max = np.float32(cropped.max() - cropped.min())
    intens_pad = np.pad(cropped, 1, mode="edge")
    offsets = OFFSETS[config.connectivity]
    max_iterations = _default_max_iterations(roi, config)

    z, y, x = labels.shape
    iterations = 0
    converged = False
    while iterations < max_iterations:
        labels_pad = np.pad(labels, 1, constant_values=int(Label.UNLABELED))
        strengths_pad = np.pad(strengths, 1, constant_values=0.0)
        best = strengths.copy()
        winner = labels.copy()
        for k, (dz, dy, dx) in enumerate(offsets):
            nbr = (slice(1 + dz, 1 + dz + z), slice(1 + dy, 1 + dy + y), slice(1 + dx, 1 + dx + x))
            sq = strengths_pad[nbr]
            if d_max == 0:
                attack = sq
            else:
                gv = _g_window(intens_pad, d_max, (dz, dy, dx), 0, z, 0, y, 0, x)
                attack = gv * sq
            upd = attack > best
            best[upd] = attack[upd]
            winner[upd] = labels_pad[nbr][upd]
        changed = int(((best != strengths) | (winner != labels)).sum())
        labels, strengths = winner, best
        iterations += 1
        if changed == 0:
            converged = True
            break
    return _finish(volume, roi, labels, iterations, converged)

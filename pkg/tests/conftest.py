"""Shared test oracles: deliberately naive reimplementations used to cross-check
the package. These stay scalar/bruteforce and independent of the code under test."""

from __future__ import annotations

from collections import deque

import numpy as np
import pytest

from growcut3d.grid import OFFSETS, Label


def scalar_growcut(data_zyx, seed_entries, connectivity, max_iterations=200):
    """Per-cell transcription of the evolution rule (float32 scalar arithmetic).

    Operates on the whole grid (callers arrange seeds so the engine ROI covers
    it). Returns (labels, strengths, iterations, converged).
    """
    data = np.asarray(data_zyx).astype(np.float32)
    nz, ny, nx = data.shape
    d_max = np.float32(data.max() - data.min())
    labels = np.zeros((nz, ny, nx), dtype=np.uint8)
    strengths = np.zeros((nz, ny, nx), dtype=np.float32)
    for (x, y, z), label in seed_entries:
        labels[z, y, x] = int(label)
        strengths[z, y, x] = np.float32(1.0)
    offsets = OFFSETS[connectivity]
    iterations = 0
    converged = False
    while iterations < max_iterations:
        new_labels = labels.copy()
        new_strengths = strengths.copy()
        changed = 0
        for z in range(nz):
            for y in range(ny):
                for x in range(nx):
                    best = strengths[z, y, x]
                    lab = labels[z, y, x]
                    for dz, dy, dx in offsets:
                        qz, qy, qx = z + dz, y + dy, x + dx
                        if not (0 <= qz < nz and 0 <= qy < ny and 0 <= qx < nx):
                            continue
                        d = np.abs(data[z, y, x] - data[qz, qy, qx])
                        gval = np.float32(1.0) if d_max == 0 else np.float32(1.0) - d / d_max
                        attack = gval * strengths[qz, qy, qx]
                        if attack > best:
                            best = attack
                            lab = labels[qz, qy, qx]
                    if best != strengths[z, y, x] or lab != labels[z, y, x]:
                        changed += 1
                    new_labels[z, y, x] = lab
                    new_strengths[z, y, x] = best
        labels, strengths = new_labels, new_strengths
        iterations += 1
        if changed == 0:
            converged = True
            break
    return labels, strengths, iterations, converged


def bfs_first_label(shape_zyx, seed_entries, connectivity):
    """Synchronous-propagation oracle for constant-intensity volumes.

    Every attack has g == 1, so a cell is conquered at its multi-source BFS
    distance and takes the label of the first previous-layer neighbor in
    offset order.
    """
    nz, ny, nx = shape_zyx
    dist = np.full((nz, ny, nx), -1, dtype=np.int64)
    labels = np.zeros((nz, ny, nx), dtype=np.uint8)
    frontier = []
    for (x, y, z), label in seed_entries:
        dist[z, y, x] = 0
        labels[z, y, x] = int(label)
        frontier.append((z, y, x))
    offsets = OFFSETS[connectivity]
    level = 0
    while frontier:
        level += 1
        frontier_set = set(frontier)
        next_frontier = []
        for z in range(nz):
            for y in range(ny):
                for x in range(nx):
                    if dist[z, y, x] >= 0:
                        continue
                    for dz, dy, dx in offsets:
                        q = (z + dz, y + dy, x + dx)
                        if q in frontier_set:
                            dist[z, y, x] = level
                            labels[z, y, x] = labels[q]
                            next_frontier.append((z, y, x))
                            break
        frontier = next_frontier
    return labels, dist


def flood_components(bits, connectivity):
    """Connected components by BFS; returns list of sorted voxel lists (z, y, x)."""
    bits = np.asarray(bits, dtype=bool)
    nz, ny, nx = bits.shape
    seen = np.zeros_like(bits)
    offsets = OFFSETS[connectivity]
    components = []
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                if not bits[z, y, x] or seen[z, y, x]:
                    continue
                comp = []
                queue = deque([(z, y, x)])
                seen[z, y, x] = True
                while queue:
                    cz, cy, cx = queue.popleft()
                    comp.append((cz, cy, cx))
                    for dz, dy, dx in offsets:
                        q = (cz + dz, cy + dy, cx + dx)
                        if (0 <= q[0] < nz and 0 <= q[1] < ny and 0 <= q[2] < nx
                                and bits[q] and not seen[q]):
                            seen[q] = True
                            queue.append(q)
                components.append(sorted(comp))
    return components


def brute_dilate(bits, connectivity):
    """Set-union dilation: voxel on iff it or an in-bounds neighbor was on."""
    bits = np.asarray(bits, dtype=bool)
    nz, ny, nx = bits.shape
    out = bits.copy()
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                if bits[z, y, x]:
                    continue
                for dz, dy, dx in OFFSETS[connectivity]:
                    q = (z + dz, y + dy, x + dx)
                    if 0 <= q[0] < nz and 0 <= q[1] < ny and 0 <= q[2] < nx and bits[q]:
                        out[z, y, x] = True
                        break
    return out


def brute_erode(bits, connectivity):
    """Intersection erosion with out-of-bounds treated as background."""
    bits = np.asarray(bits, dtype=bool)
    nz, ny, nx = bits.shape
    out = bits.copy()
    for z in range(nz):
        for y in range(ny):
            for x in range(nx):
                if not bits[z, y, x]:
                    continue
                for dz, dy, dx in OFFSETS[connectivity]:
                    q = (z + dz, y + dy, x + dx)
                    if not (0 <= q[0] < nz and 0 <= q[1] < ny and 0 <= q[2] < nx) or not bits[q]:
                        out[z, y, x] = False
                        break
    return out


def random_seed_set(rng, dims, n_fg=2, n_bg=2):
    """Distinct random seeds with at least one FG and one BG entry."""
    from growcut3d.grid import SeedSet
    nx, ny, nz = dims
    total = n_fg + n_bg
    flat = rng.choice(nx * ny * nz, size=total, replace=False)
    voxels = [(int(f % nx), int((f // nx) % ny), int(f // (nx * ny))) for f in flat]
    return SeedSet.from_indices(voxels[:n_fg], voxels[n_fg:])


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)

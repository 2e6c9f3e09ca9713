"""Binary post-editing of segmentation masks: dilation, erosion, island removal.

Erosion treats everything outside the volume as background, so foreground
touching the border always erodes away; dilation gains nothing from outside.
Radius means that many iterations of the unit structuring element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import BinaryMask, InputError, check_connectivity


@dataclass(frozen=True)
class StructuringElement:
    connectivity: int = 6
    radius: int = 1

    def __post_init__(self):
        check_connectivity(self.connectivity)
        if int(self.radius) < 1:
            raise InputError(f"radius must be >= 1, got {self.radius}")
        object.__setattr__(self, "radius", int(self.radius))


def _structure(connectivity: int) -> np.ndarray:
    rank = {6: 1, 18: 2, 26: 3}[connectivity]
    return ndimage.generate_binary_structure(3, rank)


def dilate(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Foreground iff the voxel or any neighbor was foreground, iterated radius times."""
    out = ndimage.binary_dilation(mask.bits, structure=_structure(se.connectivity),
                                  iterations=se.radius, border_value=0)
    return BinaryMask(out)


def erode(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Foreground iff the voxel and all in-bounds neighbors were foreground (border kills)."""
    out = ndimage.binary_erosion(mask.bits, structure=_structure(se.connectivity),
                                 iterations=se.radius, border_value=0)
    return BinaryMask(out)


def remove_islands(mask: BinaryMask, connectivity: int = 26) -> BinaryMask:
    """Keep only the largest connected foreground component.

    Size ties go to the component containing the smallest linear voxel index
    (x-fastest order), which makes the result deterministic.
    """
    check_connectivity(connectivity)
    labeled, ncomp = ndimage.label(mask.bits, structure=_structure(connectivity))
    if ncomp == 0:
        return mask
    flat = labeled.ravel()
    sizes = np.bincount(flat)
    sizes[0] = 0
    best = sizes.max()
    candidates = np.flatnonzero(sizes == best)
    if len(candidates) == 1:
        keep = candidates[0]
    else:
        keep = min(candidates, key=lambda c: int(np.argmax(flat == c)))
    return BinaryMask(labeled == keep)


def component_count(mask: BinaryMask, connectivity: int = 26) -> int:
    check_connectivity(connectivity)
    _, ncomp = ndimage.label(mask.bits, structure=_structure(connectivity))
    return int(ncomp)

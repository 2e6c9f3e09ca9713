"""Synthetic test volumes with exact ground truth, plus automatic seed strokes.

Volumes are two mean intensities (foreground body, background) with optional
additive Gaussian noise from numpy's seeded PCG64 generator, so identical
specs reproduce bit-identical volumes. An optional distractor shape with its
own intensity stands in for an adjacent structure; it never overrides body
voxels and is not part of the ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import BinaryMask, InputError, SeedSet, VolumeGrid
from .morphology import StructuringElement, dilate, erode

SHAPES = ("box", "ellipsoid")
_DTYPE_CLAMP = {"uint8": 255.0, "uint16": 65535.0, "float32": None}


@dataclass(frozen=True)
class ShapeSpec:
    """Box or ellipsoid given by center and per-axis semi-extents, in voxels."""

    kind: str
    center: tuple[float, float, float]
    semi_extents: tuple[float, float, float]

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise InputError(f"shape kind must be one of {SHAPES}, got {self.kind!r}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "semi_extents", tuple(float(s) for s in self.semi_extents))
        if any(s <= 0 for s in self.semi_extents):
            raise InputError("semi_extents must be positive")

    def validate_within(self, dims) -> None:
        for c, s, d in zip(self.center, self.semi_extents, dims):
            if c - s < 0 or c + s > d - 1:
                raise InputError(
                    f"shape [{c - s}, {c + s}] exceeds axis range [0, {d - 1}]")

    def membership(self, dims) -> np.ndarray:
        """Voxel-center membership mask, shape (nz, ny, nx)."""
        nx, ny, nz = dims
        x = np.arange(nx)[None, None, :]
        y = np.arange(ny)[None, :, None]
        z = np.arange(nz)[:, None, None]
        (cx, cy, cz), (ax, ay, az) = self.center, self.semi_extents
        if self.kind == "box":
            return ((np.abs(x - cx) <= ax) & (np.abs(y - cy) <= ay)
                    & (np.abs(z - cz) <= az))
        return ((x - cx) / ax) ** 2 + ((y - cy) / ay) ** 2 + ((z - cz) / az) ** 2 <= 1.0


@dataclass(frozen=True)
class PhantomSpec:
    dims: tuple[int, int, int] = (64, 64, 64)
    spacing: tuple[float, float, float] = (0.63, 0.63, 0.63)
    body: ShapeSpec = ShapeSpec("box", (32.0, 32.0, 32.0), (12.0, 12.0, 12.0))
    fg_intensity: float = 150.0
    bg_intensity: float = 50.0
    noise_sigma: float = 0.0
    distractor: ShapeSpec | None = None
    distractor_intensity: float = 0.0
    rng_seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if self.fg_intensity == self.bg_intensity:
            raise InputError("fg_intensity and bg_intensity must differ")
        if min(self.fg_intensity, self.bg_intensity) < 0:
            raise InputError("intensities must be non-negative")
        if self.noise_sigma < 0:
            raise InputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.dtype not in _DTYPE_CLAMP:
            raise InputError(f"dtype must be one of {tuple(_DTYPE_CLAMP)}, got {self.dtype!r}")
        self.body.validate_within(self.dims)
        if self.distractor is not None:
            self.distractor.validate_within(self.dims)

    def to_dict(self) -> dict:
        doc = {
            "dims": list(self.dims),
            "spacing": list(self.spacing),
            "body": _shape_to_dict(self.body),
            "fg_intensity": self.fg_intensity,
            "bg_intensity": self.bg_intensity,
            "noise_sigma": self.noise_sigma,
            "rng_seed": self.rng_seed,
            "dtype": self.dtype,
        }
        if self.distractor is not None:
            doc["distractor"] = _shape_to_dict(self.distractor)
            doc["distractor_intensity"] = self.distractor_intensity
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PhantomSpec":
        try:
            kwargs = dict(
                dims=tuple(doc["dims"]),
                spacing=tuple(doc.get("spacing", (1.0, 1.0, 1.0))),
                body=_shape_from_dict(doc["body"]),
                fg_intensity=float(doc["fg_intensity"]),
                bg_intensity=float(doc["bg_intensity"]),
                noise_sigma=float(doc.get("noise_sigma", 0.0)),
                rng_seed=int(doc.get("rng_seed", 0)),
                dtype=doc.get("dtype", "float32"),
            )
            if "distractor" in doc:
                kwargs["distractor"] = _shape_from_dict(doc["distractor"])
                kwargs["distractor_intensity"] = float(doc.get("distractor_intensity", 0.0))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed phantom spec: {exc}") from exc
        return cls(**kwargs)


def _shape_to_dict(shape: ShapeSpec) -> dict:
    return {"kind": shape.kind, "center": list(shape.center),
            "semi_extents": list(shape.semi_extents)}


def _shape_from_dict(doc: dict) -> ShapeSpec:
    return ShapeSpec(doc["kind"], tuple(doc["center"]), tuple(doc["semi_extents"]))


def read_phantom_spec(path: str) -> PhantomSpec:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from exc
    return PhantomSpec.from_dict(doc)


def write_phantom_spec(path: str, spec: PhantomSpec) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(spec.to_dict(), f, indent=2)


def generate(spec: PhantomSpec):
    """Build (volume, ground_truth) for a spec; bit-identical for identical specs."""
    body = spec.body.membership(spec.dims)
    nx, ny, nz = spec.dims
    values = np.full((nz, ny, nx), spec.bg_intensity, dtype=np.float64)
    if spec.distractor is not None:
        values[spec.distractor.membership(spec.dims) & ~body] = spec.distractor_intensity
    values[body] = spec.fg_intensity
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.rng_seed)
        values += rng.normal(0.0, spec.noise_sigma, size=values.shape)
    ceiling = _DTYPE_CLAMP[spec.dtype]
    values = np.clip(values, 0.0, ceiling)
    if spec.dtype == "float32":
        data = values.astype(np.float32)
    else:
        data = np.rint(values).astype(spec.dtype)
    return VolumeGrid(data, spec.spacing), BinaryMask(body)


def auto_seeds(ground_truth: BinaryMask, inner_margin: int, outer_margin: int) -> SeedSet:
    """Seed strokes from the truth: an eroded interior block as foreground and
    a one-voxel shell just outside the dilated truth as background."""
    if inner_margin < 1:
        raise InputError("inner_margin must be >= 1 (seeds must not touch the true boundary)")
    if outer_margin < 0:
        raise InputError(f"outer_margin must be >= 0, got {outer_margin}")
    interior = erode(ground_truth, StructuringElement(6, inner_margin))
    if interior.voxel_count == 0:
        raise InputError(f"erosion by {inner_margin} left no interior foreground seeds")
    expanded = ground_truth if outer_margin == 0 else dilate(ground_truth, StructuringElement(6, outer_margin))
    shell = dilate(expanded, StructuringElement(6, 1)).bits & ~expanded.bits
    if not shell.any():
        raise InputError("no room for background seeds outside the dilated ground truth")
    fg = [(int(x), int(y), int(z)) for z, y, x in np.argwhere(interior.bits)]
    bg = [(int(x), int(y), int(z)) for z, y, x in np.argwhere(shell)]
    return SeedSet.from_indices(fg, bg)

"""File formats: NRRD (raw encoding), a minimal native header+raw format, and
JSON documents for seeds and contours.

Format is picked from the file suffix:

* ``.nrrd``  NRRD with attached header, raw little-endian encoding
* ``.nhdr``  NRRD detached header next to a ``.raw`` data file
* ``.hdr``   native text header (``key=value`` lines: dims, spacing, dtype,
  optional data_file) next to a ``.raw`` little-endian data file

Raw payloads are laid out x-fastest, matching the in-memory convention.
Masks use dtype uint8 with values {0, 1}.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .contours import ContourSet, ContourSlice
from .grid import Axis, BinaryMask, InputError, Label, SeedSet, VolumeGrid

SUPPORTED_DTYPES = ("uint8", "uint16", "float32")

_NRRD_TYPE_ALIASES = {
    "uint8": "uint8", "uint8_t": "uint8", "uchar": "uint8", "unsigned char": "uint8",
    "uint16": "uint16", "uint16_t": "uint16", "ushort": "uint16", "unsigned short": "uint16",
    "float": "float32", "float32": "float32",
}
_NRRD_TYPE_NAMES = {"uint8": "uint8", "uint16": "uint16", "float32": "float"}
_NP_DTYPES = {"uint8": "<u1", "uint16": "<u2", "float32": "<f4"}


def _canonical_dtype(dtype: np.dtype) -> str:
    if dtype == np.uint8 or dtype == np.bool_:
        return "uint8"
    if dtype == np.uint16:
        return "uint16"
    return "float32"


def _encode_raw(volume: VolumeGrid, dtype: str) -> bytes:
    if dtype not in SUPPORTED_DTYPES:
        raise InputError(f"dtype must be one of {SUPPORTED_DTYPES}, got {dtype!r}")
    return np.ascontiguousarray(volume.data).astype(_NP_DTYPES[dtype]).tobytes()


def _decode_raw(blob: bytes, dims, dtype: str) -> np.ndarray:
    nx, ny, nz = dims
    expected = nx * ny * nz * np.dtype(_NP_DTYPES[dtype]).itemsize
    if len(blob) < expected:
        raise InputError(f"raw payload truncated: expected {expected} bytes, got {len(blob)}")
    arr = np.frombuffer(blob[:expected], dtype=_NP_DTYPES[dtype])
    return arr.reshape((nz, ny, nx)).copy()


# ---------------------------------------------------------------- NRRD

def _write_nrrd_header(dims, spacing, dtype: str, data_file: str | None) -> bytes:
    nx, ny, nz = dims
    sx, sy, sz = spacing
    lines = [
        "NRRD0004",
        f"type: {_NRRD_TYPE_NAMES[dtype]}",
        "dimension: 3",
        f"sizes: {nx} {ny} {nz}",
        f"spacings: {sx} {sy} {sz}",
        "encoding: raw",
        "endian: little",
    ]
    if data_file is not None:
        lines.append(f"data file: {data_file}")
    return ("\n".join(lines) + "\n\n").encode("ascii")


def _parse_nrrd(blob: bytes, directory: str | None):
    newline = blob.find(b"\n")
    if newline < 0 or not blob[:newline].strip().startswith(b"NRRD"):
        raise InputError("not an NRRD file (bad magic)")
    fields: dict[str, str] = {}
    pos = newline + 1
    while True:
        end = blob.find(b"\n", pos)
        if end < 0:
            raise InputError("truncated NRRD header")
        line = blob[pos:end].rstrip(b"\r")
        pos = end + 1
        if line == b"":
            break  # header/data separator
        if line.startswith(b"#") or b":=" in line:
            continue
        if b":" not in line:
            raise InputError(f"malformed NRRD header line: {line!r}")
        key, value = line.split(b":", 1)
        fields[key.decode("ascii").strip().lower()] = value.decode("ascii").strip()

    for required in ("type", "dimension", "sizes", "encoding"):
        if required not in fields:
            raise InputError(f"NRRD header missing required field {required!r}")
    if int(fields["dimension"]) != 3:
        raise InputError(f"only 3D NRRD supported, got dimension {fields['dimension']}")
    if fields["encoding"] != "raw":
        raise InputError(f"only raw NRRD encoding supported, got {fields['encoding']!r}")
    dtype = _NRRD_TYPE_ALIASES.get(fields["type"].lower())
    if dtype is None:
        raise InputError(f"unsupported NRRD type {fields['type']!r}")
    if np.dtype(_NP_DTYPES[dtype]).itemsize > 1 and fields.get("endian", "little") != "little":
        raise InputError("only little-endian NRRD supported")
    dims = tuple(int(v) for v in fields["sizes"].split())
    if len(dims) != 3:
        raise InputError(f"expected 3 sizes, got {fields['sizes']!r}")

    spacing = (1.0, 1.0, 1.0)
    if "spacings" in fields:
        spacing = tuple(float(v) for v in fields["spacings"].split())
    elif "space directions" in fields:
        vectors = [v for v in fields["space directions"].split(") (")]
        diag = []
        for i, vec in enumerate(vectors):
            comps = [float(c) for c in vec.strip("() ").split(",")]
            diag.append(abs(comps[i]))
        spacing = tuple(diag)

    if "data file" in fields or "datafile" in fields:
        name = fields.get("data file", fields.get("datafile"))
        if directory is None:
            raise InputError("detached NRRD header not supported for in-memory payloads")
        with open(os.path.join(directory, name), "rb") as f:
            payload = f.read()
    else:
        payload = blob[pos:]
    return _decode_raw(payload, dims, dtype), spacing


# ---------------------------------------------------------------- native

def _raw_path_for(header_path: str, data_file: str | None) -> str:
    if data_file:
        return os.path.join(os.path.dirname(header_path), data_file)
    return os.path.splitext(header_path)[0] + ".raw"


def _write_native(path: str, volume: VolumeGrid, dtype: str) -> None:
    raw_path = _raw_path_for(path, None)
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    header = (
        f"dims={nx},{ny},{nz}\n"
        f"spacing={sx},{sy},{sz}\n"
        f"dtype={dtype}\n"
        f"data_file={os.path.basename(raw_path)}\n"
    )
    with open(path, "w", encoding="ascii") as f:
        f.write(header)
    with open(raw_path, "wb") as f:
        f.write(_encode_raw(volume, dtype))


def _read_native(path: str):
    fields = {}
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"malformed native header line: {line!r}")
            key, value = line.split("=", 1)
            fields[key.strip()] = value.strip()
    for required in ("dims", "spacing", "dtype"):
        if required not in fields:
            raise InputError(f"native header missing {required!r}")
    dims = tuple(int(v) for v in fields["dims"].split(","))
    spacing = tuple(float(v) for v in fields["spacing"].split(","))
    dtype = fields["dtype"]
    if dtype not in SUPPORTED_DTYPES:
        raise InputError(f"dtype must be one of {SUPPORTED_DTYPES}, got {dtype!r}")
    with open(_raw_path_for(path, fields.get("data_file")), "rb") as f:
        payload = f.read()
    return _decode_raw(payload, dims, dtype), spacing


# ---------------------------------------------------------------- public API

def write_volume(path: str, volume: VolumeGrid, dtype: str | None = None) -> None:
    dtype = dtype or _canonical_dtype(volume.data.dtype)
    if dtype not in SUPPORTED_DTYPES:
        raise InputError(f"dtype must be one of {SUPPORTED_DTYPES}, got {dtype!r}")
    if path.endswith(".nrrd"):
        with open(path, "wb") as f:
            f.write(_write_nrrd_header(volume.dims, volume.spacing, dtype, None))
            f.write(_encode_raw(volume, dtype))
    elif path.endswith(".nhdr"):
        raw_path = _raw_path_for(path, None)
        with open(path, "wb") as f:
            f.write(_write_nrrd_header(volume.dims, volume.spacing, dtype,
                                       os.path.basename(raw_path)))
        with open(raw_path, "wb") as f:
            f.write(_encode_raw(volume, dtype))
    elif path.endswith(".hdr"):
        _write_native(path, volume, dtype)
    else:
        raise InputError(f"unknown volume format for {path!r} (use .nrrd, .nhdr or .hdr)")


def read_volume(path: str) -> VolumeGrid:
    if path.endswith((".nrrd", ".nhdr")):
        with open(path, "rb") as f:
            blob = f.read()
        data, spacing = _parse_nrrd(blob, os.path.dirname(os.path.abspath(path)))
    elif path.endswith(".hdr"):
        data, spacing = _read_native(path)
    else:
        raise InputError(f"unknown volume format for {path!r} (use .nrrd, .nhdr or .hdr)")
    return VolumeGrid(data, spacing)


def volume_from_bytes(blob: bytes) -> VolumeGrid:
    """Parse an attached-header NRRD payload (used for HTTP uploads)."""
    data, spacing = _parse_nrrd(blob, None)
    return VolumeGrid(data, spacing)


def volume_to_bytes(volume: VolumeGrid, dtype: str | None = None) -> bytes:
    dtype = dtype or _canonical_dtype(volume.data.dtype)
    return _write_nrrd_header(volume.dims, volume.spacing, dtype, None) + _encode_raw(volume, dtype)


def write_mask(path: str, mask: BinaryMask, spacing=(1.0, 1.0, 1.0)) -> None:
    write_volume(path, VolumeGrid(mask.bits.astype(np.uint8), spacing), dtype="uint8")


def read_mask(path: str):
    """Read a {0,1}-valued uint8 volume; returns (BinaryMask, spacing)."""
    volume = read_volume(path)
    values = np.unique(volume.data)
    if not np.isin(values, (0, 1)).all():
        raise InputError(f"mask file contains values other than 0/1: {values[:8]}")
    return BinaryMask(volume.data != 0), volume.spacing


def mask_from_bytes(blob: bytes):
    volume = volume_from_bytes(blob)
    if not np.isin(np.unique(volume.data), (0, 1)).all():
        raise InputError("mask payload contains values other than 0/1")
    return BinaryMask(volume.data != 0), volume.spacing


def mask_to_bytes(mask: BinaryMask, spacing=(1.0, 1.0, 1.0)) -> bytes:
    return volume_to_bytes(VolumeGrid(mask.bits.astype(np.uint8), spacing), dtype="uint8")


# ---------------------------------------------------------------- JSON documents

def seeds_to_dict(seeds: SeedSet) -> dict:
    return {"seeds": [{"index": list(idx), "label": label.name}
                      for idx, label in seeds.entries]}


def seeds_from_dict(doc: dict) -> SeedSet:
    try:
        entries = [(tuple(e["index"]), Label[e["label"]]) for e in doc["seeds"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed seeds document: {exc}") from exc
    return SeedSet(tuple(entries))


def write_seeds(path: str, seeds: SeedSet) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(seeds_to_dict(seeds), f)


def read_seeds(path: str) -> SeedSet:
    with open(path, "r", encoding="utf-8") as f:
        return seeds_from_dict(_load_json(f, path))


def contours_to_dict(contours: ContourSet) -> dict:
    return {"contours": [
        {"axis": cs.axis.value, "index": cs.index,
         "polygons": [[list(v) for v in poly] for poly in cs.polygons]}
        for cs in contours.slices]}


def contours_from_dict(doc: dict) -> ContourSet:
    try:
        slices = tuple(
            ContourSlice(axis=Axis(item["axis"]), index=item["index"],
                         polygons=tuple(tuple((u, v) for u, v in poly)
                                        for poly in item["polygons"]))
            for item in doc["contours"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed contours document: {exc}") from exc
    return ContourSet(slices)


def write_contours(path: str, contours: ContourSet) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(contours_to_dict(contours), f)


def read_contours(path: str) -> ContourSet:
    with open(path, "r", encoding="utf-8") as f:
        return contours_from_dict(_load_json(f, path))


def _load_json(f, path: str):
    try:
        return json.load(f)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc

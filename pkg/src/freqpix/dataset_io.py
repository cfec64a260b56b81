"""Manifests, image / raw tensor files, resizing and quantization.

Raw tensors use the FPTX container: ``b"FPTX"``, a version byte, three
little-endian uint32 dims (H, W, C), then H*W*C little-endian float32
values, row-major and channel-last.
"""

from __future__ import annotations

import json
import struct
import warnings
from pathlib import Path

import numpy as np
from PIL import Image

from freqpix import _kernels
from freqpix.errors import DimensionError, FormatError, ManifestError, ValidationError
from freqpix.sampler import SampleRecord

FPTX_MAGIC = b"FPTX"
FPTX_VERSION = 1
_FPTX_HEADER = struct.Struct("<4sBIII")

FORMATS = ("png", "fptx")
MANIFEST_KEYS = ("id", "path", "label", "domain")


def check_tensor(x) -> np.ndarray:
    """Validate an (H, W, C) tensor and return it as float64.

    2D input is promoted to a single channel.
    """
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3 or min(x.shape) < 1:
        raise DimensionError(f"expected a non-empty (H, W, C) tensor, got shape {x.shape}")
    if x.dtype != np.float64:
        x = x.astype(np.float64)
    if not np.all(np.isfinite(x)):
        raise ValidationError("tensor contains non-finite values")
    return x


def read_manifest(path, *, check_paths: bool = True) -> list[SampleRecord]:
    """Parse a JSONL manifest; relative paths resolve against its directory."""
    path = Path(path)
    base = path.parent
    records: list[SampleRecord] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(obj, dict):
                raise ManifestError("expected a JSON object", lineno)
            missing = [k for k in MANIFEST_KEYS if k not in obj]
            if missing:
                raise ManifestError(f"missing key(s): {', '.join(missing)}", lineno)
            rid = str(obj["id"])
            if rid in seen:
                raise ManifestError(
                    f"duplicate id {rid!r} (first seen on line {seen[rid]})", lineno
                )
            seen[rid] = lineno
            label, domain = str(obj["label"]), str(obj["domain"])
            if not label or not domain:
                raise ManifestError("label and domain must be non-empty", lineno)
            p = Path(obj["path"])
            if not p.is_absolute():
                p = base / p
            if check_paths and not p.is_file():
                raise ManifestError(f"unreadable path {str(p)!r}", lineno)
            records.append(SampleRecord(rid, p, label, domain))
    if not records:
        warnings.warn(f"manifest {str(path)!r} is empty", stacklevel=2)
    return records


def write_manifest(records, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            p = Path(r.path)
            try:
                p = p.relative_to(path.parent)
            except ValueError:
                pass
            row = {"id": r.id, "path": str(p), "label": r.label, "domain": r.domain}
            fh.write(json.dumps(row) + "\n")


def format_for(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in FORMATS:
        raise FormatError(f"unsupported file type {suffix!r} for {str(path)!r}")
    return suffix


def load_tensor(path) -> np.ndarray:
    fmt = format_for(path)
    if fmt == "png":
        return _load_png(path)
    return read_fptx(path)


def _load_png(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise FormatError(f"{str(path)!r} is not a PNG file")
            if im.mode not in ("L", "RGB"):
                raise FormatError(f"unsupported PNG mode {im.mode!r}; need 8-bit L or RGB")
            arr = np.asarray(im)
    except (OSError, SyntaxError) as exc:
        raise FormatError(f"cannot decode {str(path)!r}: {exc}") from None
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr.astype(np.float64) / 255.0


def read_fptx(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _FPTX_HEADER.size:
        raise FormatError(f"{str(path)!r}: truncated FPTX header")
    magic, version, h, w, c = _FPTX_HEADER.unpack_from(data)
    if magic != FPTX_MAGIC:
        raise FormatError(f"{str(path)!r}: bad magic {magic!r}")
    if version != FPTX_VERSION:
        raise FormatError(f"{str(path)!r}: unsupported FPTX version {version}")
    if min(h, w, c) < 1:
        raise FormatError(f"{str(path)!r}: zero dimension in header {h}x{w}x{c}")
    expected = h * w * c * 4
    payload = data[_FPTX_HEADER.size:]
    if len(payload) != expected:
        kind = "truncated" if len(payload) < expected else "oversized"
        raise FormatError(
            f"{str(path)!r}: {kind} payload, header declares {h}x{w}x{c} "
            f"({h * w * c} floats) but file holds {len(payload) / 4:g}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(h, w, c)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{str(path)!r}: non-finite values in payload")
    return arr.astype(np.float64)


def write_fptx(tensor, path) -> None:
    x = check_tensor(tensor)
    h, w, c = x.shape
    header = _FPTX_HEADER.pack(FPTX_MAGIC, FPTX_VERSION, h, w, c)
    Path(path).write_bytes(header + x.astype("<f4").tobytes())


def quantize(tensor) -> np.ndarray:
    """[0, 1] floats to uint8 with round-half-up."""
    x = np.clip(np.asarray(tensor, dtype=np.float64), 0.0, 1.0)
    return np.floor(x * 255.0 + 0.5).astype(np.uint8)


def save_tensor(tensor, path, format: str | None = None) -> None:
    fmt = format or format_for(path)
    x = check_tensor(tensor)
    if fmt == "fptx":
        write_fptx(x, path)
        return
    if fmt != "png":
        raise FormatError(f"unsupported output format {fmt!r}")
    if x.min() < 0.0 or x.max() > 1.0:
        raise ValidationError("PNG output needs values in [0, 1]")
    if x.shape[2] not in (1, 3):
        raise FormatError(f"PNG holds 1 or 3 channels, tensor has {x.shape[2]}")
    q = quantize(x)
    im = Image.fromarray(q[:, :, 0] if q.shape[2] == 1 else q)
    im.save(path, format="PNG", compress_level=1)


def resize_bilinear(tensor, new_h: int, new_w: int) -> np.ndarray:
    """Bilinear resampling with half-pixel centers and clamped edges."""
    if int(new_h) < 1 or int(new_w) < 1:
        raise DimensionError(f"target size must be positive, got {new_h}x{new_w}")
    x = check_tensor(tensor)
    if x.shape[:2] == (new_h, new_w):
        return x
    return _kernels.resize(x, int(new_h), int(new_w))


def export_images(images, labels, domains, ids, directory, fmt: str = "png") -> Path:
    """Write one file per image plus ``manifest.jsonl`` into ``directory``."""
    if fmt not in FORMATS:
        raise FormatError(f"unsupported output format {fmt!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []
    for img, y, d, rid in zip(images, labels, domains, ids):
        p = directory / f"{rid}.{fmt}"
        save_tensor(img, p, fmt)
        records.append(SampleRecord(str(rid), p, str(y), str(d)))
    manifest = directory / "manifest.jsonl"
    write_manifest(records, manifest)
    return manifest

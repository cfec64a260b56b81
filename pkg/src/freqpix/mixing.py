"""Frequency-pixel mixing: amplitude interpolation inside a spectral crop,
pixel blending, and the two-stage fusion of both results.

Tensors are float arrays shaped (H, W, C) with values in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from freqpix import _kernels
from freqpix.dataset_io import check_tensor, resize_bilinear
from freqpix.errors import DimensionError, ResidueError, ValidationError
from freqpix.spectral import (
    Layout,
    decompose,
    dft2,
    dft2_channels,
    idft2,
    idft2_channels,
    recompose,
    shift,
    unshift,
)

CROP_MODES = ("random", "centered")
MIX_MODES = ("both", "freq", "pixel")
DEFAULT_RESID_CEILING = 0.15


@dataclass(frozen=True)
class MixParams:
    eta: float = 1.0
    crop_ratio: float = 0.5
    lambda1: float = 0.5
    lambda2: float = 0.5
    prob: float = 0.7

    def __post_init__(self):
        _check_range("eta", self.eta, 0.0, 1.0, open_low=True)
        _check_range("crop_ratio", self.crop_ratio, 0.0, 1.0, open_low=True)
        _check_range("lambda1", self.lambda1, 0.0, 1.0)
        _check_range("lambda2", self.lambda2, 0.0, 1.0)
        _check_range("prob", self.prob, 0.0, 1.0)


def _check_range(name, value, lo, hi, open_low=False):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name}: expected a number, got {value!r}") from None
    if not math.isfinite(v) or v > hi or v < lo or (open_low and v <= lo):
        lo_br = "(" if open_low else "["
        raise ValidationError(f"{name}={value!r} outside {lo_br}{lo}, {hi}]")


@dataclass(frozen=True)
class CropRegion:
    """Rectangle of bins in DC-centered layout."""

    top: int
    left: int
    side_h: int
    side_w: int

    def check(self, height: int, width: int) -> None:
        if self.side_h < 1 or self.side_w < 1:
            raise DimensionError(f"crop sides must be positive: {self}")
        if (
            self.top < 0
            or self.left < 0
            or self.top + self.side_h > height
            or self.left + self.side_w > width
        ):
            raise DimensionError(f"{self} does not fit a {height}x{width} spectrum")

    @property
    def slices(self) -> tuple[slice, slice]:
        return (
            slice(self.top, self.top + self.side_h),
            slice(self.left, self.left + self.side_w),
        )

    @classmethod
    def full(cls, height: int, width: int) -> "CropRegion":
        return cls(0, 0, height, width)


def crop_side(ratio: float, n: int) -> int:
    # round half up, at least one bin
    return min(n, max(1, int(math.floor(ratio * n + 0.5))))


def sample_crop(height: int, width: int, ratio: float, rng, mode: str = "random") -> CropRegion:
    side_h = crop_side(ratio, height)
    side_w = crop_side(ratio, width)
    if mode == "random":
        top = int(rng.integers(0, height - side_h + 1))
        left = int(rng.integers(0, width - side_w + 1))
    elif mode == "centered":
        top = height // 2 - side_h // 2
        left = width // 2 - side_w // 2
    else:
        raise ValidationError(f"unknown crop mode {mode!r}; expected one of {CROP_MODES}")
    return CropRegion(top, left, side_h, side_w)


@dataclass
class MixAudit:
    """Everything needed to replay one augmentation bit-identically."""

    applied: bool
    lam: float | None = None
    crop: CropRegion | None = None
    target_id: str | None = None
    seed: int | None = None
    index: int | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    mode: str = "both"
    crop_mode: str = "random"
    max_residue: float | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["crop"] = asdict(self.crop) if self.crop is not None else None
        extra = d.pop("extra")
        d.update(extra)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MixAudit":
        d = dict(d)
        crop = d.pop("crop", None)
        known = {f for f in cls.__dataclass_fields__ if f != "extra"}
        kwargs = {k: d.pop(k) for k in list(d) if k in known}
        return cls(crop=CropRegion(**crop) if crop else None, extra=d, **kwargs)


@dataclass
class FrequencyTrace:
    """Intermediate objects of the frequency branch, one slice per channel.

    ``amplitude`` and ``phase`` are in centered layout; ``spectrum`` is the
    recomposed natural-layout spectrum that gets inverse transformed.
    """

    amplitude: np.ndarray
    phase: np.ndarray
    source_amplitude: np.ndarray
    spectrum: np.ndarray
    residue: float


def match_shape(x2: np.ndarray, like: np.ndarray) -> np.ndarray:
    """Resample ``x2`` bilinearly to the spatial size of ``like``."""
    if x2.shape[2] != like.shape[2]:
        raise DimensionError(
            f"channel mismatch: {x2.shape[2]} vs {like.shape[2]}"
        )
    if x2.shape[:2] != like.shape[:2]:
        x2 = resize_bilinear(x2, like.shape[0], like.shape[1])
    return x2


def mix_amplitude(a1, a2, lam: float, region: CropRegion) -> np.ndarray:
    """Interpolate centered amplitude grids inside ``region``; ``a1`` elsewhere."""
    a1 = np.asarray(a1, dtype=np.float64)
    a2 = np.asarray(a2, dtype=np.float64)
    if a1.shape != a2.shape:
        raise DimensionError(f"amplitude grids differ: {a1.shape} vs {a2.shape}")
    _check_range("lambda", lam, 0.0, 1.0)
    region.check(*a1.shape[-2:])
    out = a1.copy()
    sl = (Ellipsis, *region.slices)
    out[sl] = (1.0 - lam) * a1[sl] + lam * a2[sl]
    return out


def _check_pair(x1, x2):
    x1 = check_tensor(x1)
    x2 = check_tensor(x2)
    if x1.shape != x2.shape:
        raise DimensionError(f"tensor shapes differ: {x1.shape} vs {x2.shape}")
    return x1, x2


def frequency_augment(
    x1,
    x2,
    lam: float,
    region: CropRegion,
    *,
    clamp: bool = True,
    resid_ceiling: float | None = DEFAULT_RESID_CEILING,
    return_trace: bool = False,
):
    """Amplitude of ``x1`` interpolated toward ``x2`` inside the crop, phase of ``x1`` kept.

    Reference implementation built channel by channel from the spectral
    primitives. The batch path (:func:`apply_mix`) uses a fused kernel that
    is checked against this one.
    """
    x1, x2 = _check_pair(x1, x2)
    _check_range("lambda", lam, 0.0, 1.0)
    H, W, C = x1.shape
    region.check(H, W)

    out = np.empty_like(x1)
    amps = np.empty((C, H, W))
    src_amps = np.empty((C, H, W))
    phases = np.empty((C, H, W))
    spectra = np.empty((C, H, W), dtype=np.complex128)
    residue = 0.0
    for c in range(C):
        a1, p1 = decompose(shift(dft2(x1[:, :, c])))
        a2, _ = decompose(shift(dft2(x2[:, :, c])))
        am = mix_amplitude(a1, a2, lam, region)
        mixed = unshift(recompose(am, p1, Layout.CENTERED))
        grid, resid = idft2(mixed, return_residue=True)
        out[:, :, c] = grid
        amps[c], src_amps[c], phases[c], spectra[c] = am, a1, p1, mixed.values
        residue = max(residue, resid)

    _check_residue(residue, resid_ceiling)
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    if return_trace:
        return out, FrequencyTrace(amps, phases, src_amps, spectra, residue)
    return out


def _check_residue(residue: float, ceiling: float | None) -> None:
    if ceiling is not None and residue > ceiling:
        raise ResidueError(
            f"imaginary residue {residue:.4g} exceeds ceiling {ceiling:.4g}"
        )


def pixel_blend(x1, x2, lambda1: float) -> np.ndarray:
    x1, x2 = _check_pair(x1, x2)
    _check_range("lambda1", lambda1, 0.0, 1.0)
    return (1.0 - lambda1) * x1 + lambda1 * x2


def fuse(xf, xp, lambda2: float) -> np.ndarray:
    xf, xp = _check_pair(xf, xp)
    _check_range("lambda2", lambda2, 0.0, 1.0)
    return (1.0 - lambda2) * xf + lambda2 * xp


def apply_mix(
    x1,
    x2,
    lam: float,
    region: CropRegion,
    lambda1: float,
    lambda2: float,
    *,
    mode: str = "both",
    resid_ceiling: float | None = DEFAULT_RESID_CEILING,
) -> tuple[np.ndarray, float]:
    """Deterministic core of the mix once all random choices are made.

    Returns the clamped output and the max imaginary residue of the
    frequency branch (0.0 when the branch is not evaluated).
    """
    if mode not in MIX_MODES:
        raise ValidationError(f"unknown mix mode {mode!r}; expected one of {MIX_MODES}")
    x1 = check_tensor(x1)
    x2 = match_shape(check_tensor(x2), x1)
    if mode == "pixel":
        return _kernels.blend_fuse(x1, x1, x2, float(lambda1), 1.0), 0.0

    region.check(*x1.shape[:2])
    f1 = dft2_channels(x1)
    f2 = dft2_channels(x2)
    mixed = _kernels.mix_spectrum(
        f1, f2, float(lam), region.top, region.left, region.side_h, region.side_w
    )
    xf, residue = idft2_channels(mixed)
    _check_residue(residue, resid_ceiling)
    if mode == "freq":
        lambda2 = 0.0
    return _kernels.blend_fuse(xf, x1, x2, float(lambda1), float(lambda2)), residue


def frequency_pixel_mix(
    x1,
    x2,
    params: MixParams,
    rng: np.random.Generator,
    *,
    crop_mode: str = "random",
    mode: str = "both",
    resid_ceiling: float | None = DEFAULT_RESID_CEILING,
    target_id: str | None = None,
) -> tuple[np.ndarray, MixAudit]:
    """Augment ``x1`` toward ``x2`` with probability ``params.prob``.

    Random draws happen in a fixed order (gate, lambda, crop) whatever the
    mode, so a stream replays identically across modes.
    """
    x1 = check_tensor(x1)
    audit = MixAudit(
        applied=False,
        target_id=target_id,
        lambda1=params.lambda1,
        lambda2=params.lambda2,
        mode=mode,
        crop_mode=crop_mode,
    )
    if not rng.random() < params.prob:
        return x1, audit

    lam = float(rng.uniform(0.0, params.eta))
    region = sample_crop(x1.shape[0], x1.shape[1], params.crop_ratio, rng, crop_mode)
    out, residue = apply_mix(
        x1,
        x2,
        lam,
        region,
        params.lambda1,
        params.lambda2,
        mode=mode,
        resid_ceiling=resid_ceiling,
    )
    audit.applied = True
    audit.lam = lam
    audit.crop = region
    audit.max_residue = residue
    return out, audit


def replay(x1, x2, audit: MixAudit, *, resid_ceiling: float | None = None) -> np.ndarray:
    """Recompute an augmentation from its audit record alone."""
    x1 = check_tensor(x1)
    if not audit.applied:
        return x1
    out, _ = apply_mix(
        x1,
        x2,
        audit.lam,
        audit.crop,
        audit.lambda1,
        audit.lambda2,
        mode=audit.mode,
        resid_ceiling=resid_ceiling,
    )
    return out

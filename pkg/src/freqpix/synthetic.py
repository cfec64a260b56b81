"""Synthetic images with a known split into object, domain-robust,
domain-spurious and noise components.

Each image is ``0.5 + obj + robust + spu + noise`` clipped to [0, 1]:

* ``obj``: a Gaussian blob whose position depends only on the class.
* ``robust``: the same blob scaled by a gain that depends on class *and* domain.
* ``spu``: a cosine grating placed in a domain-specific frequency band of the
  amplitude spectrum; depends only on the domain.
* ``noise``: white Gaussian noise, independent of both. A fixed share of each
  cell are low-quality captures with much stronger noise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from freqpix.config import parse_flat
from freqpix.errors import ConfigError, DimensionError

# low-frequency bins (cycles per image along rows, cols), assigned to domains in order
SPU_BANDS = ((0, 2), (2, 0), (2, 2), (2, -2), (0, 3), (3, 0), (1, 3), (3, 1))


@dataclass(frozen=True)
class SynthSpec:
    classes: int = 2
    domains: int = 2
    height: int = 32
    width: int = 32
    channels: int = 1
    obj_sigma: float = 0.14  # blob width as a fraction of the image side
    obj_sep: float = 0.3
    robust_sep: float = 0.02
    spu_sep: float = 0.045
    noise_std: float = 0.25
    outlier_frac: float = 0.1
    outlier_std: float = 10.0
    per_cell: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.classes < 1 or self.domains < 1:
            raise DimensionError("need at least one class and one domain")
        if self.domains > len(SPU_BANDS):
            raise DimensionError(f"at most {len(SPU_BANDS)} domains are supported")
        if min(self.height, self.width, self.channels) < 1:
            raise DimensionError(
                f"invalid image dims {self.height}x{self.width}x{self.channels}"
            )
        if min(self.height, self.width) < 8:
            raise DimensionError("images must be at least 8x8 to hold the frequency bands")
        if self.per_cell < 1:
            raise DimensionError("per_cell must be positive")
        if not 0.0 <= self.outlier_frac <= 1.0:
            raise ConfigError("outlier_frac must lie in [0, 1]")
        for name in ("obj_sigma", "obj_sep", "robust_sep", "spu_sep", "noise_std", "outlier_std"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")


@dataclass
class LabeledData:
    images: np.ndarray  # (N, H, W, C)
    labels: np.ndarray  # (N,)
    domains: np.ndarray  # (N,)
    ids: list[str]

    def __len__(self) -> int:
        return len(self.labels)

    def cells(self) -> list[tuple]:
        pairs = {(y, d) for y, d in zip(self.labels.tolist(), self.domains.tolist())}
        return sorted(pairs, key=lambda p: (str(p[0]), str(p[1])))

    def cell_indices(self, label, domain) -> np.ndarray:
        return np.flatnonzero((self.labels == label) & (self.domains == domain))

    def with_images(self, images: np.ndarray) -> "LabeledData":
        return LabeledData(images, self.labels, self.domains, self.ids)


def load_synth_spec(path) -> SynthSpec:
    from pathlib import Path

    values = parse_flat(Path(path).read_text(encoding="utf-8"), str(path))
    return synth_spec_from_dict(values)


def synth_spec_from_dict(values: dict) -> SynthSpec:
    types = {f.name: f.type for f in fields(SynthSpec)}
    unknown = sorted(set(values) - set(types))
    if unknown:
        raise ConfigError(f"unknown synthetic spec key(s): {', '.join(map(repr, unknown))}")
    kw = {}
    for k, v in values.items():
        conv = int if types[k] in (int, "int") else float
        try:
            kw[k] = conv(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{k}: cannot parse {v!r}") from None
    return replace(SynthSpec(), **kw)


def class_template(spec: SynthSpec, label: int) -> np.ndarray:
    """Unit-height blob; centers sit on a circle, one angle per class."""
    H, W = spec.height, spec.width
    ang = 2.0 * math.pi * label / max(spec.classes, 1) + math.pi / 4
    cy = H / 2 + 0.25 * H * math.sin(ang)
    cx = W / 2 + 0.25 * W * math.cos(ang)
    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    s = spec.obj_sigma * min(H, W)
    return np.exp(-((yy + 0.5 - cy) ** 2 + (xx + 0.5 - cx) ** 2) / (2 * s * s))


def robust_gain(spec: SynthSpec, label: int, domain: int) -> float:
    """Fixed gain in [-1, 1] for each (class, domain) cell."""
    return math.cos(math.pi * (label + 1) * (2 * domain + 1) / (spec.classes + 1) + 0.3 * domain)


def domain_texture(spec: SynthSpec, domain: int) -> np.ndarray:
    """Unit cosine grating built from a conjugate pair of spectral bins."""
    H, W = spec.height, spec.width
    fy, fx = SPU_BANDS[domain]
    spec_grid = np.zeros((H, W), dtype=np.complex128)
    phase = 0.5 * domain
    spec_grid[fy % H, fx % W] += 0.5 * H * W * np.exp(1j * phase)
    spec_grid[-fy % H, -fx % W] += 0.5 * H * W * np.exp(-1j * phase)
    return np.fft.ifft2(spec_grid).real


def generate_synthetic(spec: SynthSpec | None = None, *, return_blocks: bool = False):
    """Draw ``per_cell`` images for every (class, domain) cell.

    With ``return_blocks=True`` also returns the unclipped components as a
    dict of (N, H, W, C) arrays keyed ``obj``, ``robust``, ``spu``, ``noise``.
    """
    spec = spec or SynthSpec()
    rng = np.random.default_rng(spec.seed)
    H, W, C = spec.height, spec.width, spec.channels
    n = spec.classes * spec.domains * spec.per_cell
    blocks = {k: np.zeros((n, H, W, C)) for k in ("obj", "robust", "spu", "noise")}
    labels = np.empty(n, dtype=np.int64)
    domains = np.empty(n, dtype=np.int64)
    templates = [class_template(spec, y) for y in range(spec.classes)]
    textures = [domain_texture(spec, d) for d in range(spec.domains)]

    i = 0
    for y in range(spec.classes):
        for d in range(spec.domains):
            k = slice(i, i + spec.per_cell)
            labels[k] = y
            domains[k] = d
            blocks["obj"][k] = (spec.obj_sep * templates[y])[None, :, :, None]
            gain = spec.robust_sep * robust_gain(spec, y, d)
            blocks["robust"][k] = (gain * templates[y])[None, :, :, None]
            blocks["spu"][k] = (spec.spu_sep * textures[d])[None, :, :, None]
            i += spec.per_cell

    # an exact share of every cell are low-quality captures
    sigma = np.full(n, spec.noise_std)
    n_out = int(round(spec.outlier_frac * spec.per_cell))
    for start in range(0, n, spec.per_cell):
        picks = rng.permutation(spec.per_cell)[:n_out]
        sigma[start + picks] = spec.outlier_std
    blocks["noise"] = sigma[:, None, None, None] * rng.standard_normal((n, H, W, C))

    images = np.clip(0.5 + sum(blocks.values()), 0.0, 1.0)
    ids = [f"s{j:05d}" for j in range(n)]
    data = LabeledData(images, labels, domains, ids)
    if return_blocks:
        return data, blocks
    return data


def spec_dict(spec: SynthSpec) -> dict:
    return asdict(spec)

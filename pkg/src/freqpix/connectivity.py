"""Connectivity between class-domain groups, measured as the test error of a
fixed linear probe trained to tell the two groups apart.

Higher error means the groups are harder to separate, i.e. more connected.
The four pair kinds follow the equality pattern of (class, domain):
rho (same, same), alpha (same class, other domain), beta (other class, same
domain), gamma (other class, other domain).
"""

from __future__ import annotations

import enum
import itertools
import json
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from freqpix import _kernels
from freqpix.errors import DiversityError, ValidationError
from freqpix.mixing import MixParams, frequency_pixel_mix
from freqpix.sampler import PairingStrategy, SampleRecord, derive_stream, select_target
from freqpix.synthetic import LabeledData

TEST_FRACTION = 0.2


class PairKind(enum.Enum):
    RHO = "rho"
    ALPHA = "alpha"
    BETA = "beta"
    GAMMA = "gamma"

    @classmethod
    def of(cls, group0, group1) -> "PairKind":
        same_class = group0[0] == group1[0]
        same_domain = group0[1] == group1[1]
        if same_class:
            return cls.RHO if same_domain else cls.ALPHA
        return cls.BETA if same_domain else cls.GAMMA


@dataclass(frozen=True)
class PairSpec:
    group0: tuple
    group1: tuple
    kind: PairKind | None = None

    def __post_init__(self):
        actual = PairKind.of(self.group0, self.group1)
        if self.kind is None:
            object.__setattr__(self, "kind", actual)
        elif self.kind is not actual:
            raise ValidationError(
                f"{self.group0} vs {self.group1} is a {actual.value} pair, not {self.kind.value}"
            )

    def swapped(self) -> "PairSpec":
        return PairSpec(self.group1, self.group0, self.kind)


@dataclass(frozen=True)
class ProbeConfig:
    """Fixed probe hyperparameters, shared by every pair of an experiment."""

    size: int = 16
    epochs: int = 200
    lr: float = 0.5
    l2: float = 0.01

    def describe(self) -> str:
        return (
            f"logistic regression, inputs downsampled to <= {self.size}x{self.size}, "
            f"standardized, full-batch GD {self.epochs} epochs, lr={self.lr}, l2={self.l2}"
        )


@dataclass
class PairDataset:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray


@dataclass
class ConnectivityReport:
    rho: float | None
    alpha: float | None
    beta: float | None
    gamma: float | None
    alpha_over_gamma: float | None
    beta_over_gamma: float | None
    pairs: dict[str, int]
    seed: int
    probe: str
    per_pair: list[dict] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("per_pair")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _stable_key(*parts) -> int:
    return zlib.crc32(repr(parts).encode())


def probe_features(data: LabeledData | np.ndarray, size: int = 16) -> np.ndarray:
    """Flatten images after downsampling to at most ``size`` x ``size``."""
    images = data.images if isinstance(data, LabeledData) else np.asarray(data, dtype=np.float64)
    if images.ndim <= 2:
        return images.reshape(len(images), -1).astype(np.float64)
    _, H, W, _ = images.shape
    h, w = min(size, H), min(size, W)
    if (h, w) == (H, W):
        return images.reshape(len(images), -1).astype(np.float64)
    return np.stack([_kernels.resize(img, h, w).ravel() for img in images])


def _split(indices: np.ndarray, rng: np.random.Generator, test_frac: float):
    n = len(indices)
    perm = rng.permutation(indices)
    n_test = min(n - 1, max(1, int(round(test_frac * n))))
    return perm[n_test:], perm[:n_test]


def build_pair_dataset(
    data: LabeledData,
    spec: PairSpec,
    seed: int = 0,
    *,
    features: np.ndarray | None = None,
    test_frac: float = TEST_FRACTION,
) -> PairDataset:
    """Label ``spec.group0`` as 0 and ``spec.group1`` as 1, drop all else, split 80/20 per group.

    A rho pair halves its single cell at random first. Splits are keyed on
    the cell, not on the group's position, so swapping groups reuses them.
    """
    if features is None:
        features = probe_features(data)
    groups = []
    for cell in (spec.group0, spec.group1):
        idx = data.cell_indices(*cell)
        if len(idx) == 0:
            raise DiversityError(f"class-domain cell (class={cell[0]!r}, domain={cell[1]!r}) is empty")
        groups.append(idx)
    roles = [("g", spec.group0), ("g", spec.group1)]
    if spec.kind is PairKind.RHO:
        idx = groups[0]
        if len(idx) < 4:
            raise DiversityError(f"cell {spec.group0} needs at least 4 samples for a rho pair")
        perm = np.random.default_rng([seed, _stable_key("rho", spec.group0)]).permutation(idx)
        half = len(perm) // 2
        groups = [np.sort(perm[:half]), np.sort(perm[half:])]
        roles = [("h0", spec.group0), ("h1", spec.group0)]
    train, test = [], []
    for label, (idx, role) in enumerate(zip(groups, roles)):
        if len(idx) < 2:
            raise DiversityError(f"cell {role[1]} has fewer than 2 samples")
        tr, te = _split(idx, np.random.default_rng([seed, _stable_key(*role)]), test_frac)
        train.append((tr, label))
        test.append((te, label))

    def stack(parts):
        idx = np.concatenate([p for p, _ in parts])
        y = np.concatenate([np.full(len(p), lab, dtype=np.float64) for p, lab in parts])
        return features[idx], y

    x_tr, y_tr = stack(train)
    x_te, y_te = stack(test)
    return PairDataset(x_tr, y_tr, x_te, y_te)


def estimate_connectivity(pair: PairDataset, probe: ProbeConfig = ProbeConfig()) -> float:
    """Test error of the probe; deterministic given the split (zero init, full batch)."""
    if len(pair.y_train) == 0 or len(pair.y_test) == 0:
        raise DiversityError("train and test splits must be non-empty")
    if len(np.unique(pair.y_train)) < 2:
        raise DiversityError("train split holds a single label")
    x_tr = np.asarray(pair.x_train, dtype=np.float64).reshape(len(pair.y_train), -1)
    x_te = np.asarray(pair.x_test, dtype=np.float64).reshape(len(pair.y_test), -1)
    mu = x_tr.mean(axis=0)
    sd = x_tr.std(axis=0)
    sd[sd == 0] = 1.0
    x_tr = (x_tr - mu) / sd
    x_te = (x_te - mu) / sd
    w, b = _kernels.logistic_fit(x_tr, pair.y_train, probe.lr, probe.epochs, probe.l2)
    pred = (x_te @ w + b) > 0.0
    return float(np.mean(pred != (pair.y_test > 0.5)))


def sig3(x: float) -> float:
    return float(f"{x:.3g}")


def connectivity_ratios(rho, alpha, beta, gamma) -> tuple[float | None, float | None]:
    """alpha/gamma and beta/gamma to 3 significant figures; None when undefined."""
    del rho
    if gamma is None or not gamma > 0:
        return None, None
    a = sig3(alpha / gamma) if alpha is not None else None
    b = sig3(beta / gamma) if beta is not None else None
    return a, b


def enumerate_pairs(cells) -> dict[PairKind, list[PairSpec]]:
    out = {k: [] for k in PairKind}
    for cell in cells:
        out[PairKind.RHO].append(PairSpec(cell, cell))
    for a, b in itertools.combinations(cells, 2):
        spec = PairSpec(a, b)
        out[spec.kind].append(spec)
    return out


def select_pairs(
    data: LabeledData, pairs_per_kind: int | None, seed: int
) -> dict[PairKind, list[PairSpec]]:
    cells = data.cells()
    if len({c for c, _ in cells}) < 2 or len({d for _, d in cells}) < 2:
        raise DiversityError("connectivity needs at least 2 classes and 2 domains")
    pairs = enumerate_pairs(cells)
    if pairs_per_kind is not None:
        if pairs_per_kind < 1:
            raise ValidationError("pairs_per_kind must be positive")
        rng = np.random.default_rng([seed, _stable_key("pairs")])
        for kind, specs in pairs.items():
            if len(specs) > pairs_per_kind:
                keep = np.sort(rng.choice(len(specs), pairs_per_kind, replace=False))
                pairs[kind] = [specs[i] for i in keep]
    for kind, specs in pairs.items():
        if not specs:
            raise DiversityError(f"no {kind.value} pairs available")
    return pairs


def run_connectivity_experiment(
    data: LabeledData,
    pairs_per_kind: int | None = None,
    probe: ProbeConfig = ProbeConfig(),
    seed: int = 0,
    *,
    pairs: dict[PairKind, list[PairSpec]] | None = None,
) -> ConnectivityReport:
    if pairs is None:
        pairs = select_pairs(data, pairs_per_kind, seed)
    features = probe_features(data, probe.size)
    per_kind: dict[str, float | None] = {}
    per_pair = []
    for kind in PairKind:
        errs = []
        for spec in pairs.get(kind, []):
            pair = build_pair_dataset(data, spec, seed, features=features)
            err = estimate_connectivity(pair, probe)
            errs.append(err)
            per_pair.append(
                {"kind": kind.value, "group0": list(spec.group0), "group1": list(spec.group1), "error": err}
            )
        per_kind[kind.value] = float(np.mean(errs)) if errs else None
    a_g, b_g = connectivity_ratios(*(per_kind[k.value] for k in PairKind))
    return ConnectivityReport(
        **per_kind,
        alpha_over_gamma=a_g,
        beta_over_gamma=b_g,
        pairs={k.value: len(pairs.get(k, [])) for k in PairKind},
        seed=seed,
        probe=probe.describe(),
        per_pair=per_pair,
    )


def augment_dataset(
    data: LabeledData,
    params: MixParams,
    seed: int = 0,
    *,
    crop_mode: str = "random",
    mode: str = "both",
    pairing: PairingStrategy = PairingStrategy.CROSS_DOMAIN_TRAIN,
    resid_ceiling: float | None = None,
) -> LabeledData:
    """Replace every image by one frequency-pixel mix with a target from the same data."""
    records = [
        SampleRecord(rid, None, str(y), str(d))
        for rid, y, d in zip(data.ids, data.labels.tolist(), data.domains.tolist())
    ]
    position = {rid: i for i, rid in enumerate(data.ids)}
    out = np.empty_like(data.images)
    for i, rec in enumerate(records):
        rng = derive_stream(seed, i)
        target = select_target(rec, records, pairing, rng)
        j = position[target.id]
        out[i], _ = frequency_pixel_mix(
            data.images[i],
            data.images[j],
            params,
            rng,
            crop_mode=crop_mode,
            mode=mode,
            resid_ceiling=resid_ceiling,
            target_id=target.id,
        )
    return data.with_images(out)


def run_paired_experiment(
    data: LabeledData,
    params: MixParams,
    pairs_per_kind: int | None = None,
    probe: ProbeConfig = ProbeConfig(),
    seed: int = 0,
    *,
    crop_mode: str = "random",
    mode: str = "both",
    resid_ceiling: float | None = None,
    raw: ConnectivityReport | None = None,
) -> tuple[ConnectivityReport, ConnectivityReport]:
    """Raw and augmented reports over identical pair selections and splits."""
    pairs = select_pairs(data, pairs_per_kind, seed)
    if raw is None:
        raw = run_connectivity_experiment(data, probe=probe, seed=seed, pairs=pairs)
    aug_data = augment_dataset(
        data, params, seed, crop_mode=crop_mode, mode=mode, resid_ceiling=resid_ceiling
    )
    aug = run_connectivity_experiment(aug_data, probe=probe, seed=seed, pairs=pairs)
    return raw, aug

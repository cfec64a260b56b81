"""Grid sweeps of the pixel-blend and fusion ratios over paired experiments."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from freqpix.config import RunConfig
from freqpix.connectivity import (
    ConnectivityReport,
    ProbeConfig,
    connectivity_ratios,
    run_connectivity_experiment,
    run_paired_experiment,
    select_pairs,
)
from freqpix.errors import ConfigError
from freqpix.synthetic import SynthSpec, generate_synthetic

CSV_COLUMNS = (
    "lambda1",
    "lambda2",
    "alpha_over_gamma_raw",
    "alpha_over_gamma_aug",
    "beta_over_gamma_raw",
    "beta_over_gamma_aug",
)


@dataclass
class SweepCell:
    lambda1: float
    lambda2: float
    raw: tuple[float | None, float | None]
    aug: tuple[float | None, float | None]

    def row(self) -> dict:
        return dict(
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            alpha_over_gamma_raw=self.raw[0],
            alpha_over_gamma_aug=self.aug[0],
            beta_over_gamma_raw=self.raw[1],
            beta_over_gamma_aug=self.aug[1],
        )


def parse_grid(text: str, name: str = "grid") -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as comma-separated numbers") from None
    if not values:
        raise ConfigError(f"{name} is empty")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"{name}: {v} lies outside [0, 1]")
    return values


def pooled_ratios(reports: list[ConnectivityReport]) -> tuple[float | None, float | None]:
    """Ratios of seed-averaged errors (not the mean of per-seed ratios)."""
    means = []
    for kind in ("rho", "alpha", "beta", "gamma"):
        vals = [getattr(r, kind) for r in reports]
        means.append(None if any(v is None for v in vals) else float(np.mean(vals)))
    return connectivity_ratios(*means)


def run_sweep(
    spec: SynthSpec,
    lambda1_grid: list[float],
    lambda2_grid: list[float],
    base: RunConfig | None = None,
    seed: int = 0,
    seeds: int = 1,
    pairs_per_kind: int | None = None,
    probe: ProbeConfig = ProbeConfig(),
    mode: str = "both",
) -> list[SweepCell]:
    """Seed ``k`` uses data seed ``spec.seed + k`` and experiment seed ``seed + k``.

    Raw reports are computed once per seed and shared by every grid cell.
    """
    base = base or RunConfig(resid_ceiling=None)
    runs = []
    for k in range(seeds):
        data = generate_synthetic(replace(spec, seed=spec.seed + k))
        pairs = select_pairs(data, pairs_per_kind, seed + k)
        raw = run_connectivity_experiment(data, probe=probe, seed=seed + k, pairs=pairs)
        runs.append((data, raw))
    cells = []
    for l1 in lambda1_grid:
        for l2 in lambda2_grid:
            params = replace(base.mix, lambda1=l1, lambda2=l2)
            raws, augs = [], []
            for k, (data, raw) in enumerate(runs):
                _, aug = run_paired_experiment(
                    data,
                    params,
                    pairs_per_kind,
                    probe,
                    seed + k,
                    crop_mode=base.crop_mode,
                    mode=mode,
                    resid_ceiling=base.resid_ceiling,
                    raw=raw,
                )
                raws.append(raw)
                augs.append(aug)
            cells.append(SweepCell(l1, l2, pooled_ratios(raws), pooled_ratios(augs)))
    return cells


def write_csv(cells: list[SweepCell], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for c in cells:
            w.writerow({k: "" if v is None else v for k, v in c.row().items()})


def render_heatmaps(cells: list[SweepCell], out_dir) -> list:
    """One PNG per metric, lambda1 on rows and lambda2 on columns."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    l1s = sorted({c.lambda1 for c in cells})
    l2s = sorted({c.lambda2 for c in cells})
    written = []
    for metric in CSV_COLUMNS[2:]:
        grid = np.full((len(l1s), len(l2s)), np.nan)
        for c in cells:
            v = c.row()[metric]
            if v is not None:
                grid[l1s.index(c.lambda1), l2s.index(c.lambda2)] = v
        fig, ax = plt.subplots(figsize=(4, 3.4))
        im = ax.imshow(grid, cmap="viridis", origin="lower")
        ax.set_xticks(range(len(l2s)), [f"{v:g}" for v in l2s])
        ax.set_yticks(range(len(l1s)), [f"{v:g}" for v in l1s])
        ax.set_xlabel("lambda2")
        ax.set_ylabel("lambda1")
        ax.set_title(metric.replace("_", " "))
        for (i, j), v in np.ndenumerate(grid):
            if np.isfinite(v):
                ax.text(j, i, f"{v:.2f}", ha="center", va="center", color="w", fontsize=8)
        fig.colorbar(im, ax=ax)
        fig.tight_layout()
        path = Path(out_dir) / f"{metric}.png"
        fig.savefig(path, dpi=80)
        plt.close(fig)
        written.append(path)
    return written

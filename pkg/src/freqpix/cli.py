"""Command-line entry point: ``freqpix {augment,connectivity,inspect,sweep}``.

Exit codes: 0 success, 1 some records failed, 2 bad configuration or input
detected before anything was written.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import shutil
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from freqpix import _kernels
from freqpix.config import RunConfig, build_config, default_workers, load_config
from freqpix.connectivity import ConnectivityReport, run_connectivity_experiment, run_paired_experiment
from freqpix.dataset_io import format_for, load_tensor, read_manifest, resize_bilinear, save_tensor
from freqpix.errors import FreqPixError
from freqpix.mixing import CROP_MODES, MIX_MODES, MixAudit, frequency_pixel_mix, match_shape, replay
from freqpix.sampler import PairingStrategy, derive_stream, select_target
from freqpix.spectral import Layout, decompose, dft2, idft2, recompose, shift
from freqpix.synthetic import LabeledData, SynthSpec, generate_synthetic, load_synth_spec

EXIT_OK, EXIT_RECORD_ERRORS, EXIT_CONFIG = 0, 1, 2
AUDIT_NAME = "audit.jsonl"


class UsageError(FreqPixError):
    pass


@dataclass
class RunSummary:
    processed: int = 0
    augmented: int = 0
    skipped: int = 0
    errored: int = 0
    wall_time: float = 0.0
    seed: int = 0
    config: dict = field(default_factory=dict)

    def add(self, entry: dict) -> None:
        self.processed += 1
        if entry.get("error"):
            self.errored += 1
        elif entry["applied"]:
            self.augmented += 1
        else:
            self.skipped += 1

    def render(self) -> str:
        rate = self.processed / self.wall_time if self.wall_time > 0 else float("inf")
        return (
            f"processed {self.processed}: augmented {self.augmented}, "
            f"skipped {self.skipped}, errored {self.errored} "
            f"in {self.wall_time:.2f}s ({rate:.1f} images/s), seed {self.seed}\n"
            f"config {json.dumps(self.config, sort_keys=True)}"
        )


# -- augment -----------------------------------------------------------------

# set once per process; forked workers inherit it
_JOB: dict = {}


def _output_name(rec) -> str:
    ext = Path(rec.path).suffix.lower()
    name = f"{rec.id}{ext}"
    if Path(name).name != name or rec.id in ("", ".", ".."):
        raise UsageError(f"record id {rec.id!r} is not usable as a file name")
    return name


def _augment_one(index: int) -> dict:
    job = _JOB
    rec = job["sources"][index]
    cfg: RunConfig = job["config"]
    entry = {"id": rec.id, "index": index, "seed": cfg.seed}
    try:
        name = _output_name(rec)
        rng = derive_stream(cfg.seed, index)
        target = select_target(rec, job["pool"], cfg.pairing, rng)
        x1 = load_tensor(rec.path)
        try:
            x2 = match_shape(load_tensor(target.path), x1)
        except (FreqPixError, OSError) as exc:
            raise type(exc)(f"target {target.id!r}: {exc}") from None
        out, audit = frequency_pixel_mix(
            x1,
            x2,
            cfg.mix,
            rng,
            crop_mode=cfg.crop_mode,
            mode=job["mode"],
            resid_ceiling=cfg.resid_ceiling,
            target_id=target.id,
        )
        audit.seed, audit.index = cfg.seed, index
        dest = Path(job["out_dir"]) / name
        if audit.applied:
            save_tensor(out, dest, format_for(rec.path))
        else:
            shutil.copyfile(rec.path, dest)
        entry.update(audit.to_dict())
        entry.update(output=name, error=None)
    except (FreqPixError, OSError) as exc:
        entry.update(applied=False, output=None, error=f"{type(exc).__name__}: {exc}")
    return entry


def _init_worker(job: dict) -> None:
    _JOB.clear()
    _JOB.update(job)


def _run_config(args) -> RunConfig:
    base = RunConfig(workers=default_workers())
    cfg = load_config(args.config, base) if args.config else base
    inline = {
        k: getattr(args, k)
        for k in ("eta", "crop_ratio", "lambda1", "lambda2", "prob", "seed", "workers", "pairing", "crop_mode", "resid_ceiling")
        if getattr(args, k) is not None
    }
    return build_config(inline, cfg)


def _read_manifests(args):
    sources = read_manifest(args.source_manifest, check_paths=False)
    pool = sources if args.pool_manifest is None else read_manifest(args.pool_manifest, check_paths=False)
    return sources, pool


def cmd_augment(args) -> int:
    if args.replay:
        return _cmd_replay(args)
    try:
        cfg = _run_config(args)
        sources, pool = _read_manifests(args)
    except FreqPixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    job = dict(sources=sources, pool=pool, config=cfg, mode=args.mode, out_dir=str(out_dir))
    summary = RunSummary(seed=cfg.seed, config=dict(cfg.to_dict(), mode=args.mode))
    _kernels.warmup()  # forked workers inherit the compiled kernels
    start = time.perf_counter()
    indices = range(len(sources))
    if cfg.workers == 1 or len(sources) <= 1:
        _init_worker(job)
        entries = [_augment_one(i) for i in indices]
    else:
        ctx = multiprocessing.get_context("fork")
        chunk = max(1, len(sources) // (cfg.workers * 4))
        with ProcessPoolExecutor(cfg.workers, mp_context=ctx, initializer=_init_worker, initargs=(job,)) as ex:
            # map yields in submission order whatever the completion order
            entries = list(ex.map(_augment_one, indices, chunksize=chunk))
    summary.wall_time = time.perf_counter() - start

    with open(out_dir / AUDIT_NAME, "w", encoding="utf-8") as fh:
        for entry in entries:
            summary.add(entry)
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
            if entry["error"]:
                print(f"record {entry['id']!r}: {entry['error']}", file=sys.stderr)
    print(summary.render())
    return EXIT_OK if summary.errored == 0 else EXIT_RECORD_ERRORS


def _cmd_replay(args) -> int:
    if not args.replay_id:
        print("error: --replay needs --replay-id", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sources, pool = _read_manifests(args)
        entry = None
        with open(args.replay, encoding="utf-8") as fh:
            for line in fh:
                d = json.loads(line)
                if d["id"] == args.replay_id:
                    entry = d
                    break
        if entry is None:
            raise UsageError(f"id {args.replay_id!r} not found in {args.replay}")
        if entry.get("error"):
            raise UsageError(f"record {args.replay_id!r} failed in the original run: {entry['error']}")
        rec = next(r for r in sources if r.id == args.replay_id)
        for k in ("id", "output", "error"):
            entry.pop(k, None)
        audit = MixAudit.from_dict(entry)
    except (FreqPixError, OSError, StopIteration, json.JSONDecodeError) as exc:
        print(f"error: cannot replay: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dest = out_dir / _output_name(rec)
    try:
        if not audit.applied:
            shutil.copyfile(rec.path, dest)
        else:
            target = next(r for r in pool if r.id == audit.target_id)
            x1 = load_tensor(rec.path)
            out = replay(x1, match_shape(load_tensor(target.path), x1), audit)
            save_tensor(out, dest, format_for(rec.path))
    except (FreqPixError, OSError, StopIteration) as exc:
        print(f"error: replay of {rec.id!r} failed: {exc!r}", file=sys.stderr)
        return EXIT_RECORD_ERRORS
    print(f"replayed {rec.id!r} -> {dest}")
    return EXIT_OK


# -- connectivity --------------------------------------------------------------


def load_labeled(manifest) -> LabeledData:
    """Manifest records as one array; images are resized to the first record's size."""
    records = read_manifest(manifest)
    if not records:
        raise UsageError(f"manifest {manifest} holds no records")
    first = load_tensor(records[0].path)
    images = [first]
    for rec in records[1:]:
        x = load_tensor(rec.path)
        if x.shape[2] != first.shape[2]:
            raise UsageError(f"{rec.id!r} has {x.shape[2]} channels, expected {first.shape[2]}")
        images.append(resize_bilinear(x, first.shape[0], first.shape[1]))
    return LabeledData(
        np.stack(images),
        np.array([r.label for r in records]),
        np.array([r.domain for r in records]),
        [r.id for r in records],
    )


def _synthetic(specfile) -> tuple[LabeledData, SynthSpec]:
    spec = load_synth_spec(specfile) if specfile else SynthSpec()
    return generate_synthetic(spec), spec


def _lab_config(path) -> RunConfig:
    """Augmentation settings for experiments.

    The residue ceiling only applies when the file sets it: synthetic data
    built from pure noise breaks spectral symmetry far more than photographs.
    """
    base = RunConfig(resid_ceiling=None)
    return load_config(path, base) if path else base


def _report_dict(report: ConnectivityReport, source: str, extra: dict | None = None) -> dict:
    d = report.to_dict()
    d["source"] = source
    if extra:
        d.update(extra)
    return d


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.4g}"


def _print_table(raw: ConnectivityReport, aug: ConnectivityReport | None = None) -> None:
    rows = ["rho", "alpha", "beta", "gamma", "alpha_over_gamma", "beta_over_gamma"]
    head = f"{'metric':<18}{'raw':>10}" + (f"{'augmented':>12}" if aug else "")
    print(head)
    for k in rows:
        line = f"{k:<18}{_fmt(getattr(raw, k)):>10}"
        if aug:
            line += f"{_fmt(getattr(aug, k)):>12}"
        print(line)


def cmd_connectivity(args) -> int:
    try:
        if (args.manifest is None) == (args.synthetic is None):
            raise UsageError("give exactly one of --manifest or --synthetic")
        cfg = _lab_config(args.augment_config)
        seed = args.seed if args.seed is not None else cfg.seed
        if args.synthetic is not None:
            data, spec = _synthetic(args.synthetic)
            source = f"synthetic {json.dumps(asdict(spec), sort_keys=True)}"
        else:
            data = load_labeled(args.manifest)
            source = f"manifest {args.manifest}"
    except (FreqPixError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out)
    try:
        if args.augment_config:
            raw, aug = run_paired_experiment(
                data,
                cfg.mix,
                args.pairs_per_kind,
                seed=seed,
                crop_mode=cfg.crop_mode,
                mode=args.mode,
                resid_ceiling=cfg.resid_ceiling,
            )
        else:
            raw = run_connectivity_experiment(data, args.pairs_per_kind, seed=seed)
            aug = None
    except FreqPixError as exc:
        # diversity and validation problems are properties of the input; nothing is written
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(_report_dict(raw, source), indent=2, sort_keys=True) + "\n")
    if aug is not None:
        extra = {"augmentation": dict(cfg.to_dict(), mode=args.mode)}
        aug_path = out.with_name(f"{out.stem}.augmented{out.suffix or '.json'}")
        aug_path.write_text(json.dumps(_report_dict(aug, source, extra), indent=2, sort_keys=True) + "\n")
    _print_table(raw, aug)
    return EXIT_OK


# -- inspect -------------------------------------------------------------------


def _normalize(x: np.ndarray) -> np.ndarray:
    lo, hi = float(x.min()), float(x.max())
    if hi - lo <= 0:
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


def inspect_panels(image: np.ndarray) -> dict[str, np.ndarray]:
    """The four decomposition panels of a channel-averaged image, each in [0, 1]."""
    gray = np.asarray(image, dtype=np.float64)
    if gray.ndim == 3:
        gray = gray.mean(axis=2)
    spec = dft2(gray)
    amp, phase = decompose(spec)
    cen_amp, cen_phase = decompose(shift(spec))
    log_amp = np.log1p(cen_amp)
    peak = log_amp.max()
    amp_only = idft2(recompose(amp, np.zeros_like(phase), Layout.NATURAL))
    phase_only = idft2(recompose(np.ones_like(amp), phase, Layout.NATURAL))
    return {
        "amplitude": log_amp / peak if peak > 0 else log_amp,
        "phase": (cen_phase + np.pi) / (2 * np.pi),
        # centered so the energy at the origin is visible in the middle
        "amplitude_only": _normalize(np.fft.fftshift(amp_only)),
        "phase_only": _normalize(phase_only),
    }


def cmd_inspect(args) -> int:
    try:
        image = load_tensor(args.input)
    except (FreqPixError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    for name, panel in inspect_panels(image).items():
        path = prefix.with_name(f"{prefix.name}_{name}.png")
        save_tensor(panel[:, :, None], path, "png")
        print(path)
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------


def cmd_sweep(args) -> int:
    from freqpix.sweep import parse_grid, render_heatmaps, run_sweep, write_csv

    try:
        l1 = parse_grid(args.lambda1_grid, "--lambda1-grid")
        l2 = parse_grid(args.lambda2_grid, "--lambda2-grid")
        cfg = _lab_config(args.augment_config)
        spec = load_synth_spec(args.synthetic) if args.synthetic else SynthSpec()
        if args.seeds < 1:
            raise UsageError("--seeds must be at least 1")
    except (FreqPixError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else cfg.seed
    try:
        cells = run_sweep(spec, l1, l2, cfg, seed, args.seeds, args.pairs_per_kind, mode=args.mode)
    except FreqPixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(cells, out / "sweep.csv")
    render_heatmaps(cells, out)
    print(f"{'lambda1':>8}{'lambda2':>8}{'a/g raw':>10}{'a/g aug':>10}{'b/g raw':>10}{'b/g aug':>10}")
    for c in cells:
        print(
            f"{c.lambda1:>8g}{c.lambda2:>8g}{_fmt(c.raw[0]):>10}{_fmt(c.aug[0]):>10}"
            f"{_fmt(c.raw[1]):>10}{_fmt(c.aug[1]):>10}"
        )
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freqpix", description="Frequency-pixel mixing augmentation tools.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("augment", help="augment every record of a manifest")
    a.add_argument("--source-manifest", required=True)
    a.add_argument("--pool-manifest", help="mixing targets (default: the source manifest)")
    a.add_argument("--out-dir", required=True)
    a.add_argument("--config", help="flat key = value config file")
    for flag in ("--eta", "--crop-ratio", "--lambda1", "--lambda2", "--prob"):
        a.add_argument(flag, type=float)
    a.add_argument("--seed", type=int)
    a.add_argument("--workers", type=int, help="default: $FREQPIX_WORKERS or 1")
    a.add_argument("--pairing", choices=[s.value for s in PairingStrategy])
    a.add_argument("--crop-mode", choices=CROP_MODES)
    a.add_argument("--mode", choices=MIX_MODES, default="both")
    a.add_argument("--resid-ceiling", help="largest tolerated imaginary residue, or 'none'")
    a.add_argument("--replay", metavar="AUDIT", help="recompute one record from an audit file")
    a.add_argument("--replay-id")
    a.set_defaults(func=cmd_augment)

    c = sub.add_parser("connectivity", help="estimate class-domain connectivity")
    c.add_argument("--manifest")
    c.add_argument("--synthetic", nargs="?", const="", metavar="SPECFILE")
    c.add_argument("--pairs-per-kind", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--augment-config", help="also run the paired raw vs augmented comparison")
    c.add_argument("--mode", choices=MIX_MODES, default="both")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_connectivity)

    i = sub.add_parser("inspect", help="write amplitude and phase panels of an image")
    i.add_argument("--input", required=True)
    i.add_argument("--out-prefix", required=True)
    i.set_defaults(func=cmd_inspect)

    s = sub.add_parser("sweep", help="paired experiments over a lambda1 x lambda2 grid")
    s.add_argument("--synthetic", nargs="?", const="", default="", metavar="SPECFILE")
    s.add_argument("--lambda1-grid", default="0.2,0.5,0.8")
    s.add_argument("--lambda2-grid", default="0.2,0.5,0.8")
    s.add_argument("--seed", type=int)
    s.add_argument("--seeds", type=int, default=1, help="average over this many consecutive seeds")
    s.add_argument("--pairs-per-kind", type=int)
    s.add_argument("--augment-config", help="base mixing settings; the grid overrides lambda1/lambda2")
    s.add_argument("--mode", choices=MIX_MODES, default="both")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

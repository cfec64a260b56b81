"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored; values may be bare or quoted.
Unknown keys are rejected so a typo never silently falls back to a default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from freqpix.errors import ConfigError, ValidationError
from freqpix.mixing import CROP_MODES, DEFAULT_RESID_CEILING, MixParams
from freqpix.sampler import PairingStrategy

MIX_KEYS = {
    "eta": "eta",
    "crop_ratio": "crop_ratio",
    "lambda1": "lambda1",
    "lambda2": "lambda2",
    "prob": "prob",
}
RUN_KEYS = ("seed", "crop_mode", "pairing", "workers", "resid_ceiling")


@dataclass(frozen=True)
class RunConfig:
    mix: MixParams = field(default_factory=MixParams)
    seed: int = 0
    crop_mode: str = "random"
    pairing: PairingStrategy = PairingStrategy.CROSS_DOMAIN_TRAIN
    workers: int = 1
    resid_ceiling: float | None = DEFAULT_RESID_CEILING  # None disables the check

    def __post_init__(self):
        if self.crop_mode not in CROP_MODES:
            raise ConfigError(f"crop_mode={self.crop_mode!r}; expected one of {CROP_MODES}")
        if self.seed < 0:
            raise ConfigError(f"seed={self.seed} must be non-negative")
        if self.workers < 1:
            raise ConfigError(f"workers={self.workers} must be at least 1")
        if self.resid_ceiling is not None and not self.resid_ceiling > 0:
            raise ConfigError(f"resid_ceiling={self.resid_ceiling} must be positive")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self.mix, f.name) for f in fields(self.mix)}
        d.update(
            seed=self.seed,
            crop_mode=self.crop_mode,
            pairing=self.pairing.value,
            workers=self.workers,
            resid_ceiling=self.resid_ceiling,
        )
        return d


def parse_flat(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _as_int(key, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _as_float(key, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def build_config(values: dict, base: RunConfig | None = None) -> RunConfig:
    """Overlay ``values`` (strings or typed) onto ``base`` and validate."""
    base = base or RunConfig()
    unknown = sorted(set(values) - set(MIX_KEYS) - set(RUN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(map(repr, unknown))}")
    mix_kw = {MIX_KEYS[k]: _as_float(k, v) for k, v in values.items() if k in MIX_KEYS}
    try:
        mix = replace(base.mix, **mix_kw)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    run_kw = {}
    if "seed" in values:
        run_kw["seed"] = _as_int("seed", values["seed"])
    if "workers" in values:
        run_kw["workers"] = _as_int("workers", values["workers"])
    if "resid_ceiling" in values:
        v = values["resid_ceiling"]
        off = v is None or (isinstance(v, str) and v.strip().lower() in ("none", "off"))
        run_kw["resid_ceiling"] = None if off else _as_float("resid_ceiling", v)
    if "crop_mode" in values:
        run_kw["crop_mode"] = str(values["crop_mode"])
    if "pairing" in values:
        try:
            run_kw["pairing"] = PairingStrategy.parse(values["pairing"])
        except ValidationError as exc:
            raise ConfigError(str(exc)) from None
    return replace(base, mix=mix, **run_kw)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return build_config(parse_flat(text, str(path)), base)


def default_workers() -> int:
    env = os.environ.get("FREQPIX_WORKERS")
    if not env:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"FREQPIX_WORKERS={env!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"FREQPIX_WORKERS={n} must be at least 1")
    return n

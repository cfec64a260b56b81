"""Sample records, cross-domain target selection, and per-sample random streams."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from freqpix.errors import NoCrossDomainCandidate, ValidationError

_U64 = 1 << 64


@dataclass(frozen=True)
class SampleRecord:
    id: str
    path: Path | None
    label: str
    domain: str


class PairingStrategy(enum.Enum):
    CROSS_DOMAIN_TRAIN = "cross-domain"
    UNLABELED_POOL = "unlabeled"

    @classmethod
    def parse(cls, value) -> "PairingStrategy":
        if isinstance(value, cls):
            return value
        for member in cls:
            if value in (member.value, member.name, member.name.lower()):
                return member
        choices = ", ".join(m.value for m in cls)
        raise ValidationError(f"unknown pairing {value!r}; expected one of: {choices}")


def derive_stream(master_seed: int, sample_index: int) -> np.random.Generator:
    """Independent generator for one sample.

    Philox is counter based; the (seed, index) pair is packed into its
    128-bit key, so the stream does not depend on how samples are
    distributed over workers.
    """
    master_seed = int(master_seed)
    sample_index = int(sample_index)
    if not 0 <= master_seed < _U64 or not 0 <= sample_index < _U64:
        raise ValidationError("seed and sample index must fit in an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=master_seed * _U64 + sample_index))


def eligible_targets(
    source: SampleRecord, pool: list[SampleRecord], strategy: PairingStrategy
) -> list[SampleRecord]:
    if strategy is PairingStrategy.CROSS_DOMAIN_TRAIN:
        return [r for r in pool if r.domain != source.domain]
    return list(pool)


def select_target(
    source: SampleRecord,
    pool: list[SampleRecord],
    strategy: PairingStrategy,
    rng: np.random.Generator,
) -> SampleRecord:
    strategy = PairingStrategy.parse(strategy)
    if not pool:
        raise NoCrossDomainCandidate("target pool is empty")
    candidates = eligible_targets(source, pool, strategy)
    if not candidates:
        raise NoCrossDomainCandidate(
            f"no cross-domain candidate for {source.id!r}: every pool record "
            f"is in domain {source.domain!r}"
        )
    return candidates[int(rng.integers(len(candidates)))]

import numpy as np
import pytest
from scipy import stats

from freqpix.errors import NoCrossDomainCandidate, ValidationError
from freqpix.sampler import PairingStrategy, SampleRecord, derive_stream, eligible_targets, select_target


def rec(i, domain, label="0"):
    return SampleRecord(f"r{i}", None, label, domain)


def test_forced_choice():
    src = rec(0, "A")
    pool = [src, rec(1, "B")]
    for i in range(50):
        assert select_target(src, pool, PairingStrategy.CROSS_DOMAIN_TRAIN, derive_stream(i, 0)).id == "r1"


def test_same_domain_pool_raises():
    src = rec(0, "A")
    with pytest.raises(NoCrossDomainCandidate, match="no cross-domain candidate"):
        select_target(src, [src, rec(1, "A")], PairingStrategy.CROSS_DOMAIN_TRAIN, derive_stream(0, 0))
    with pytest.raises(NoCrossDomainCandidate):
        select_target(src, [], PairingStrategy.UNLABELED_POOL, derive_stream(0, 0))


def test_unlabeled_pool_allows_self():
    src = rec(0, "A")
    assert select_target(src, [src], PairingStrategy.UNLABELED_POOL, derive_stream(0, 0)) is src


def test_uniform_over_eligible():
    src = rec(0, "A")
    pool = [src, rec(1, "B"), rec(2, "A"), rec(3, "C"), rec(4, "B")]
    rng = derive_stream(11, 0)
    counts = {"r1": 0, "r3": 0, "r4": 0}
    n = 10_000
    for _ in range(n):
        counts[select_target(src, pool, "cross-domain", rng).id] += 1
    sigma = np.sqrt(n * (1 / 3) * (2 / 3))
    for c in counts.values():
        assert abs(c - n / 3) <= 3 * sigma
    assert stats.chisquare(list(counts.values())).pvalue > 0.001


def test_strategy_never_violates_domain():
    rng = np.random.default_rng(0)
    pool = [rec(i, str(d)) for i, d in enumerate(rng.integers(0, 3, 40))]
    for i, src in enumerate(pool):
        t = select_target(src, pool, PairingStrategy.CROSS_DOMAIN_TRAIN, derive_stream(5, i))
        assert t.domain != src.domain
    assert len(eligible_targets(pool[0], pool, PairingStrategy.UNLABELED_POOL)) == 40


def test_stream_determinism_and_distinctness():
    a = derive_stream(123, 0).random(100)
    np.testing.assert_array_equal(a, derive_stream(123, 0).random(100))
    assert not np.array_equal(a, derive_stream(123, 1).random(100))
    assert not np.array_equal(a, derive_stream(124, 0).random(100))


def test_stream_known_values_are_stable():
    # pinned so a numpy change to Philox output or key packing gets noticed
    assert derive_stream(0, 0).random() == 0.011546754286331562
    assert derive_stream(42, 7).integers(0, 1000, 5).tolist() == [936, 62, 943, 960, 685]


def test_first_draws_are_uniform():
    draws = np.array([derive_stream(2024, i).random() for i in range(1000)])
    assert stats.kstest(draws, "uniform").pvalue > 0.01


def test_stream_argument_checks():
    with pytest.raises(ValidationError):
        derive_stream(-1, 0)
    with pytest.raises(ValidationError):
        derive_stream(0, 2**64)


def test_pairing_parse():
    assert PairingStrategy.parse("unlabeled") is PairingStrategy.UNLABELED_POOL
    assert PairingStrategy.parse("CROSS_DOMAIN_TRAIN") is PairingStrategy.CROSS_DOMAIN_TRAIN
    with pytest.raises(ValidationError):
        PairingStrategy.parse("random")

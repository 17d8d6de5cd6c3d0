import numpy as np
import pytest
import torch

from nsatp.exceptions import ShapeError
from nsatp.featurizers.stationarization import (EPSILON, StationarizationStats, apply_stats, collision_score,
                                                denormalize_delay, normalize, stationarize_windowwise)
from nsatp.transit.sample import DELAY_CHANNEL


def test_constant_column():
    past = np.zeros((4, 5))
    past[:, 1] = 3.0
    normalized, stats = normalize(past)
    assert np.all(normalized == 0.0)
    assert np.all(stats.sigma == EPSILON)
    assert stats.mu[1] == 3.0


def test_normalized_columns_are_standard():
    past = np.random.default_rng(0).normal(50.0, 20.0, size=(12, 5))
    normalized, _ = normalize(past)
    assert np.allclose(normalized.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(normalized.std(axis=0), 1.0, atol=1e-12)


def test_normalize_is_idempotent():
    past = np.random.default_rng(1).normal(size=(10, 5))
    once, _ = normalize(past)
    twice, stats = normalize(once)
    assert np.allclose(once, twice, atol=1e-12)
    assert np.allclose(stats.mu, 0.0, atol=1e-12)
    assert np.allclose(stats.sigma, 1.0, atol=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_stats_match_two_pass_oracle(seed):
    rng = np.random.default_rng(seed)
    past = rng.normal(rng.uniform(-100.0, 100.0, size=5), rng.uniform(0.1, 50.0, size=5), size=(10, 5))
    _, stats = normalize(past)
    n = past.shape[0]
    for j in range(5):
        mu = sum(past[:, j]) / n
        var = sum((value - mu) ** 2 for value in past[:, j]) / n
        assert abs(stats.mu[j] - mu) < 1e-12
        assert abs(stats.sigma[j] - np.sqrt(var)) < 1e-12


def test_normalize_keeps_tensor_type():
    past = torch.randn(3, 10, 5, dtype=torch.float64)
    normalized, stats = normalize(past)
    assert isinstance(normalized, torch.Tensor)
    assert stats.mu.shape == (3, 5)
    assert torch.allclose(normalized[1], torch.as_tensor(normalize(past[1].numpy())[0]))
    assert torch.allclose(apply_stats(past, stats), normalized)


def test_empty_window():
    with pytest.raises(ValueError, match="empty window"):
        normalize(np.zeros((0, 5)))


def test_denormalize_delay():
    mu = np.zeros(5)
    sigma = np.ones(5)
    mu[DELAY_CHANNEL], sigma[DELAY_CHANNEL] = 3.0, 2.0
    stats = StationarizationStats(mu, sigma)
    assert np.array_equal(denormalize_delay(np.array([1.0, -1.0]), stats), [5.0, 1.0])
    assert np.array_equal(denormalize_delay(np.zeros(4), stats), np.full(4, 3.0))


def test_denormalize_inverts_normalize():
    past = np.random.default_rng(5).normal(30.0, 10.0, size=(10, 5))
    normalized, stats = normalize(past)
    assert np.allclose(denormalize_delay(normalized[:, DELAY_CHANNEL], stats), past[:, DELAY_CHANNEL], atol=1e-12)


def test_denormalize_shape_mismatch():
    stats = StationarizationStats(np.zeros((2, 5)), np.ones((2, 5)))
    with pytest.raises(ShapeError, match="shape"):
        denormalize_delay(np.zeros((3, 4)), stats)
    with pytest.raises(ShapeError, match="shape"):
        denormalize_delay(np.zeros(4), StationarizationStats(np.zeros(3), np.ones(3)))


@pytest.mark.parametrize("seed", range(100))
def test_affine_windows_collide(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(10, 5))
    scale, shift = rng.uniform(0.1, 10.0, size=5), rng.uniform(-100.0, 100.0, size=5)
    assert collision_score(a, scale * a + shift) < 1e-9
    assert collision_score(a, a) == 0.0
    b = np.random.default_rng(3).normal(size=(10, 5))
    oracle = np.linalg.norm((a - a.mean(0)) / a.std(0) - (b - b.mean(0)) / b.std(0))
    assert abs(collision_score(a, b) - oracle) < 1e-10
    with pytest.raises(ShapeError):
        collision_score(a, b[:5])


def test_stationarize_windowwise():
    series = np.random.default_rng(4).normal(size=20).cumsum()
    out = stationarize_windowwise(series, 5)
    assert out.shape == (20,)
    for block in out.reshape(4, 5):
        assert abs(block.mean()) < 1e-12
        assert abs(block.std() - 1.0) < 1e-12
    with pytest.raises(ValueError):
        stationarize_windowwise(series, 0)

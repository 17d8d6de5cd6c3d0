"""
Algebraic properties the compensation design relies on: the linear ops commute with the
stationarization affine map, ReLU does not, and the compensated attention scores recover the
softmax weights of the raw window.
"""
import numpy as np
import torch

from nsatp.autodiff.ops import conv1d, conv2d, linear, relu, softmax_rows
from nsatp.featurizers.spectral import dft
from nsatp.networks.swin import attention_scores

TRIALS = 100


def randn(generator, *shape):
    return torch.randn(*shape, dtype=torch.float64, generator=generator)


def linear_ops(generator):
    weight = randn(generator, 5, 3)
    kernels_1d = randn(generator, 3, 5, 3)
    kernels_2d = randn(generator, 3, 3, 5, 3)
    return {
        "linear": lambda x: linear(x, weight),
        "conv1d": lambda x: conv1d(x, kernels_1d),
        "conv2d": lambda x: conv2d(x.reshape(3, 4, 5), kernels_2d),
        "dft": dft,
    }


def test_ops_are_linear():
    generator = torch.Generator().manual_seed(0)
    for _ in range(TRIALS):
        for name, f in linear_ops(generator).items():
            a, b = randn(generator, 12, 5), randn(generator, 12, 5)
            alpha, beta = randn(generator, 2).tolist()
            assert torch.allclose(f(alpha * a + beta * b), alpha * f(a) + beta * f(b), rtol=0.0, atol=1e-10), name


def test_linear_ops_commute_with_affine_window():
    """
    f(sigma X' + 1 mu^T) = sigma f(X') + f(1 mu^T) for every linear op
    """
    generator = torch.Generator().manual_seed(1)
    for _ in range(TRIALS):
        normalized = randn(generator, 12, 5)
        normalized = (normalized - normalized.mean(0)) / normalized.std(0, unbiased=False)
        sigma = 0.5 + 2.0 * torch.rand(1, dtype=torch.float64, generator=generator).item()
        mu = 10.0 * randn(generator, 5)
        raw = sigma * normalized + mu
        level = mu.expand(12, 5)
        for name, f in linear_ops(generator).items():
            assert torch.allclose(f(raw), sigma * f(normalized) + f(level), rtol=0.0, atol=1e-8), name


def test_position_wise_map_of_mean_is_mean_of_map():
    generator = torch.Generator().manual_seed(2)
    weight = randn(generator, 5, 3)
    normalized = randn(generator, 12, 5)
    normalized = normalized - normalized.mean(0)
    raw = 2.0 * normalized + randn(generator, 5)
    out = linear(raw, weight)
    assert torch.allclose(out.mean(0).expand(12, 3), linear(raw.mean(0).expand(12, 5), weight), atol=1e-12)


def test_relu_of_affine_window():
    """
    ReLU(sigma x' + mu) = sigma max(-mu / sigma, x') + mu, not sigma ReLU(x') + mu
    """
    rng = np.random.default_rng(3)
    x = rng.normal(size=10000)
    sigma = rng.uniform(0.1, 5.0, size=10000)
    mu = rng.uniform(-50.0, 50.0, size=10000)
    left = relu(torch.as_tensor(sigma * x + mu)).numpy()
    right = sigma * np.maximum(-mu / sigma, x) + mu
    assert np.allclose(left, right, rtol=0.0, atol=1e-12)


def test_relu_mismatch_examples():
    x = torch.tensor([0.0, 1.0, 2.0, 3.0], dtype=torch.float64)
    assert relu(3.0 * x - 5.0).tolist() == [0.0, 0.0, 1.0, 4.0]
    assert relu(2.0 * x - 7.0).tolist() == [0.0, 0.0, 0.0, 0.0]
    # sigma ReLU(x') + mu is wrong whenever the threshold -mu/sigma is not zero
    assert not torch.allclose(3.0 * relu(x) - 5.0, relu(3.0 * x - 5.0))
    assert torch.allclose(3.0 * torch.maximum(torch.full_like(x, 5.0 / 3.0), x) - 5.0, relu(3.0 * x - 5.0))


def test_compensated_scores_recover_raw_attention():
    generator = torch.Generator().manual_seed(4)
    n, d, d_k = 8, 5, 4
    for _ in range(TRIALS):
        normalized = randn(generator, n, d)
        sigma = 0.5 + 1.5 * torch.rand(1, dtype=torch.float64, generator=generator).item()
        mu = randn(generator, d)
        raw = sigma * normalized + mu
        w_q, w_k = 0.5 * randn(generator, d, d_k), 0.5 * randn(generator, d, d_k)

        q, k = linear(raw, w_q), linear(raw, w_k)
        plain = softmax_rows(q @ k.T / np.sqrt(d_k))

        mu_q = linear(mu, w_q)
        tau1 = torch.tensor(sigma ** 2, dtype=torch.float64)
        delta1 = k @ mu_q
        compensated = softmax_rows(attention_scores(linear(normalized, w_q), linear(normalized, w_k), tau1, delta1))
        assert torch.allclose(plain, compensated, rtol=0.0, atol=1e-8)

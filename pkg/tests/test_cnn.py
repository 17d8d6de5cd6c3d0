import numpy as np
import pytest
import torch
from torch.utils.data import default_collate

from nsatp.autodiff.init import seeded_init_
from nsatp.exceptions import ConfigError, NonFiniteError, ShapeError
from nsatp.featurizers.stationarization import normalize
from nsatp.harness.gradcheck import tiny_cnn_config
from nsatp.networks.cnn import Cnn2dBlock, CnnArrivalModel, CnnModelConfig
from nsatp.networks.compensation import CnnCompensation, CompensationFactors
from nsatp.networks.layers import ConvEmbedding
from nsatp.transit.sample import DELAY_CHANNEL, MAX_DELAY_S, MIN_DELAY_S, REFERENCE_SCALES, TemporalSample


def collate(samples):
    return default_collate([sample.to_tensors() for sample in samples])


def random_batch(n, n_past=10, n_future=5, seed=0):
    generator = torch.Generator().manual_seed(seed)

    def uniform(low, high, *shape):
        return low + (high - low) * torch.rand(*shape, dtype=torch.float64, generator=generator)

    past = torch.stack([uniform(300.0, 900.0, n, n_past), uniform(40.0, 400.0, n, n_past),
                        uniform(MIN_DELAY_S, MAX_DELAY_S, n, n_past),
                        torch.randint(0, 2, (n, n_past), generator=generator).double(),
                        uniform(40.0, 400.0, n, n_past)], dim=-1)
    context = torch.randint(0, 2, (n, n_past + n_future, 2), generator=generator).double()
    schedule = 30000.0 + 100.0 * torch.arange(1, n_future + 1, dtype=torch.float64).expand(n, n_future)
    return {"past_features": past, "context": context, "future_schedule": schedule}


def test_fresh_compensation_is_identity(samples):
    model = CnnArrivalModel(CnnModelConfig())
    batch = collate(samples[:8])
    normalized, stats = normalize(batch["past_features"])
    comp = model.estimate_compensation(batch["past_features"], stats)
    assert torch.equal(comp.tau, torch.ones(8, dtype=torch.float64))
    assert torch.equal(comp.delta, torch.zeros(8, 15, 16, dtype=torch.float64))


def test_tau_is_positive():
    comp = seeded_init_(CnnCompensation(10, 15, 8, hidden=16), seed=1, respect_init=False)
    batch = random_batch(1000, seed=1)
    _, stats = normalize(batch["past_features"])
    factors = comp(batch["past_features"], stats)
    assert bool((factors.tau > 0).all())
    assert factors.delta.shape == (1000, 15, 8)


def mlp_reference(mlp, x):
    weights = [w.detach().numpy() for w in mlp.weights]
    biases = [b.detach().numpy() for b in mlp.biases]
    for i, (weight, bias) in enumerate(zip(weights, biases)):
        x = x @ weight + bias
        if i < len(weights) - 1:
            x = np.maximum(x, 0.0)
    return x


def test_compensation_matches_reference():
    comp = seeded_init_(CnnCompensation(4, 6, 4, hidden=8), seed=0, respect_init=False)
    batch = random_batch(3, n_past=4, n_future=2, seed=2)
    _, stats = normalize(batch["past_features"])
    with torch.no_grad():
        factors = comp(batch["past_features"], stats)
    raw = batch["past_features"].numpy() / REFERENCE_SCALES
    sigma_inputs = np.concatenate([raw.reshape(3, -1), stats.sigma.numpy() / REFERENCE_SCALES], axis=1)
    mu_inputs = np.concatenate([raw.reshape(3, -1), stats.mu.numpy() / REFERENCE_SCALES], axis=1)
    assert np.allclose(factors.tau.numpy(), np.exp(mlp_reference(comp.log_tau, sigma_inputs)[:, 0]),
                       rtol=1e-12, atol=0.0)
    assert np.allclose(factors.delta.numpy(), mlp_reference(comp.delta, mu_inputs).reshape(3, 6, 4),
                       rtol=0.0, atol=1e-12)


def test_embedding_of_zeros_is_bias():
    embedding = seeded_init_(ConvEmbedding(7, 4), seed=0)
    out = embedding(torch.zeros(15, 7, dtype=torch.float64))
    assert torch.equal(out, embedding.bias.detach().expand(15, 4))


def test_embedding_is_affine():
    embedding = seeded_init_(ConvEmbedding(7, 4), seed=0)
    x = torch.randn(15, 7, dtype=torch.float64)
    zero = embedding(torch.zeros(15, 7, dtype=torch.float64))
    assert torch.allclose(embedding(2.5 * x) - zero, 2.5 * (embedding(x) - zero), atol=1e-12)


def test_zero_kernels_give_residual():
    block = Cnn2dBlock(d_model=4, k=2, n_kernels=2)
    with torch.no_grad():
        for param in block.parameters():
            param.zero_()
    x = torch.randn(3, 12, 4, dtype=torch.float64)
    assert torch.allclose(block(x), x, rtol=0.0, atol=1e-14)


def test_block_keeps_shape():
    block = seeded_init_(Cnn2dBlock(d_model=4, k=3, n_kernels=3), seed=0)
    for length in (12, 15, 20):
        assert block(torch.randn(2, length, 4, dtype=torch.float64)).shape == (2, length, 4)


@pytest.mark.parametrize("placement", ["after_last_block", "inside_each_block"])
def test_fresh_model_equals_base_model(samples, placement):
    nsatp = CnnArrivalModel(CnnModelConfig(seed=3, placement=placement))
    base = CnnArrivalModel(CnnModelConfig(seed=3, placement=placement, compensation=False))
    batch = collate(samples[:100])
    with torch.no_grad():
        assert torch.equal(nsatp(batch)["arrival"], base(batch)["arrival"])


def test_placement_matters_once_trained():
    batch = random_batch(4, n_past=4, n_future=2, seed=3)
    outputs = []
    for placement in ("after_last_block", "inside_each_block"):
        model = CnnArrivalModel(tiny_cnn_config(n_blocks=2, placement=placement))
        seeded_init_(model, 0, respect_init=False)
        with torch.no_grad():
            outputs.append(model(batch)["delay"])
    assert not torch.allclose(outputs[0], outputs[1])


def test_zero_delay_prediction_is_schedule(samples):
    model = CnnArrivalModel(CnnModelConfig())
    with torch.no_grad():
        model.projection.weight.zero_()
        model.projection.bias.zero_()
    sample = TemporalSample.from_json(samples[0].to_json())
    sample.past_features[:, DELAY_CHANNEL] = 0.0
    out = model(sample.to_tensors())
    assert torch.equal(out["delay"], torch.zeros(5, dtype=torch.float64))
    assert np.array_equal(model.predict(sample), sample.future_schedule)


def test_arrival_is_schedule_plus_delay(samples):
    model = CnnArrivalModel(CnnModelConfig(seed=1))
    batch = collate(samples[:20])
    with torch.no_grad():
        out = model(batch)
    assert torch.equal(out["arrival"], batch["future_schedule"] + out["delay"])
    assert out["stats"].mu.shape == (20, 5)


def test_prediction_does_not_depend_on_batch(samples):
    model = CnnArrivalModel(CnnModelConfig(seed=2, n_kernels=3))
    with torch.no_grad():
        batched = model(collate(samples[:12]))["delay"]
        for i in (0, 5, 11):
            assert torch.allclose(model(samples[i].to_tensors())["delay"], batched[i], rtol=0.0, atol=1e-9)


def test_single_sample_output(samples):
    model = CnnArrivalModel(CnnModelConfig())
    with torch.no_grad():
        out = model(samples[0].to_tensors())
    assert out["arrival"].shape == (5,)
    assert out["stats"].sigma.shape == (5,)


def rescale_delays(batch, scale, shift):
    past = batch["past_features"].clone()
    past[..., DELAY_CHANNEL] = scale * past[..., DELAY_CHANNEL] + shift
    return {**batch, "past_features": past}


def test_base_model_is_affine_equivariant_in_delay():
    model = CnnArrivalModel(tiny_cnn_config(seed=4, compensation=False))
    seeded_init_(model, 4, respect_init=False)
    batch = random_batch(3, n_past=4, n_future=2, seed=4)
    with torch.no_grad():
        delay = model(batch)["delay"]
        moved = model(rescale_delays(batch, 3.0, 40.0))["delay"]
    assert torch.allclose(moved, 3.0 * delay + 40.0, rtol=1e-9, atol=1e-8)


def test_compensation_breaks_equivariance():
    model = CnnArrivalModel(tiny_cnn_config(seed=4))
    seeded_init_(model, 4, respect_init=False)
    batch = random_batch(3, n_past=4, n_future=2, seed=4)
    with torch.no_grad():
        delay = model(batch)["delay"]
        moved = model(rescale_delays(batch, 3.0, 40.0))["delay"]
    assert not torch.allclose(moved, 3.0 * delay + 40.0, rtol=1e-6, atol=1e-6)


def test_long_horizon():
    model = CnnArrivalModel(CnnModelConfig(n_future=10, n_kernels=3))
    with torch.no_grad():
        out = model(random_batch(4, n_future=10))
    assert out["arrival"].shape == (4, 10)


def test_outputs_are_finite():
    model = CnnArrivalModel(CnnModelConfig(d_model=8, n_kernels=3, seed=2))
    seeded_init_(model, 2, respect_init=False)
    with torch.no_grad():
        out = model(random_batch(1000, seed=5))
    assert bool(torch.isfinite(out["arrival"]).all())


def test_without_stationarization_uses_global_scale():
    scale = [500.0, 50.0, 40.0, 1.0, 60.0]
    model = CnnArrivalModel(CnnModelConfig(stationarize=False, global_scale=scale))
    batch = random_batch(2)
    with torch.no_grad():
        out = model(batch)
    assert torch.equal(out["stats"].mu, torch.zeros(2, 5, dtype=torch.float64))
    assert torch.equal(out["stats"].sigma, torch.tensor(scale, dtype=torch.float64).expand(2, 5))


def test_input_checks(samples):
    model = CnnArrivalModel(CnnModelConfig())
    batch = collate(samples[:2])
    with pytest.raises(ShapeError, match="shape"):
        model({**batch, "past_features": batch["past_features"][:, :9]})
    with pytest.raises(ShapeError):
        model({**batch, "context": batch["context"][:, :14]})
    bad = batch["past_features"].clone()
    bad[0, 0, 0] = float("nan")
    with pytest.raises(NonFiniteError):
        model({**batch, "past_features": bad})


def test_config_validation():
    with pytest.raises(ConfigError):
        CnnModelConfig(placement="between_blocks").validate()
    with pytest.raises(ConfigError):
        CnnModelConfig(k=8).validate()
    with pytest.raises(ConfigError):
        CnnModelConfig.from_json({"d_model": 8, "width": 3})
    config = CnnModelConfig.from_json(CnnModelConfig(d_model=8).to_json())
    assert config.d_model == 8 and config.seq_len == 15


def test_backbone_applies_estimated_compensation(monkeypatch):
    config = tiny_cnn_config(seed=4, compensation=False)
    model = CnnArrivalModel(config)
    batch = random_batch(3, config.n_past, config.n_future, seed=5)
    _, stats = normalize(batch["past_features"])
    x = torch.randn(3, config.seq_len, config.d_model, dtype=torch.float64)
    factors = CompensationFactors(torch.zeros(3, dtype=torch.float64),
                                  torch.ones(3, config.seq_len, config.d_model, dtype=torch.float64))
    monkeypatch.setattr(model, "estimate_compensation", lambda raw_past, stats: factors)
    with torch.no_grad():
        assert torch.equal(model.backbone(x, batch["past_features"], stats), factors.delta)

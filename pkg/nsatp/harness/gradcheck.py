"""
Full finite-difference suite: every differentiable op, the network building blocks and both
tiny end-to-end models (d_model=4, T=6)
"""
import logging
import time
from typing import Iterator, List

import torch

from nsatp.autodiff.gradcheck import (MODEL_RTOL, OP_RTOL, GradcheckResult, GradCase, check_module_gradients,
                                      op_cases, run_case)
from nsatp.autodiff.init import seeded_init_
from nsatp.autodiff.ops import DTYPE
from nsatp.featurizers.stationarization import normalize
from nsatp.networks.cnn import Cnn2dBlock, CnnArrivalModel, CnnModelConfig
from nsatp.networks.layers import ConvEmbedding
from nsatp.networks.periodic import with_fixed_periods
from nsatp.networks.swin import (SwinArrivalModel, SwinBlock, SwinModelConfig, destationary_attention,
                                 window_combine, window_partition)
from nsatp.transit.dataset import slice_samples
from nsatp.transit.sample import TemporalSample
from nsatp.transit.simulator import DelayProcessParams, make_route, simulate_day

logger = logging.getLogger(__name__)


def tiny_cnn_config(**overrides) -> CnnModelConfig:
    params = dict(n_past=4, n_future=2, d_model=4, n_blocks=1, k=2, n_kernels=2, mlp_hidden=8)
    params.update(overrides)
    return CnnModelConfig(**params)


def tiny_swin_config(**overrides) -> SwinModelConfig:
    params = dict(n_past=4, n_future=2, d_model=4, n_blocks=1, k=2, window=2, mlp_ratio=2, mlp_hidden=8)
    params.update(overrides)
    return SwinModelConfig(**params)


def tiny_sample(n_past: int = 4, n_future: int = 2, seed: int = 0) -> TemporalSample:
    route = make_route(n_past + n_future + 2, seed=seed)
    day = simulate_day(route, DelayProcessParams(seed=seed), 0)
    return slice_samples([day], n_past, n_future).samples[0]


def network_cases(seed: int = 0) -> Iterator[GradCase]:
    generator = torch.Generator().manual_seed(seed)

    def rand(*shape):
        return torch.randn(*shape, dtype=DTYPE, generator=generator).requires_grad_(True)

    yield "normalize_affine", lambda x, g, b: normalize(x)[0] * g + b, (rand(6, 3), rand(3), rand(3))
    yield "destationary_attention", lambda q, k, v, tau, delta: destationary_attention(q, k, v, tau, delta), \
        (rand(4, 3), rand(4, 3), rand(4, 3), (torch.rand(1, dtype=DTYPE, generator=generator)[0] + 0.5)
         .requires_grad_(True), rand(4))
    yield "window_partition", lambda x: window_combine(window_partition(x, 2, True) ** 2, 3, 5, 2, True), \
        (rand(3, 5, 2),)

    embedding = seeded_init_(ConvEmbedding(3, 4), seed)
    names = [name for name, _ in embedding.named_parameters()]
    yield "embedding", lambda x, *params: torch.func.functional_call(embedding, dict(zip(names, params)), (x,)), \
        (rand(6, 3),) + tuple(p.detach().clone().requires_grad_(True) for p in embedding.parameters())

    cnn_block = seeded_init_(Cnn2dBlock(d_model=3, k=2, n_kernels=2), seed)
    yield "block_2d_cnn", with_fixed_periods(cnn_block), (rand(1, 6, 3),)
    swin_block = seeded_init_(SwinBlock(tiny_swin_config(d_model=3)), seed)
    yield "swin_block", with_fixed_periods(swin_block), (rand(1, 6, 3),)


def model_results(seed: int = 0) -> List[GradcheckResult]:
    """
    Gradients of the normalized delay predictions with respect to every parameter of both tiny models. Zero
    initialised output layers are randomised so the compensation networks carry gradient. Period decompositions are
    held at the reference point.
    """
    sample = tiny_sample(seed=seed)
    results = []
    for name, model in (("nsatp_cnn", CnnArrivalModel(tiny_cnn_config(seed=seed))),
                        ("nsatp_swin", SwinArrivalModel(tiny_swin_config(seed=seed)))):
        seeded_init_(model, seed, respect_init=False)
        start = time.perf_counter()
        passed = check_module_gradients(model, (sample.to_tensors(),), lambda out: out["delay_norm"], MODEL_RTOL,
                                        wrap=with_fixed_periods)
        n_params = sum(p.numel() for p in model.parameters())
        results.append(GradcheckResult(name, bool(passed), n_params, time.perf_counter() - start))
    return results


def run_suite(seed: int = 0, models: bool = True) -> List[GradcheckResult]:
    results = [run_case(name, fn, inputs, OP_RTOL) for name, fn, inputs in op_cases(seed)]
    results += [run_case(name, fn, inputs, OP_RTOL) for name, fn, inputs in network_cases(seed)]
    if models:
        results += model_results(seed)
    for result in results:
        log = logger.info if result.passed else logger.error
        log("gradcheck %-24s %s (%d inputs, %.2f s)", result.name, "ok" if result.passed else "FAILED",
            result.n_inputs, result.seconds)
    return results

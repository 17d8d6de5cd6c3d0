"""
Finite-difference verification of the reverse pass, built on torch.autograd.gradcheck (central
differences). Ops are checked at a relative tolerance of 1e-4, whole models at 1e-3.
"""
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterator, Sequence, Tuple

import torch
import torch.nn as nn
from torch.func import functional_call

from nsatp.autodiff.ops import (DTYPE, conv1d, conv2d, layer_norm, linear, mlp_forward, mse_loss, relu,
                                softmax_rows)
from nsatp.featurizers.spectral import fold_2d, unfold_1d, weighted_recombine

EPS = 1e-5
OP_RTOL = 1e-4
MODEL_RTOL = 1e-3
ATOL = 1e-7

GradCase = Tuple[str, Callable, Tuple[torch.Tensor, ...]]


@dataclass
class GradcheckResult:
    name: str
    passed: bool
    n_inputs: int
    seconds: float

    def to_json(self) -> dict:
        return asdict(self)


def check_gradients(fn: Callable, inputs: Sequence[torch.Tensor], rtol: float = OP_RTOL, eps: float = EPS,
                    atol: float = ATOL) -> bool:
    return torch.autograd.gradcheck(fn, tuple(inputs), eps=eps, atol=atol, rtol=rtol, raise_exception=False)


def check_module_gradients(module: nn.Module, args: tuple, output: Callable, rtol: float = MODEL_RTOL,
                           wrap: Callable = None) -> bool:
    """
    Checks the gradient of ``output(module(*args))`` with respect to every parameter of ``module``. ``wrap``, when
    given, decorates the function handed to gradcheck.
    """
    names = [name for name, _ in module.named_parameters()]
    params = [param.detach().clone().requires_grad_(True) for _, param in module.named_parameters()]

    def fn(*tensors):
        return output(functional_call(module, dict(zip(names, tensors)), args))

    return check_gradients(fn if wrap is None else wrap(fn), params, rtol=rtol)


def run_case(name: str, fn: Callable, inputs: Sequence[torch.Tensor], rtol: float = OP_RTOL) -> GradcheckResult:
    start = time.perf_counter()
    passed = check_gradients(fn, inputs, rtol=rtol)
    return GradcheckResult(name, bool(passed), sum(t.numel() for t in inputs), time.perf_counter() - start)


def away_from_kinks(x: torch.Tensor, margin: float = 1e-2) -> torch.Tensor:
    """
    Pushes entries at least ``margin`` away from zero, where ReLU has no derivative
    """
    return torch.where(x >= 0, x + margin, x - margin)


def op_cases(seed: int = 0) -> Iterator[GradCase]:
    generator = torch.Generator().manual_seed(seed)

    def rand(*shape):
        return torch.randn(*shape, dtype=DTYPE, generator=generator).requires_grad_(True)

    yield "linear", linear, (rand(3, 4), rand(4, 2), rand(2))
    yield "conv1d", conv1d, (rand(7, 2), rand(3, 2, 3), rand(3))
    yield "conv2d", conv2d, (rand(4, 5, 2), rand(3, 3, 2, 2), rand(2))
    yield "relu", relu, (away_from_kinks(rand(3, 4)).detach().requires_grad_(True),)
    yield "softmax_rows", softmax_rows, (rand(3, 4),)
    yield "layer_norm", layer_norm, (rand(3, 4), rand(4), rand(4))
    yield "mlp_forward", lambda x, w1, b1, w2, b2: mlp_forward(x, [(w1, b1), (w2, b2)]), \
        (rand(2, 3), rand(3, 4), rand(4), rand(4, 2), rand(2))
    yield "mse_loss", mse_loss, (rand(2, 5), rand(2, 5))
    yield "dft", lambda x: torch.view_as_real(torch.fft.fft(x, dim=0)), (rand(8, 2),)
    yield "fold_unfold", lambda x: unfold_1d(fold_2d(x, 3, 3) ** 2, 7), (rand(7, 2),)
    amplitudes = torch.tensor([0.3, 1.2], dtype=DTYPE)
    yield "weighted_recombine", lambda a, b: weighted_recombine([a, b], amplitudes), (rand(6, 3), rand(6, 3))


def run_op_suite(seed: int = 0) -> list:
    return [run_case(name, fn, inputs) for name, fn, inputs in op_cases(seed)]

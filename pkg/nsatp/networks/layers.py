"""
Parameterised building blocks shared by the CNN and shifted-window backbones
"""
from typing import Sequence

import torch
import torch.nn as nn

from nsatp.autodiff.init import make_parameter
from nsatp.autodiff.ops import conv1d, conv2d, layer_norm, linear, mlp_forward, relu


class Mlp(nn.Module):
    """
    Feed-forward network, ReLU between layers and a linear output layer.

    Args:
        input_size: width of the input
        layers: list of ints, hidden widths followed by the output width
        zero_output: start with a zero output layer so the network initially returns 0
    """

    def __init__(self, input_size: int, layers: Sequence[int], zero_output: bool = False):
        super().__init__()
        sizes = [input_size] + list(layers)
        last = len(layers) - 1
        self.weights = nn.ParameterList([
            make_parameter(sizes[i], sizes[i + 1], init="zeros" if zero_output and i == last else "uniform")
            for i in range(len(layers))
        ])
        self.biases = nn.ParameterList([
            make_parameter(sizes[i + 1], fan_in=sizes[i], init="zeros" if zero_output and i == last else "uniform")
            for i in range(len(layers))
        ])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return mlp_forward(x, list(zip(self.weights, self.biases)))


class Linear(nn.Module):
    def __init__(self, d_in: int, d_out: int, bias: bool = True):
        super().__init__()
        self.weight = make_parameter(d_in, d_out)
        self.bias = make_parameter(d_out, fan_in=d_in) if bias else None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return linear(x, self.weight, self.bias)


class LayerNorm(nn.Module):
    def __init__(self, d_model: int):
        super().__init__()
        self.gain = make_parameter(d_model, init="ones")
        self.bias = make_parameter(d_model, init="zeros")

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return layer_norm(x, self.gain, self.bias)


class ConvEmbedding(nn.Module):
    """
    Token embedding: a same-padded 1D convolution from the input channels to d_model
    """

    def __init__(self, c_in: int, d_model: int, kernel_size: int = 3):
        super().__init__()
        self.kernel = make_parameter(kernel_size, c_in, d_model)
        self.bias = make_parameter(d_model, fan_in=kernel_size * c_in)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return conv1d(x, self.kernel, self.bias)


class Inception2d(nn.Module):
    """
    Parallel same-padded 2D convolutions with square kernels of size 1, 3, ..., 2 * n_kernels - 1 whose outputs
    are averaged, so the channel count is the only thing the layer changes
    """

    def __init__(self, c_in: int, c_out: int, n_kernels: int):
        super().__init__()
        self.kernels = nn.ParameterList([make_parameter(2 * i + 1, 2 * i + 1, c_in, c_out) for i in range(n_kernels)])
        self.biases = nn.ParameterList([
            make_parameter(c_out, fan_in=(2 * i + 1) ** 2 * c_in) for i in range(n_kernels)
        ])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = conv2d(x, self.kernels[0], self.biases[0])
        for kernel, bias in zip(self.kernels[1:], self.biases[1:]):
            out = out + conv2d(x, kernel, bias)
        return out / len(self.kernels)


class InceptionPair(nn.Module):
    """
    Two inception layers d_model -> d_model with a ReLU in between
    """

    def __init__(self, d_model: int, n_kernels: int):
        super().__init__()
        self.first = Inception2d(d_model, d_model, n_kernels)
        self.second = Inception2d(d_model, d_model, n_kernels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.second(relu(self.first(x)))

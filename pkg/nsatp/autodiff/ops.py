"""
Differentiable primitives used by both backbones. Tensors are float64 torch tensors laid out
channel-last (time, [width,] channels) with optional leading batch axes; gradients come from
torch autograd.
"""
from typing import Optional, Sequence, Tuple

import torch
import torch.nn.functional as F

from nsatp.exceptions import GraphConsumedError, NonFiniteError, ShapeError

DTYPE = torch.float64


def check_finite(*tensors: Optional[torch.Tensor]) -> None:
    for tensor in tensors:
        if tensor is not None and not bool(torch.isfinite(tensor).all()):
            raise NonFiniteError("non-finite input")


def linear(x: torch.Tensor, weight: torch.Tensor, bias: Optional[torch.Tensor] = None) -> torch.Tensor:
    """
    Affine map x @ W + b

    Args:
        x: ... x d_in
        weight: d_in x d_out
        bias: d_out or None

    Returns:
        y: ... x d_out
    """
    if weight.dim() != 2 or x.shape[-1] != weight.shape[0]:
        raise ShapeError(f"shape: cannot project {tuple(x.shape)} with weight {tuple(weight.shape)}")
    out = torch.matmul(x, weight)
    if bias is not None:
        if bias.shape != (weight.shape[1],):
            raise ShapeError(f"shape: bias {tuple(bias.shape)} does not match weight {tuple(weight.shape)}")
        out = out + bias
    return out


def _check_odd(*sizes: int) -> None:
    if any(size % 2 == 0 for size in sizes):
        raise ValueError("kernel must be odd for same padding")


def conv1d(x: torch.Tensor, kernels: torch.Tensor, bias: Optional[torch.Tensor] = None) -> torch.Tensor:
    """
    Same-padded 1D convolution, Y[t] = sum_k X[t + k - M//2] h[k], zero fill at the borders

    Args:
        x: ... x T x C_in
        kernels: M x C_in x C_out with M odd
        bias: C_out or None

    Returns:
        y: ... x T x C_out
    """
    size, c_in, c_out = kernels.shape
    _check_odd(size)
    if x.shape[-1] != c_in:
        raise ShapeError(f"shape: input has {x.shape[-1]} channels, kernels expect {c_in}")
    lead, length = x.shape[:-2], x.shape[-2]
    flat = x.reshape(-1, length, c_in).transpose(1, 2)
    out = F.conv1d(flat, kernels.permute(2, 1, 0), bias, padding=size // 2)
    return out.transpose(1, 2).reshape(*lead, length, c_out)


def conv2d(x: torch.Tensor, kernels: torch.Tensor, bias: Optional[torch.Tensor] = None) -> torch.Tensor:
    """
    Same-padded 2D convolution over an image-like tensor

    Args:
        x: ... x H x W x C_in
        kernels: M x N x C_in x C_out with M, N odd
        bias: C_out or None

    Returns:
        y: ... x H x W x C_out
    """
    height_k, width_k, c_in, c_out = kernels.shape
    _check_odd(height_k, width_k)
    if x.shape[-1] != c_in:
        raise ShapeError(f"shape: input has {x.shape[-1]} channels, kernels expect {c_in}")
    lead, height, width = x.shape[:-3], x.shape[-3], x.shape[-2]
    flat = x.reshape(-1, height, width, c_in).permute(0, 3, 1, 2)
    out = F.conv2d(flat, kernels.permute(3, 2, 0, 1), bias, padding=(height_k // 2, width_k // 2))
    return out.permute(0, 2, 3, 1).reshape(*lead, height, width, c_out)


def relu(x: torch.Tensor) -> torch.Tensor:
    check_finite(x)
    return torch.relu(x)


def softmax_rows(x: torch.Tensor) -> torch.Tensor:
    check_finite(x)
    return torch.softmax(x, dim=-1)


def layer_norm(x: torch.Tensor, gain: torch.Tensor, bias: torch.Tensor, eps: float = 1e-5) -> torch.Tensor:
    if gain.shape != (x.shape[-1],) or bias.shape != gain.shape:
        raise ShapeError(f"shape: layer norm parameters {tuple(gain.shape)} for input {tuple(x.shape)}")
    return F.layer_norm(x, (x.shape[-1],), gain, bias, eps)


def mlp_forward(x: torch.Tensor, layers: Sequence[Tuple[torch.Tensor, torch.Tensor]]) -> torch.Tensor:
    """
    Feed-forward network with ReLU between layers and a linear output layer
    """
    for i, (weight, bias) in enumerate(layers):
        x = linear(x, weight, bias)
        if i < len(layers) - 1:
            x = relu(x)
    return x


def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    if pred.shape != target.shape:
        raise ShapeError(f"shape: prediction {tuple(pred.shape)} vs target {tuple(target.shape)}")
    return F.mse_loss(pred, target)


def backward(loss: torch.Tensor, inputs: Sequence[torch.Tensor] = None):
    """
    Reverse pass from a scalar loss. A loss can be differentiated once; run the forward pass
    again before the next call.

    Returns:
        grads: gradients of ``inputs`` when given, otherwise None
    """
    if loss.numel() != 1:
        raise ShapeError(f"shape: backward needs a scalar loss, got {tuple(loss.shape)}")
    if getattr(loss, "_consumed", False):
        raise GraphConsumedError("backward already ran on this graph; repeat the forward pass first")
    try:
        loss.backward()
    except RuntimeError as ex:
        if "second time" in str(ex):
            raise GraphConsumedError("backward already ran on this graph; repeat the forward pass first") from ex
        raise
    loss._consumed = True
    if inputs is not None:
        return [tensor.grad for tensor in inputs]

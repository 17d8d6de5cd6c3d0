"""
Period discovery with the discrete Fourier transform and the 1D <-> 2D reshaping that turns a
length-T sequence into an f x p image-like tensor per dominant period.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import torch

Array = Union[np.ndarray, torch.Tensor]


@dataclass
class PeriodDecomposition:
    freqs: np.ndarray
    periods: np.ndarray
    amplitudes: np.ndarray

    @property
    def k(self) -> int:
        return self.freqs.shape[-1]


def _as_tensor(x: Array) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x
    return torch.as_tensor(np.asarray(x, dtype=np.float64))


def dft(x: Array) -> torch.Tensor:
    """
    Discrete Fourier transform along the first axis, Y[k] = sum_t x[t] exp(-2 pi i k t / T)
    """
    x = _as_tensor(x)
    if x.dim() == 0 or x.shape[0] == 0:
        raise ValueError("dft needs at least one sample")
    return torch.fft.fft(x, dim=0)


def amplitude_spectrum(x: torch.Tensor) -> torch.Tensor:
    """
    Mean DFT magnitude over channels for frequencies 1..T//2 of a ... x T x d_model tensor.
    The result carries no gradient.
    """
    x = _as_tensor(x).detach()
    spectrum = torch.abs(torch.fft.fft(x, dim=-2)).mean(dim=-1)
    return spectrum[..., 1:x.shape[-2] // 2 + 1]


def top_k_periods(x: Array, k: int) -> PeriodDecomposition:
    """
    Selects the k strongest non-DC frequencies of a T x d_model sequence (or of every
    sequence in a batch), ties going to the lower frequency

    Args:
        x: ... x T x d_model sequence
        k: number of periods, 1 <= k < T/2

    Returns:
        decomposition: frequencies f_i, periods ceil(T / f_i) and amplitudes, each ... x k
    """
    x = _as_tensor(x)
    if x.dim() == 1:
        x = x.unsqueeze(-1)
    length = x.shape[-2]
    if not 1 <= k < length / 2:
        raise ValueError(f"k={k} out of range for a sequence of length {length}, need 1 <= k < T/2")
    amplitudes = amplitude_spectrum(x).cpu().numpy()
    order = np.argsort(-amplitudes, axis=-1, kind="stable")[..., :k]
    freqs = order + 1
    periods = np.ceil(length / freqs).astype(np.int64)
    return PeriodDecomposition(freqs=freqs, periods=periods, amplitudes=np.take_along_axis(amplitudes, order, -1))


def fold_2d(x: torch.Tensor, f: int, p: int) -> torch.Tensor:
    """
    Row-major fold of a ... x T x d_model sequence into ... x f x p x d_model after zero
    padding the time axis to f * p
    """
    length = x.shape[-2]
    if f * p < length:
        raise ValueError(f"cannot fold {length} steps into a {f} x {p} grid")
    padded = torch.nn.functional.pad(x, (0, 0, 0, f * p - length))
    return padded.reshape(*x.shape[:-2], f, p, x.shape[-1])


def unfold_1d(x: torch.Tensor, length: int) -> torch.Tensor:
    """
    Inverse of fold_2d: flattens the grid row-major and drops the padding
    """
    f, p = x.shape[-3], x.shape[-2]
    if length > f * p:
        raise ValueError(f"a {f} x {p} grid holds fewer than {length} steps")
    return x.reshape(*x.shape[:-3], f * p, x.shape[-1])[..., :length, :]


def weighted_recombine(branches: Sequence[torch.Tensor], amplitudes: Array) -> torch.Tensor:
    """
    Softmax over the k period amplitudes, then the weighted sum of the k branch outputs

    Args:
        branches: k tensors of shape ... x T x d_model
        amplitudes: k amplitudes, or ... x k for a batch

    Returns:
        combined: ... x T x d_model
    """
    if len(branches) == 0:
        raise ValueError("weighted_recombine needs at least one branch")
    amplitudes = _as_tensor(amplitudes).to(branches[0].dtype)
    if amplitudes.shape[-1] != len(branches):
        raise ValueError(f"{len(branches)} branches but {amplitudes.shape[-1]} amplitudes")
    weights = torch.softmax(amplitudes, dim=-1)
    combined = weights[..., 0, None, None] * branches[0]
    for i in range(1, len(branches)):
        combined = combined + weights[..., i, None, None] * branches[i]
    return combined


def frequency_groups(freqs: np.ndarray) -> dict:
    """
    Groups batch indices by selected frequency so every group can be folded with one shape
    """
    groups = {}
    for index, freq in enumerate(np.asarray(freqs).tolist()):
        groups.setdefault(int(freq), []).append(index)
    return groups


def ceil_period(length: int, freq: int) -> int:
    return int(math.ceil(length / freq))

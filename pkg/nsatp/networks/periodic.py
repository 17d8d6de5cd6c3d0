"""
Shared 2D temporal-variation scaffold: pick the top-k periods of every sample, fold each sample
into an f x p grid, transform the grid and recombine the unfolded branches with softmax
amplitude weights. The amplitude weights carry no gradient.
"""
from contextlib import contextmanager
from typing import Callable, List, Optional

import torch

from nsatp.featurizers.spectral import (PeriodDecomposition, ceil_period, fold_2d, frequency_groups, top_k_periods,
                                        unfold_1d, weighted_recombine)

# branch(grid [b x f x p x d_model], sample indices [b]) -> grid of the same shape
BranchFn = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


class FixedPeriods:
    """
    Records the decomposition of every periodic_mix call during the first pass and replays them, in call order,
    on every later pass. Finite differences then see the frequencies and amplitude weights of the reference point.
    """

    def __init__(self):
        self.recorded: List[PeriodDecomposition] = []
        self.cursor: Optional[int] = None

    def start_pass(self) -> None:
        self.cursor = 0 if self.recorded else None

    def decomposition(self, x: torch.Tensor, k: int) -> PeriodDecomposition:
        if self.cursor is None:
            self.recorded.append(top_k_periods(x, k))
            return self.recorded[-1]
        decomposition = self.recorded[self.cursor]
        self.cursor += 1
        return decomposition


_fixed: Optional[FixedPeriods] = None


@contextmanager
def _replaying(periods: FixedPeriods):
    global _fixed
    previous, _fixed = _fixed, periods
    try:
        yield periods
    finally:
        _fixed = previous


def with_fixed_periods(fn: Callable) -> Callable:
    """
    Wraps fn so that its first call fixes the period decompositions used by all later calls
    """
    periods = FixedPeriods()

    def wrapped(*args):
        periods.start_pass()
        with _replaying(periods):
            return fn(*args)

    return wrapped


def periodic_mix(x: torch.Tensor, k: int, branch: BranchFn) -> torch.Tensor:
    """
    Args:
        x: B x T x d_model sequence
        k: number of periods per sample
        branch: transformation applied to the folded grid of one period

    Returns:
        mixed: B x T x d_model weighted sum of the k unfolded branch outputs
    """
    length = x.shape[-2]
    decomposition = top_k_periods(x, k) if _fixed is None else _fixed.decomposition(x, k)
    branches = []
    for i in range(k):
        parts, order = [], []
        # samples with the same frequency share one fold shape
        for freq, indices in frequency_groups(decomposition.freqs[:, i]).items():
            index = torch.tensor(indices, dtype=torch.long)
            grid = fold_2d(x[index], freq, ceil_period(length, freq))
            parts.append(unfold_1d(branch(grid, index), length))
            order.extend(indices)
        inverse = torch.argsort(torch.tensor(order, dtype=torch.long))
        branches.append(torch.cat(parts, dim=0)[inverse])
    return weighted_recombine(branches, decomposition.amplitudes)

from .stationarization import StationarizationStats, normalize, denormalize_delay, collision_score
from .spectral import PeriodDecomposition, dft, top_k_periods, fold_2d, unfold_1d, weighted_recombine

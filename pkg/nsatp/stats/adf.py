"""
Augmented Dickey-Fuller regression

    dy_t = alpha + beta * t + gamma * y_{t-1} + sum_{i=1..p} delta_i * dy_{t-i} + e_t

fitted by ordinary least squares for p = 0..max_lag on a common sample, p chosen by AIC and the
chosen regression refitted on the longest sample it allows. The statistic is gamma_hat / SE(gamma_hat);
more negative means more stationary. No critical values or p-values are computed.
"""
from dataclasses import asdict, dataclass

import numpy as np

from nsatp.exceptions import CollinearError, NonFiniteError, ShapeError

KINDS = ("none", "constant", "constant_and_trend")
N_DETERMINISTIC = {"none": 0, "constant": 1, "constant_and_trend": 2}
MIN_LENGTH = 20


@dataclass
class OlsFit:
    coef: np.ndarray
    std_errors: np.ndarray
    ssr: float
    nobs: int
    n_params: int

    @property
    def aic(self) -> float:
        return self.nobs * np.log(self.ssr / self.nobs) + 2 * self.n_params


@dataclass
class AdfResult:
    statistic: float
    gamma_hat: float
    lags: int
    aic: float
    regression_kind: str
    nobs: int

    def to_json(self) -> dict:
        return asdict(self)


def ols(design: np.ndarray, target: np.ndarray) -> OlsFit:
    """
    Least squares through the normal equations

    Args:
        design: n x k regressors
        target: n observations

    Returns:
        fit: coefficients, their standard errors and the residual sum of squares
    """
    design = np.asarray(design, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    nobs, n_params = design.shape
    if nobs <= n_params:
        raise ValueError(f"need more observations than regressors, got {nobs} <= {n_params}")
    if np.linalg.matrix_rank(design) < n_params:
        raise CollinearError("collinear design matrix")
    gram = design.T @ design
    coef = np.linalg.solve(gram, design.T @ target)
    residuals = target - design @ coef
    ssr = float(residuals @ residuals)
    if ssr <= 1e-24 * max(float(target @ target), 1.0):
        raise CollinearError("collinear: regressors reproduce the target exactly")
    sigma2 = ssr / (nobs - n_params)
    std_errors = np.sqrt(np.diag(np.linalg.inv(gram)) * sigma2)
    return OlsFit(coef, std_errors, ssr, nobs, n_params)


def adf_design(y: np.ndarray, lags: int, kind: str, start: int):
    """
    Regressors and target for rows t = start..n-2 of the differenced series. Column 0 is the lagged level.
    """
    dy = np.diff(y)
    rows = np.arange(start, len(dy))
    columns = [y[rows]]
    if kind in ("constant", "constant_and_trend"):
        columns.append(np.ones(len(rows)))
    if kind == "constant_and_trend":
        columns.append(rows + 1.0)
    columns += [dy[rows - i] for i in range(1, lags + 1)]
    return np.column_stack(columns), dy[rows]


def default_max_lag(n: int, kind: str) -> int:
    """
    floor(12 (n / 100)^(1/4)), capped so the largest regression keeps positive degrees of freedom
    """
    return max(0, min(int(np.floor(12.0 * (n / 100.0) ** 0.25)), n // 2 - N_DETERMINISTIC[kind] - 1))


def adf_test(y, max_lag: int = None, kind: str = "constant_and_trend", min_length: int = MIN_LENGTH) -> AdfResult:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ShapeError(f"shape: ADF needs a 1D series, got {y.shape}")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if len(y) < min_length:
        raise ValueError(f"series too short for ADF: n={len(y)} < {min_length}")
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("non-finite input")
    if max_lag is None:
        max_lag = default_max_lag(len(y), kind)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")

    aics = []
    for lags in range(max_lag + 1):
        design, target = adf_design(y, lags, kind, start=max_lag)
        aics.append(ols(design, target).aic)
    lags = int(np.argmin(aics))
    design, target = adf_design(y, lags, kind, start=lags)
    fit = ols(design, target)
    return AdfResult(statistic=float(fit.coef[0] / fit.std_errors[0]), gamma_hat=float(fit.coef[0]), lags=lags,
                     aic=float(fit.aic), regression_kind=kind, nobs=fit.nobs)


def adf_ratio(pred_sequence, truth_sequence, **adf_kwargs) -> float:
    """
    ADF statistic of the predicted full sequence over that of the true sequence. Values above 1 mean the prediction
    looks more stationary than the data.
    """
    pred_sequence = np.asarray(pred_sequence, dtype=np.float64)
    truth_sequence = np.asarray(truth_sequence, dtype=np.float64)
    if pred_sequence.shape != truth_sequence.shape:
        raise ShapeError(f"shape: prediction {pred_sequence.shape} vs truth {truth_sequence.shape}")
    truth = adf_test(truth_sequence, **adf_kwargs).statistic
    if abs(truth) < 1e-9:
        raise ValueError("ill-conditioned ratio")
    return adf_test(pred_sequence, **adf_kwargs).statistic / truth

import numpy as np
import pytest

from nsatp.exceptions import CollinearError, NonFiniteError, ShapeError
from nsatp.stats import adf
from nsatp.stats.adf import adf_ratio, adf_test, default_max_lag, ols

# 1% critical value of the constant-and-trend statistic for n = 200
TREND_CRITICAL_1PCT = -3.96


def reference_adf(y, kind="constant_and_trend"):
    """
    Lag selection and t statistic rebuilt row by row with numpy.linalg.lstsq
    """
    dy = [y[t + 1] - y[t] for t in range(len(y) - 1)]

    def fit(lags, start):
        rows, target = [], []
        for r in range(start, len(dy)):
            row = [y[r]]
            if kind != "none":
                row.append(1.0)
            if kind == "constant_and_trend":
                row.append(r + 1.0)
            row += [dy[r - i] for i in range(1, lags + 1)]
            rows.append(row)
            target.append(dy[r])
        design, target = np.array(rows), np.array(target)
        coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
        residuals = target - design @ coef
        ssr = residuals @ residuals
        nobs, k = design.shape
        cov = np.linalg.pinv(design.T @ design) * ssr / (nobs - k)
        return coef[0] / np.sqrt(cov[0, 0]), nobs * np.log(ssr / nobs) + 2 * k

    max_lag = default_max_lag(len(y), kind)
    lags = int(np.argmin([fit(p, max_lag)[1] for p in range(max_lag + 1)]))
    return fit(lags, lags)[0], lags


def test_default_max_lag():
    assert default_max_lag(200, "constant_and_trend") == 14
    assert default_max_lag(20, "constant_and_trend") == 7
    assert default_max_lag(15, "constant_and_trend") == 4
    assert default_max_lag(4, "constant_and_trend") == 0


@pytest.mark.parametrize("seed", range(5))
def test_white_noise_is_stationary(seed):
    noise = np.random.default_rng(seed).normal(size=200)
    assert adf_test(noise, max_lag=0).statistic < -6.0
    long_noise = np.random.default_rng(seed).normal(size=1000)
    assert adf_test(long_noise).statistic < -6.0


@pytest.mark.parametrize("seed", range(5))
def test_random_walk_is_not_stationary(seed):
    walk = np.random.default_rng(seed).normal(size=200).cumsum()
    assert adf_test(walk).statistic > TREND_CRITICAL_1PCT
    assert adf_test(walk, kind="none").statistic > TREND_CRITICAL_1PCT


def test_matches_reference():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        y = np.zeros(60)
        for t in range(1, 60):
            y[t] = 0.7 * y[t - 1] + rng.normal()
        result = adf_test(y)
        statistic, lags = reference_adf(y)
        assert result.lags == lags
        assert abs(result.statistic - statistic) < 1e-6


def test_kinds_match_reference():
    y = np.random.default_rng(100).normal(size=40).cumsum()
    for kind in adf.KINDS:
        result = adf_test(y, kind=kind)
        statistic, _ = reference_adf(y, kind)
        assert result.regression_kind == kind
        assert abs(result.statistic - statistic) < 1e-6


def test_affine_invariance():
    y = np.random.default_rng(7).normal(size=80).cumsum()
    for kind in ("constant", "constant_and_trend"):
        assert abs(adf_test(3.0 * y + 7.0, kind=kind).statistic - adf_test(y, kind=kind).statistic) < 1e-8


def test_exact_trend_is_collinear():
    with pytest.raises(CollinearError, match="collinear"):
        adf_test(np.arange(30, dtype=np.float64))


def test_input_checks():
    with pytest.raises(ValueError):
        adf_test(np.random.default_rng(0).normal(size=10))
    assert adf_test(np.random.default_rng(0).normal(size=10), min_length=10).nobs > 0
    with pytest.raises(ValueError):
        adf_test(np.zeros(30), kind="drift")
    with pytest.raises(ShapeError):
        adf_test(np.zeros((30, 2)))
    y = np.random.default_rng(0).normal(size=30)
    y[4] = np.nan
    with pytest.raises(NonFiniteError):
        adf_test(y)


def test_ols_matches_lstsq():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        design, target = rng.normal(size=(30, 4)), rng.normal(size=30)
        fit = ols(design, target)
        coef, residual, _, _ = np.linalg.lstsq(design, target, rcond=None)
        assert np.allclose(fit.coef, coef, rtol=0.0, atol=1e-8)
        assert abs(fit.ssr - residual[0]) < 1e-8
        cov = np.linalg.pinv(design.T @ design) * residual[0] / 26
        assert np.allclose(fit.std_errors, np.sqrt(np.diag(cov)), rtol=0.0, atol=1e-8)


def test_ols_collinear_design():
    design = np.random.default_rng(0).normal(size=(20, 2))
    design = np.column_stack([design, design[:, 0] + design[:, 1]])
    with pytest.raises(CollinearError):
        ols(design, np.random.default_rng(1).normal(size=20))
    assert issubclass(CollinearError, np.linalg.LinAlgError)
    with pytest.raises(ValueError):
        ols(np.ones((3, 3)), np.ones(3))


def ar_series(seed, n=200, coeff=0.5):
    rng = np.random.default_rng(seed)
    y = np.zeros(n)
    for t in range(1, n):
        y[t] = coeff * y[t - 1] + rng.normal()
    return y


def test_ratio_of_identical_sequences():
    y = ar_series(0)
    assert adf_ratio(y, y) == 1.0


def test_ratio_direction():
    walk = np.random.default_rng(1).normal(size=200).cumsum()
    noisy = walk + 5.0 * np.random.default_rng(2).normal(size=200)
    assert adf_ratio(noisy, walk) > 1.0
    series = ar_series(3)
    smooth = np.convolve(series, np.ones(3) / 3.0, mode="same")
    assert adf_ratio(smooth, series) < 1.0


def test_ratio_shape_mismatch():
    with pytest.raises(ShapeError):
        adf_ratio(np.zeros(30), np.zeros(31))


def test_ratio_ill_conditioned(monkeypatch):
    def zero_statistic(y, **kwargs):
        return adf.AdfResult(0.0, 0.0, 0, 0.0, "constant_and_trend", len(y))

    monkeypatch.setattr(adf, "adf_test", zero_statistic)
    with pytest.raises(ValueError, match="ill-conditioned ratio"):
        adf_ratio(np.ones(30), np.ones(30))

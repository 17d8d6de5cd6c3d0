from .adf import AdfResult, OlsFit, adf_test, adf_ratio, ols
from .metrics import MetricsReport, HorizonMetrics, metrics

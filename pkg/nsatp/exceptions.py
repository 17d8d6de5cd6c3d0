"""
Exception types raised across nsatp. Each one also derives from the builtin that callers
would naturally catch, so plain ``except ValueError`` keeps working.
"""

import numpy as np


class NsatpError(Exception):
    pass


class ConfigError(NsatpError, ValueError):
    pass


class ShapeError(NsatpError, ValueError):
    def __init__(self, message: str = "shape mismatch"):
        if "shape" not in message:
            message = f"shape: {message}"
        super().__init__(message)


class NonFiniteError(NsatpError, ValueError):
    def __init__(self, message: str = "non-finite input"):
        super().__init__(message)


class DivergenceError(NsatpError, FloatingPointError):
    def __init__(self, message: str = "diverged", report=None):
        super().__init__(message)
        self.report = report


class CollinearError(NsatpError, np.linalg.LinAlgError):
    def __init__(self, message: str = "collinear design matrix"):
        super().__init__(message)


class GraphConsumedError(NsatpError, RuntimeError):
    pass


class DatasetError(NsatpError, OSError):
    pass


class CheckpointError(NsatpError, OSError):
    pass

from typing import Optional


class AsnRtfError(Exception):
    """Base class for every error raised by the package."""


class LayoutError(AsnRtfError):
    pass


class NotHermitianError(AsnRtfError):
    pass


class DefinitenessError(AsnRtfError):
    def __init__(self, message: str, node: Optional[int] = None):
        super().__init__(message)
        self.node = node


class EigenSolverError(AsnRtfError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NormalizationError(AsnRtfError):
    pass


class IdentifiabilityError(AsnRtfError):
    pass


class CovarianceEstimationError(AsnRtfError):
    def __init__(self, message: str, bin_index: Optional[int] = None):
        super().__init__(message)
        self.bin_index = bin_index


class SignalShapeError(AsnRtfError):
    pass


class BeamformerError(AsnRtfError):
    pass


class SceneError(AsnRtfError):
    pass


class MetricError(AsnRtfError):
    pass


class WavFormatError(AsnRtfError):
    pass


class ConfigError(AsnRtfError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np


class Method(str, Enum):
    BIASED = "biased"
    CW = "cw"
    CW_D = "cw_d"
    ODS = "ods"
    CS = "cs"

    @classmethod
    def ordered(cls, methods) -> List["Method"]:
        """Canonical output order, independent of how the methods were listed."""
        order = list(cls)
        return sorted({cls(m) for m in methods}, key=order.index)


DEFAULT_METHODS = (Method.BIASED, Method.CW, Method.CW_D, Method.ODS)


@dataclass(frozen=True)
class RtfEstimate:
    h_hat: np.ndarray
    # None for ground-truth vectors
    method: Optional[Method]
    # principal eigenvalue for the EVD methods, final cost for ODS
    value: float = float("nan")
    iterations: int = 0
    converged: bool = True


@dataclass(frozen=True)
class BeamformerWeights:
    """MVDR filter w[k] per bin, shape (K, M)."""

    w: np.ndarray

    @property
    def bins(self) -> int:
        return self.w.shape[0]


@dataclass
class MetricReport:
    angles: np.ndarray
    mean_angle: float
    excluded_bins: int
    snr_in_db: np.ndarray
    snr_in_max_db: float
    snr_out_db: float
    delta_snr_broadband_db: float
    delta_snr_weighted_db: float

    def as_row(self) -> dict:
        return {
            "mean_hermitian_angle_rad": self.mean_angle,
            "delta_snr_broadband_db": self.delta_snr_broadband_db,
            "delta_snr_weighted_db": self.delta_snr_weighted_db,
        }


@dataclass
class EstimationDiagnostics:
    """Per-method bookkeeping over the bins of one row."""

    iterations: int = 0
    converged: bool = True
    failed_bins: List[int] = field(default_factory=list)
    # bins beamformed with the reference-channel selector
    fallback_bins: List[int] = field(default_factory=list)

    def add(self, estimate: RtfEstimate) -> None:
        self.iterations += estimate.iterations
        self.converged = self.converged and estimate.converged

    def fail(self, bin_index: int) -> None:
        self.failed_bins.append(bin_index)

    @property
    def warnings(self) -> int:
        return len(self.failed_bins) + len(set(self.fallback_bins) - set(self.failed_bins))

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from asn_rtf.models.layout import NodeLayout


class SceneParams(BaseModel):
    """Knobs of the synthetic scene generator."""

    model_config = ConfigDict(frozen=True)

    magnitude_min: float = Field(0.25, gt=0)
    magnitude_max: float = Field(2.0, gt=0)
    # phases uniform in [-phase_spread, phase_spread]
    phase_spread: float = Field(math.pi, ge=0, le=math.pi)
    speech_psd_min: float = Field(0.5, ge=0)
    speech_psd_max: float = Field(2.0, ge=0)
    # 0 = spatially white within a node, 1 = fully drawn as B B^H
    block_coherence: float = Field(0.5, ge=0, le=1)
    # per-node noise gains, log-uniform in [noise_gain_min, noise_gain_max]
    noise_gain_min: float = Field(0.1, gt=0)
    noise_gain_max: float = Field(10.0, gt=0)
    noise_floor: float = Field(1e-3, gt=0)
    gating_period: int = Field(50, ge=2)
    speech_activity: float = Field(0.5, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "SceneParams":
        for low, high in (("magnitude_min", "magnitude_max"),
                          ("speech_psd_min", "speech_psd_max"),
                          ("noise_gain_min", "noise_gain_max")):
            if getattr(self, low) > getattr(self, high):
                raise ValueError(f"{low} must not exceed {high}")
        return self


@dataclass(frozen=True)
class SceneSpec:
    """Ground truth of one synthetic scene.

    h[k] is the RTF vector of bin k (reference entry 1), phi_x[k] the speech
    PSD at the reference microphone and rv_blocks[n] the (K, M_n, M_n) noise
    covariances of node n.
    """

    layout: NodeLayout
    h: np.ndarray
    phi_x: np.ndarray
    rv_blocks: Tuple[np.ndarray, ...]
    speech_gating: np.ndarray
    seed: int
    sample_rate: int = 16000

    @property
    def bins(self) -> int:
        return self.h.shape[0]

    @property
    def frames(self) -> int:
        return self.speech_gating.size

from dataclasses import dataclass

import numpy as np

from asn_rtf.exceptions import SignalShapeError

SPEECH_PLUS_NOISE = "speech_plus_noise"
NOISE_ONLY = "noise_only"


@dataclass(frozen=True)
class FrameLabels:
    """Per (bin, frame) split into speech-plus-noise (True) and noise-only (False)."""

    speech: np.ndarray

    def __post_init__(self):
        speech = np.asarray(self.speech, dtype=bool)
        if speech.ndim != 2:
            raise SignalShapeError(f"labels must be 2-D [bin, frame], got shape {speech.shape}")
        object.__setattr__(self, "speech", speech)

    @property
    def bins(self) -> int:
        return self.speech.shape[0]

    @property
    def frames(self) -> int:
        return self.speech.shape[1]

    @property
    def noise(self) -> np.ndarray:
        return ~self.speech

    @classmethod
    def from_gating(cls, gating: np.ndarray, bins: int) -> "FrameLabels":
        gating = np.asarray(gating, dtype=bool)
        return cls(np.broadcast_to(gating, (bins, gating.size)).copy())


@dataclass(frozen=True)
class CovarianceSet:
    """Batch estimates R_y[k], R_v[k] with the frame counts behind them."""

    ry: np.ndarray
    rv: np.ndarray
    n_speech_frames: np.ndarray
    n_noise_frames: np.ndarray

    @property
    def bins(self) -> int:
        return self.ry.shape[0]

    @property
    def channels(self) -> int:
        return self.ry.shape[1]

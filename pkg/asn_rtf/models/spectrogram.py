from dataclasses import dataclass, replace

import numpy as np

from asn_rtf.exceptions import SignalShapeError

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_FRAME_LEN = 512
DEFAULT_HOP = 256


@dataclass(frozen=True)
class SpectrogramTensor:
    """Complex STFT coefficients indexed [channel, bin, frame]."""

    data: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE
    frame_len: int = DEFAULT_FRAME_LEN
    hop: int = DEFAULT_HOP

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 3:
            raise SignalShapeError(f"spectrogram must be 3-D [channel, bin, frame], got shape {data.shape}")
        if self.frame_len % 2:
            raise SignalShapeError("frame_len must be even")
        if data.shape[1] != self.frame_len // 2 + 1:
            raise SignalShapeError(
                f"{data.shape[1]} bins do not match frame_len {self.frame_len}"
            )
        if self.hop != self.frame_len // 2:
            raise SignalShapeError("hop must be frame_len / 2")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def bins(self) -> int:
        return self.data.shape[1]

    @property
    def frames(self) -> int:
        return self.data.shape[2]

    def with_data(self, data: np.ndarray) -> "SpectrogramTensor":
        return replace(self, data=data)

    def scaled(self, factor: float) -> "SpectrogramTensor":
        return self.with_data(self.data * factor)

    def __add__(self, other: "SpectrogramTensor") -> "SpectrogramTensor":
        if self.data.shape != other.data.shape:
            raise SignalShapeError(f"shape mismatch {self.data.shape} vs {other.data.shape}")
        return self.with_data(self.data + other.data)

    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.bins) * self.sample_rate / max(self.frame_len, 1)

    @classmethod
    def for_bins(cls, data: np.ndarray, sample_rate: int = DEFAULT_SAMPLE_RATE) -> "SpectrogramTensor":
        """Wrap STFT-domain data whose frame length is implied by its bin count."""
        frame_len = 2 * (np.shape(data)[1] - 1)
        return cls(data=data, sample_rate=sample_rate, frame_len=frame_len, hop=frame_len // 2)

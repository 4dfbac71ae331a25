import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from asn_rtf.exceptions import SignalShapeError
from asn_rtf.models.spectrogram import (
    DEFAULT_FRAME_LEN,
    DEFAULT_HOP,
    DEFAULT_SAMPLE_RATE,
    SpectrogramTensor,
)


def sqrt_hann(frame_len: int) -> np.ndarray:
    """Root of the periodic Hann window; its square is COLA at 50% overlap."""
    n = np.arange(frame_len)
    return np.sqrt(0.5 - 0.5 * np.cos(2 * np.pi * n / frame_len))


def analyze(signal: np.ndarray, frame_len: int = DEFAULT_FRAME_LEN, hop: int = DEFAULT_HOP,
            sample_rate: int = DEFAULT_SAMPLE_RATE) -> SpectrogramTensor:
    """Multichannel STFT of a (M, T) or (T,) real signal.

    Only complete frames are kept; no padding frames are added at the edges.
    """
    x = np.atleast_2d(np.asarray(signal, dtype=np.float64))
    if x.ndim != 2:
        raise SignalShapeError(f"signal must be (channels, samples), got shape {x.shape}")
    if frame_len <= 0 or frame_len % 2:
        raise SignalShapeError("frame_len must be even")
    if hop != frame_len // 2:
        raise SignalShapeError("hop must be frame_len / 2")
    if x.shape[1] < frame_len:
        raise SignalShapeError(f"signal of {x.shape[1]} samples is shorter than one frame ({frame_len})")

    # (M, L, frame_len)
    frames = sliding_window_view(x, frame_len, axis=1)[:, ::hop, :]
    spectra = np.fft.rfft(frames * sqrt_hann(frame_len), axis=-1)
    return SpectrogramTensor(
        data=np.transpose(spectra, (0, 2, 1)),
        sample_rate=sample_rate,
        frame_len=frame_len,
        hop=hop,
    )


def synthesize(spec: SpectrogramTensor) -> np.ndarray:
    """Weighted overlap-add back to a (M, T) signal, T = (L - 1) * hop + frame_len."""
    if spec.frame_len < 2 or spec.frames < 1:
        raise SignalShapeError("spectrogram has no frames to synthesize")
    frame_len, hop = spec.frame_len, spec.hop
    frames = np.fft.irfft(np.transpose(spec.data, (0, 2, 1)), n=frame_len, axis=-1)
    frames *= sqrt_hann(frame_len)

    n_samples = (spec.frames - 1) * hop + frame_len
    out = np.zeros((spec.channels, n_samples))
    for index in range(spec.frames):
        out[:, index * hop:index * hop + frame_len] += frames[:, index, :]
    return out


def interior(spec: SpectrogramTensor) -> slice:
    """Samples covered by two frames, where the round trip is exact."""
    return slice(spec.hop, (spec.frames - 1) * spec.hop + spec.frame_len - spec.hop)


def frame_energy(spec: SpectrogramTensor) -> np.ndarray:
    """Per-frame time-domain energy recovered from the one-sided spectrum (Parseval)."""
    power = np.abs(spec.data) ** 2
    weights = np.full(spec.bins, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    return np.einsum("mkl,k->ml", power, weights) / spec.frame_len

"""Multichannel RIFF/WAVE I/O: PCM 16-bit and IEEE float 32-bit."""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy.io import wavfile

from asn_rtf.exceptions import WavFormatError

PCM16_SCALE = 32768.0


def read_wav(path: Union[str, Path], channels: Optional[int] = None) -> Tuple[np.ndarray, int]:
    """Samples as a float64 (channels, samples) array plus the sample rate.

    PCM16 is divided by 32768; float32 is passed through unchanged.
    """
    try:
        rate, data = wavfile.read(str(path))
    except (ValueError, EOFError) as e:
        raise WavFormatError(f"{path}: malformed WAV file ({e})") from e

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise WavFormatError(f"{path}: unsupported sample format {data.dtype} (PCM16 or float32 expected)")

    samples = samples.T if samples.ndim == 2 else samples[np.newaxis, :]
    if channels is not None and samples.shape[0] != channels:
        raise WavFormatError(f"{path}: expected {channels} channels, found {samples.shape[0]}")
    return samples, int(rate)


def write_wav(path: Union[str, Path], samples: np.ndarray, rate: int) -> None:
    """Store (channels, samples) as IEEE float32; values are written as-is, never clipped."""
    samples = np.atleast_2d(np.asarray(samples))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(str(path), int(rate), np.ascontiguousarray(samples.T.astype(np.float32)))

import numpy as np
import pytest

from asn_rtf.exceptions import SignalShapeError
from asn_rtf.models.spectrogram import SpectrogramTensor
from asn_rtf.services.dsp import stft


def test_squared_window_sums_to_one_at_half_overlap():
    w = stft.sqrt_hann(512)
    np.testing.assert_allclose(w[:256] ** 2 + w[256:] ** 2, 1.0, atol=1e-15)


def test_analyze_shape(rng):
    spec = stft.analyze(rng.standard_normal((2, 16000)))
    assert (spec.channels, spec.bins, spec.frames) == (2, 257, 61)
    assert spec.sample_rate == 16000 and spec.hop == 256


def test_interior_round_trip(rng):
    signal = rng.standard_normal((3, 8000))
    spec = stft.analyze(signal, frame_len=256, hop=128)
    rebuilt = stft.synthesize(spec)
    inside = stft.interior(spec)
    error = np.linalg.norm(rebuilt[:, inside] - signal[:, inside]) / np.linalg.norm(signal[:, inside])
    assert error < 1e-10


def test_parseval_per_frame(rng):
    signal = rng.standard_normal(4096)
    spec = stft.analyze(signal, frame_len=512, hop=256)
    windowed = np.lib.stride_tricks.sliding_window_view(signal, 512)[::256] * stft.sqrt_hann(512)
    expected = np.sum(windowed ** 2, axis=-1)
    np.testing.assert_allclose(stft.frame_energy(spec)[0], expected, rtol=1e-10)


def test_sinusoid_peaks_at_its_bin():
    t = np.arange(16000) / 16000
    spec = stft.analyze(np.sin(2 * np.pi * 1000 * t))
    assert np.all(np.argmax(np.abs(spec.data[0]), axis=0) == 32)


def test_odd_frame_length_rejected(rng):
    with pytest.raises(SignalShapeError, match="even"):
        stft.analyze(rng.standard_normal(2048), frame_len=511, hop=255)


def test_short_signal_rejected():
    with pytest.raises(SignalShapeError):
        stft.analyze(np.zeros(100))


def test_synthesis_length():
    spec = SpectrogramTensor(np.zeros((1, 5, 10)), frame_len=8, hop=4)
    assert stft.synthesize(spec).shape == (1, 9 * 4 + 8)


def test_analyze_is_linear(rng):
    x, y = rng.standard_normal((2, 4096)), rng.standard_normal((2, 4096))
    combined = stft.analyze(2.5 * x - 0.75 * y, frame_len=256, hop=128).data
    separate = 2.5 * stft.analyze(x, frame_len=256, hop=128).data - 0.75 * stft.analyze(y, frame_len=256, hop=128).data
    assert np.max(np.abs(combined - separate)) < 1e-12


@pytest.mark.parametrize("position", [0, 3, 8, 15])
def test_single_frame_impulse_comes_back_scaled_by_window_squared(position):
    impulse = np.zeros(16)
    impulse[position] = 1.0
    spec = stft.analyze(impulse, frame_len=16, hop=8)
    assert spec.frames == 1
    expected = np.zeros((1, 16))
    expected[0, position] = stft.sqrt_hann(16)[position] ** 2
    np.testing.assert_allclose(stft.synthesize(spec), expected, atol=1e-15)


def test_zero_spectrogram_synthesizes_silence():
    spec = SpectrogramTensor(np.zeros((2, 9, 4), dtype=complex), frame_len=16, hop=8)
    assert not np.any(stft.synthesize(spec))

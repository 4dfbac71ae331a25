import math
from typing import Literal, Tuple

import numpy as np

from asn_rtf.exceptions import MetricError
from asn_rtf.models.estimates import MetricReport
from asn_rtf.models.spectrogram import SpectrogramTensor

# One-third-octave band-importance function for average speech,
# ANSI S3.5-1997 (Speech Intelligibility Index), table 3: (center Hz, importance).
BAND_IMPORTANCE = (
    (160, 0.0083), (200, 0.0095), (250, 0.0150), (315, 0.0289), (400, 0.0440),
    (500, 0.0578), (630, 0.0653), (800, 0.0711), (1000, 0.0818), (1250, 0.0844),
    (1600, 0.0882), (2000, 0.0898), (2500, 0.0868), (3150, 0.0844), (4000, 0.0771),
    (5000, 0.0527), (6300, 0.0364), (8000, 0.0185),
)
BAND_SNR_RANGE_DB = (-15.0, 30.0)

Weighting = Literal["broadband", "intelligibility"]


def hermitian_angle(h: np.ndarray, h_hat: np.ndarray) -> float:
    """arccos(|h^H ĥ| / (||h|| ||ĥ||)) in radians, in [0, π/2].

    Evaluated as atan2(||h|| ||ĥ - P_h ĥ||, |h^H ĥ|), which keeps full
    precision for nearly parallel vectors where arccos bottoms out near 2e-8.
    """
    h = np.asarray(h, dtype=np.complex128)
    h_hat = np.asarray(h_hat, dtype=np.complex128)
    h_norm = np.linalg.norm(h)
    if h_norm == 0 or np.linalg.norm(h_hat) == 0:
        raise MetricError("Hermitian angle is undefined for a zero vector")
    inner = np.vdot(h, h_hat)
    orthogonal = h_hat - (inner / h_norm ** 2) * h
    return float(math.atan2(h_norm * np.linalg.norm(orthogonal), abs(inner)))


def angle_summary(h_true: np.ndarray, h_hat: np.ndarray) -> Tuple[np.ndarray, float, int]:
    """Per-bin angles, their uniform mean and the number of bins without a usable estimate.

    Bins whose estimate contains NaN (failed estimation) are excluded from the mean.
    """
    angles = np.full(h_true.shape[0], np.nan)
    for k, (truth, estimate) in enumerate(zip(h_true, h_hat)):
        if np.all(np.isfinite(estimate)) and np.linalg.norm(estimate) > 0:
            angles[k] = hermitian_angle(truth, estimate)
    valid = np.isfinite(angles)
    mean = float(angles[valid].mean()) if valid.any() else float("nan")
    return angles, mean, int((~valid).sum())


def _power_ratio_db(speech_power: float, noise_power: float) -> float:
    if noise_power <= 0 or speech_power <= 0:
        raise MetricError("SNR needs nonzero speech and noise power")
    return 10.0 * math.log10(speech_power / noise_power)


def snr_db(x_spec: SpectrogramTensor, v_spec: SpectrogramTensor, channel: int = 0) -> float:
    """Broadband SNR of one channel over all bins and frames."""
    return _power_ratio_db(float(np.sum(np.abs(x_spec.data[channel]) ** 2)),
                           float(np.sum(np.abs(v_spec.data[channel]) ** 2)))


def band_weights(spec: SpectrogramTensor) -> Tuple[np.ndarray, np.ndarray]:
    """Map STFT bins to importance bands.

    Returns the band index of every bin (-1 outside all bands) and the band
    weights renormalized over the bands that own at least one bin.
    """
    frequencies = spec.bin_frequencies()
    nyquist = spec.sample_rate / 2.0
    owner = np.full(spec.bins, -1)
    for band, (center, _) in enumerate(BAND_IMPORTANCE):
        low, high = center * 2.0 ** (-1 / 6), center * 2.0 ** (1 / 6)
        if band == len(BAND_IMPORTANCE) - 1:
            high = max(high, nyquist)
        owner[(frequencies >= low) & (frequencies < high) & (owner < 0)] = band
        if band == len(BAND_IMPORTANCE) - 1:
            owner[(frequencies == high) & (owner < 0)] = band

    weights = np.array([importance for _, importance in BAND_IMPORTANCE])
    covered = np.isin(np.arange(len(weights)), owner[owner >= 0])
    if not covered.any():
        raise MetricError("no STFT bin falls inside the importance bands")
    weights = np.where(covered, weights, 0.0)
    return owner, weights / weights.sum()


def _band_snr_db(speech_power: float, noise_power: float) -> float:
    """Band SNR clamped to BAND_SNR_RANGE_DB; a silent band sits at the bottom, a noiseless one at the top."""
    low, high = BAND_SNR_RANGE_DB
    if speech_power <= 0:
        return low
    if noise_power <= 0:
        return high
    return float(np.clip(_power_ratio_db(speech_power, noise_power), low, high))


def weighted_snr_db(x_spec: SpectrogramTensor, v_spec: SpectrogramTensor, channel: int = 0) -> float:
    """Band-importance weighted SNR with per-band clamping."""
    owner, weights = band_weights(x_spec)
    speech = np.sum(np.abs(x_spec.data[channel]) ** 2, axis=-1)
    noise = np.sum(np.abs(v_spec.data[channel]) ** 2, axis=-1)
    total = 0.0
    for band in np.flatnonzero(weights):
        members = owner == band
        total += weights[band] * _band_snr_db(float(speech[members].sum()), float(noise[members].sum()))
    return total


def _snr(x_spec, v_spec, channel, weighting: Weighting) -> float:
    if weighting == "broadband":
        return snr_db(x_spec, v_spec, channel)
    if weighting == "intelligibility":
        return weighted_snr_db(x_spec, v_spec, channel)
    raise ValueError(f"unknown weighting {weighting!r}")


def delta_snr(zx: SpectrogramTensor, zv: SpectrogramTensor, x: SpectrogramTensor, v: SpectrogramTensor,
              weighting: Weighting = "broadband") -> float:
    """SNR_out - SNR_in,max, the best input channel being the baseline."""
    snr_in_max = max(_snr(x, v, channel, weighting) for channel in range(x.channels))
    return _snr(zx, zv, 0, weighting) - snr_in_max


def metric_report(h_true: np.ndarray, h_hat: np.ndarray, zx: SpectrogramTensor, zv: SpectrogramTensor,
                  x: SpectrogramTensor, v: SpectrogramTensor) -> MetricReport:
    angles, mean_angle, excluded = angle_summary(h_true, h_hat)
    snr_in = np.array([snr_db(x, v, channel) for channel in range(x.channels)])
    snr_out = snr_db(zx, zv, 0)
    return MetricReport(
        angles=angles,
        mean_angle=mean_angle,
        excluded_bins=excluded,
        snr_in_db=snr_in,
        snr_in_max_db=float(snr_in.max()),
        snr_out_db=snr_out,
        delta_snr_broadband_db=snr_out - float(snr_in.max()),
        delta_snr_weighted_db=delta_snr(zx, zv, x, v, "intelligibility"),
    )

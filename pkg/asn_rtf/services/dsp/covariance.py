"""Batch covariance estimation with SPP-based or externally supplied frame labels."""

import logging
from typing import Optional, Sequence

import numpy as np

from asn_rtf.exceptions import CovarianceEstimationError, SignalShapeError
from asn_rtf.models.covariance import CovarianceSet, FrameLabels
from asn_rtf.models.layout import NodeLayout, selection_mask
from asn_rtf.models.spectrogram import SpectrogramTensor

logger = logging.getLogger(__name__)


class SppEstimator:
    """Speech presence probability with a fixed prior SNR and a recursive noise-PSD tracker.

    The posterior per probe channel is
        p = 1 / (1 + (1 + ξ) exp(-|Y|² / σ̂² · ξ / (1 + ξ)))
    and the tracker follows
        σ̂²(l) = α σ̂²(l-1) + (1 - α) [(1 - p) |Y(l)|² + p σ̂²(l-1)],
    started from the mean power of the first `init_frames` frames.
    """

    def __init__(self, prior_snr_db: float = 15.0, alpha: float = 0.9, init_frames: int = 5):
        self.prior_snr = 10.0 ** (prior_snr_db / 10.0)
        self.alpha = alpha
        self.init_frames = init_frames

    def posterior(self, power: np.ndarray, noise_psd: np.ndarray) -> np.ndarray:
        xi = self.prior_snr
        ratio = np.divide(power, noise_psd, out=np.zeros_like(power), where=noise_psd > 0)
        return 1.0 / (1.0 + (1.0 + xi) * np.exp(-ratio * xi / (1.0 + xi)))

    def channel_probability(self, power: np.ndarray) -> np.ndarray:
        """SPP of one channel from its (K, L) periodogram."""
        bins, frames = power.shape
        noise_psd = power[:, :min(self.init_frames, frames)].mean(axis=1)
        probability = np.empty_like(power)
        for frame in range(frames):
            p = self.posterior(power[:, frame], noise_psd)
            probability[:, frame] = p
            noise_psd = self.alpha * noise_psd + (1.0 - self.alpha) * ((1.0 - p) * power[:, frame] + p * noise_psd)
        return probability

    def __call__(self, noisy: SpectrogramTensor, probe_channels: Sequence[int],
                 layout: Optional[NodeLayout] = None) -> np.ndarray:
        channels = list(probe_channels)
        if not channels:
            raise SignalShapeError("at least one probe channel is required")
        if any(not 0 <= c < noisy.channels for c in channels):
            raise SignalShapeError(f"probe channels {channels} outside the {noisy.channels} available")
        if layout is not None:
            nodes = sorted(layout.node_of(c) for c in channels)
            if nodes != list(range(layout.n_nodes)):
                raise SignalShapeError("probe channels must name exactly one channel per node")

        power = np.abs(noisy.data[channels]) ** 2
        return np.mean([self.channel_probability(p) for p in power], axis=0)


spp_estimator = SppEstimator()


def spp(noisy: SpectrogramTensor, probe_channels: Sequence[int],
        layout: Optional[NodeLayout] = None) -> np.ndarray:
    return spp_estimator(noisy, probe_channels, layout)


def classify(spp_values: np.ndarray, threshold: float = 0.5) -> FrameLabels:
    """speech_plus_noise iff p >= threshold."""
    if not 0 < threshold < 1:
        raise ValueError(f"threshold {threshold} must lie in (0, 1)")
    return FrameLabels(np.asarray(spp_values) >= threshold)


def _hermitian_mean(data: np.ndarray, weights: np.ndarray, counts: np.ndarray) -> np.ndarray:
    # data (M, K, L), weights (K, L) -> (K, M, M)
    gram = np.einsum("mkl,nkl,kl->kmn", data, data.conj(), weights.astype(np.float64))
    gram /= counts[:, None, None]
    return 0.5 * (gram + np.conj(np.swapaxes(gram, 1, 2)))


def estimate(noisy: SpectrogramTensor, labels: FrameLabels) -> CovarianceSet:
    if labels.speech.shape != (noisy.bins, noisy.frames):
        raise SignalShapeError(
            f"labels of shape {labels.speech.shape} do not match {noisy.bins} bins x {noisy.frames} frames"
        )
    n_speech = labels.speech.sum(axis=1)
    n_noise = labels.noise.sum(axis=1)
    for name, counts in (("speech-plus-noise", n_speech), ("noise-only", n_noise)):
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            raise CovarianceEstimationError(f"bin {int(empty[0])} has no {name} frames", int(empty[0]))

    ry = _hermitian_mean(noisy.data, labels.speech, n_speech)
    rv = _hermitian_mean(noisy.data, labels.noise, n_noise)
    logger.debug(f"Estimated covariances for {noisy.bins} bins "
                 f"({int(n_speech.mean())} speech / {int(n_noise.mean())} noise frames on average)")
    return CovarianceSet(ry=ry, rv=rv, n_speech_frames=n_speech, n_noise_frames=n_noise)


def block_diagonal_projection(rv: np.ndarray, layout: NodeLayout) -> np.ndarray:
    """Zero the inter-node blocks; works on a single matrix or a (K, M, M) stack."""
    rv = np.asarray(rv)
    if rv.shape[-1] != layout.total or rv.shape[-2] != layout.total:
        raise SignalShapeError(f"matrix of shape {rv.shape} does not match {layout.total} channels")
    return np.where(selection_mask(layout), 0, rv)


def component_covariance(component: SpectrogramTensor) -> np.ndarray:
    """Mean outer product over all frames of a single component, shape (K, M, M).

    Silent frames add nothing, so the principal eigenvector equals the one
    taken over the active frames only.
    """
    everywhere = np.ones((component.bins, component.frames), dtype=bool)
    return _hermitian_mean(component.data, everywhere, np.full(component.bins, component.frames))

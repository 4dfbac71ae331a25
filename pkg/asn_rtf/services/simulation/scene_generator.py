"""Synthetic STFT-domain scenes with rank-1 speech and block-diagonal noise.

Every bin draws from its own generator, default_rng([seed, k, stream]), so bins
can be generated independently and in any order.
"""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from asn_rtf.exceptions import SceneError
from asn_rtf.models.covariance import FrameLabels
from asn_rtf.models.estimates import RtfEstimate
from asn_rtf.models.layout import NodeLayout
from asn_rtf.models.scene import SceneParams, SceneSpec
from asn_rtf.models.spectrogram import SpectrogramTensor
from asn_rtf.services.dsp import linalg
from asn_rtf.services.estimation.estimators import normalize_to_reference

logger = logging.getLogger(__name__)

SCENE_STREAM = 0
FRAME_STREAM = 1


def bin_rng(seed: int, k: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, k, stream])


def circular_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def speech_gating(frames: int, params: SceneParams) -> np.ndarray:
    """Periodic on/off pattern, each period starting with a speech pause."""
    period = params.gating_period
    active = min(period - 1, max(1, int(round(params.speech_activity * period))))
    return (np.arange(frames) % period) >= period - active


def _noise_block(rng: np.random.Generator, size: int, gain: float, params: SceneParams) -> np.ndarray:
    b = circular_gaussian(rng, (size, size))
    coherent = b @ b.conj().T
    coherent /= np.real(np.trace(coherent)) / size
    block = gain * ((1.0 - params.block_coherence) * np.eye(size) + params.block_coherence * coherent)
    block += params.noise_floor * np.eye(size)
    return 0.5 * (block + block.conj().T)


def random_scene(layout: NodeLayout, bins: int, params: Optional[SceneParams] = None, seed: int = 0,
                 frames: int = 1000, sample_rate: int = 16000) -> SceneSpec:
    layout.require_nodes(2, "a scene")
    if bins < 1:
        raise SceneError("a scene needs at least one bin")
    params = params or SceneParams()

    h = np.empty((bins, layout.total), dtype=np.complex128)
    phi_x = np.empty(bins)
    blocks = [np.empty((bins, size, size), dtype=np.complex128) for size in layout.node_sizes]
    for k in range(bins):
        rng = bin_rng(seed, k, SCENE_STREAM)
        magnitude = rng.uniform(params.magnitude_min, params.magnitude_max, layout.total)
        phase = rng.uniform(-params.phase_spread, params.phase_spread, layout.total)
        h[k] = magnitude * np.exp(1j * phase)
        h[k, layout.ref_index] = 1.0
        phi_x[k] = rng.uniform(params.speech_psd_min, params.speech_psd_max)
        for node, size in enumerate(layout.node_sizes):
            gain = 10.0 ** rng.uniform(np.log10(params.noise_gain_min), np.log10(params.noise_gain_max))
            blocks[node][k] = _noise_block(rng, size, gain, params)

    logger.debug(f"Drew scene for layout {layout.describe()} with {bins} bins, seed {seed}")
    return SceneSpec(
        layout=layout,
        h=h,
        phi_x=phi_x,
        rv_blocks=tuple(blocks),
        speech_gating=speech_gating(frames, params),
        seed=seed,
        sample_rate=sample_rate,
    )


def oracle_covariances(scene: SceneSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact (R_x, R_v, R_y) per bin, each of shape (K, M, M)."""
    rx = scene.phi_x[:, None, None] * np.einsum("km,kn->kmn", scene.h, scene.h.conj())
    rv = np.stack([scipy.linalg.block_diag(*[block[k] for block in scene.rv_blocks])
                   for k in range(scene.bins)])
    return rx, rv, rx + rv


def sample_frames(scene: SceneSpec) -> Tuple[SpectrogramTensor, SpectrogramTensor, SpectrogramTensor, FrameLabels]:
    """Draw speech, noise and noisy STFT frames plus the oracle labels."""
    frames, bins, channels = scene.frames, scene.bins, scene.layout.total
    gating = scene.speech_gating
    x = np.zeros((channels, bins, frames), dtype=np.complex128)
    v = np.zeros((channels, bins, frames), dtype=np.complex128)

    for k in range(bins):
        rng = bin_rng(scene.seed, k, FRAME_STREAM)
        reference = np.sqrt(scene.phi_x[k]) * circular_gaussian(rng, frames) * gating
        x[:, k, :] = np.outer(scene.h[k], reference)
        start = 0
        for block in scene.rv_blocks:
            size = block.shape[1]
            coloring = scipy.linalg.cholesky(block[k], lower=True)
            v[start:start + size, k, :] = coloring @ circular_gaussian(rng, (size, frames))
            start += size

    speech = SpectrogramTensor.for_bins(x, scene.sample_rate)
    noise = SpectrogramTensor.for_bins(v, scene.sample_rate)
    return speech, noise, speech + noise, FrameLabels.from_gating(gating, bins)


def mix_at_snr(x: SpectrogramTensor, v: SpectrogramTensor, target_db: float,
               ref_channel: int) -> Tuple[SpectrogramTensor, float]:
    """Scale the noise so the reference channel reaches `target_db`; speech is left untouched.

    Returns the mixture and the amplitude factor applied to the noise.
    """
    speech_power = float(np.sum(np.abs(x.data[ref_channel]) ** 2))
    noise_power = float(np.sum(np.abs(v.data[ref_channel]) ** 2))
    if speech_power == 0 or noise_power == 0:
        raise SceneError(f"cannot mix at {target_db} dB: a component has zero power at channel {ref_channel}")
    scale = np.sqrt(speech_power / (noise_power * 10.0 ** (target_db / 10.0)))
    return x + v.scaled(scale), float(scale)


def ground_truth_rtf(rx: np.ndarray, layout: NodeLayout) -> RtfEstimate:
    """Normalized principal eigenvector of an oracle speech covariance."""
    pair = linalg.principal_eigenpair(rx)
    if pair.value <= 0:
        raise SceneError("speech covariance has no dominant direction")
    return RtfEstimate(normalize_to_reference(pair.vector, layout.ref_index), None, pair.value)

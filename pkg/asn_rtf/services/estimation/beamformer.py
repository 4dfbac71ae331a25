import numpy as np
import scipy.linalg

from asn_rtf.exceptions import BeamformerError, SignalShapeError
from asn_rtf.models.estimates import BeamformerWeights
from asn_rtf.models.spectrogram import SpectrogramTensor
from asn_rtf.services.dsp import linalg

IMAG_RESIDUE_TOL = 1e-10


def mvdr_weights(h_hat: np.ndarray, rv: np.ndarray, loading: float = 1e-8) -> np.ndarray:
    """w = R_v^{-1} h / (h^H R_v^{-1} h) for one bin, via a Cholesky solve."""
    h = np.asarray(h_hat, dtype=np.complex128)
    lower = linalg.cholesky_with_loading(rv, loading)
    solved = scipy.linalg.cho_solve((lower, True), h, check_finite=False)
    denominator = np.vdot(h, solved)
    if abs(denominator.imag) > IMAG_RESIDUE_TOL * max(abs(denominator), np.finfo(float).tiny):
        raise BeamformerError(f"h^H R_v^-1 h has imaginary residue {denominator.imag:.3e}")
    if denominator.real <= 0:
        raise BeamformerError("h^H R_v^-1 h is not positive")
    return solved / denominator.real


def mvdr(h_hat: np.ndarray, rv: np.ndarray, loading: float = 1e-8) -> BeamformerWeights:
    """Per-bin MVDR weights from (K, M) RTF estimates and (K, M, M) noise covariances."""
    h_hat = np.asarray(h_hat)
    rv = np.asarray(rv)
    if h_hat.ndim != 2 or rv.shape != h_hat.shape + (h_hat.shape[1],):
        raise SignalShapeError(f"RTF estimates {h_hat.shape} do not match covariances {rv.shape}")
    return BeamformerWeights(np.stack([mvdr_weights(h, r, loading) for h, r in zip(h_hat, rv)]))


def apply(weights: BeamformerWeights, spec: SpectrogramTensor) -> SpectrogramTensor:
    """Single-channel output Z[k, l] = w[k]^H y[k, l]."""
    if weights.w.shape != (spec.bins, spec.channels):
        raise SignalShapeError(
            f"weights of shape {weights.w.shape} do not match {spec.bins} bins x {spec.channels} channels"
        )
    output = np.einsum("km,mkl->kl", weights.w.conj(), spec.data)
    return spec.with_data(output[np.newaxis])

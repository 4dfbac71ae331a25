import math

import numpy as np
import pytest

from asn_rtf.exceptions import MetricError
from asn_rtf.models.estimates import BeamformerWeights
from asn_rtf.models.spectrogram import SpectrogramTensor
from asn_rtf.services.estimation import beamformer
from asn_rtf.services.evaluation import metrics
from asn_rtf.tests.conftest import random_vector


def test_hermitian_angle_extremes():
    assert metrics.hermitian_angle(np.array([1, 1j]), np.array([1, 1j])) == pytest.approx(0.0, abs=1e-15)
    assert metrics.hermitian_angle(np.array([1, 0]), np.array([0, 1])) == pytest.approx(math.pi / 2)


def test_hermitian_angle_resolves_nearly_parallel_vectors():
    h = np.array([1.0, 2.0 - 1j, 0.5j])
    tilt = np.array([0.0, 0.0, 1e-10])
    # tilt is not orthogonal to h; only its orthogonal part turns the vector
    orthogonal = tilt - np.vdot(h, tilt) / np.vdot(h, h) * h
    expected = np.linalg.norm(orthogonal) / np.linalg.norm(h)
    assert metrics.hermitian_angle(h, h + tilt) == pytest.approx(expected, rel=1e-4)
    assert metrics.hermitian_angle(h, (1 + 1e-15j) * h) < 1e-14


def test_hermitian_angle_ignores_complex_scaling(rng):
    h, g = random_vector(rng, 5), random_vector(rng, 5)
    scaled = metrics.hermitian_angle((2 - 3j) * h, -0.5j * g)
    assert scaled == pytest.approx(metrics.hermitian_angle(h, g), abs=1e-12)


def test_hermitian_angle_of_zero_vector():
    with pytest.raises(MetricError):
        metrics.hermitian_angle(np.zeros(3), np.ones(3))


def test_angle_summary_skips_failed_bins(rng):
    truth = np.stack([random_vector(rng, 3) for _ in range(4)])
    estimates = truth.copy()
    estimates[2] = np.nan
    angles, mean, excluded = metrics.angle_summary(truth, estimates)
    assert excluded == 1
    assert np.isnan(angles[2])
    assert mean == pytest.approx(0.0, abs=1e-7)


def components(rng, bins=257, frames=20):
    x = rng.standard_normal((2, bins, frames)) + 1j * rng.standard_normal((2, bins, frames))
    return SpectrogramTensor.for_bins(x)


def test_snr_of_tenfold_power(rng):
    x = components(rng)
    assert metrics.snr_db(x, x.scaled(1 / math.sqrt(10))) == pytest.approx(10.0)


def test_band_weights_sum_to_one(rng):
    owner, weights = metrics.band_weights(components(rng))
    assert abs(weights.sum() - 1) < 1e-6
    assert owner[0] == -1
    assert owner[-1] == len(metrics.BAND_IMPORTANCE) - 1


def test_band_weights_renormalize_over_covered_bands(rng):
    narrow = SpectrogramTensor.for_bins(np.ones((1, 257, 2)), sample_rate=8000)
    _, weights = metrics.band_weights(narrow)
    assert weights[-1] == 0 and weights[-2] == 0
    assert abs(weights.sum() - 1) < 1e-12


def test_weighted_equals_broadband_for_flat_snr(rng):
    x = components(rng)
    phases = np.exp(2j * np.pi * rng.random(x.data.shape))
    v = x.with_data(0.5 * x.data * phases)
    assert metrics.weighted_snr_db(x, v) == pytest.approx(metrics.snr_db(x, v), abs=1e-9)


def test_band_snr_is_clamped(rng):
    x = components(rng)
    assert metrics.weighted_snr_db(x, x.scaled(1e-3)) == pytest.approx(30.0)
    assert metrics.weighted_snr_db(x.scaled(1e-3), x) == pytest.approx(-15.0)


def orthogonal_noise(channels, bins, frames):
    """Unit-power channels whose frame sequences are mutually orthogonal."""
    tones = np.exp(2j * np.pi * np.outer(np.arange(channels), np.arange(frames)) / frames)
    return SpectrogramTensor.for_bins(np.broadcast_to(tones[:, None, :], (channels, bins, frames)).copy())


def test_array_gain_for_white_noise(rng):
    h = np.ones(3)
    speech = random_vector(rng, (3 * 30)).reshape(3, 30)
    x = SpectrogramTensor.for_bins(h[:, None, None] * speech[None])
    v = orthogonal_noise(3, 3, 30)
    weights = beamformer.mvdr(np.tile(h, (3, 1)), np.tile(np.eye(3), (3, 1, 1)))
    zx, zv = beamformer.apply(weights, x), beamformer.apply(weights, v)
    assert metrics.delta_snr(zx, zv, x, v) == pytest.approx(10 * math.log10(3), abs=1e-9)


def test_reference_selector_gives_zero_improvement(rng):
    x = components(rng)
    v = x.with_data(rng.standard_normal(x.data.shape) + 0j)
    best = int(np.argmax([metrics.snr_db(x, v, c) for c in range(2)]))
    w = np.zeros((x.bins, 2), dtype=complex)
    w[:, best] = 1
    for gain in (1.0, 3.0 - 1j):
        weights = BeamformerWeights(gain * w)
        delta = metrics.delta_snr(beamformer.apply(weights, x), beamformer.apply(weights, v), x, v)
        assert delta == pytest.approx(0.0, abs=1e-9)


def test_metric_report_row(rng):
    x = components(rng)
    v = x.with_data(rng.standard_normal(x.data.shape) + 0j)
    h = np.tile([1.0, 0.5], (x.bins, 1))
    weights = beamformer.mvdr(h, np.tile(np.eye(2), (x.bins, 1, 1)))
    report = metrics.metric_report(h, h, beamformer.apply(weights, x), beamformer.apply(weights, v), x, v)
    row = report.as_row()
    assert set(row) == {"mean_hermitian_angle_rad", "delta_snr_broadband_db", "delta_snr_weighted_db"}
    assert report.excluded_bins == 0
    assert report.snr_in_max_db == pytest.approx(max(report.snr_in_db))


def test_silent_bands_count_at_the_clamp_floor(rng):
    x = components(rng)
    owner, weights = metrics.band_weights(x)
    low_bins = owner < 3
    speech = x.with_data(np.where(low_bins[None, :, None], 0, x.data))
    noise = x.scaled(0.5)
    expected = -15.0 * weights[:3].sum() + 10 * math.log10(4) * weights[3:].sum()
    assert metrics.weighted_snr_db(speech, noise) == pytest.approx(expected, abs=1e-9)
    assert np.isfinite(metrics.delta_snr(speech, noise, speech, noise, "intelligibility"))


def test_noiseless_bands_count_at_the_clamp_ceiling(rng):
    x = components(rng)
    owner, _ = metrics.band_weights(x)
    noise = x.with_data(np.where((owner >= 0)[None, :, None], 0, x.data))
    assert metrics.weighted_snr_db(x, noise) == pytest.approx(30.0, abs=1e-9)

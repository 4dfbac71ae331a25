import numpy as np
import pytest

from asn_rtf.exceptions import LayoutError, SceneError
from asn_rtf.models.layout import NodeLayout
from asn_rtf.models.scene import SceneParams
from asn_rtf.services.evaluation.metrics import hermitian_angle, snr_db
from asn_rtf.services.simulation import scene_generator


def test_scene_shapes_and_reference(oracle_scene, layout):
    assert oracle_scene.h.shape == (17, 15)
    assert np.all(oracle_scene.h[:, layout.ref_index] == 1)
    assert [block.shape for block in oracle_scene.rv_blocks] == [(17, 4, 4)] * 3 + [(17, 3, 3)]
    assert oracle_scene.frames == 200


def test_noise_blocks_are_hermitian_positive_definite(oracle_scene):
    for block in oracle_scene.rv_blocks:
        np.testing.assert_allclose(block, np.conj(np.swapaxes(block, 1, 2)), atol=1e-14)
        assert np.all(np.linalg.eigvalsh(block) > 0)


def test_same_seed_same_scene(layout):
    first = scene_generator.random_scene(layout, bins=9, seed=3, frames=50)
    second = scene_generator.random_scene(layout, bins=9, seed=3, frames=50)
    other = scene_generator.random_scene(layout, bins=9, seed=4, frames=50)
    np.testing.assert_array_equal(first.h, second.h)
    assert not np.allclose(first.h, other.h)


def test_bins_are_drawn_independently(layout):
    small = scene_generator.random_scene(layout, bins=5, seed=3)
    large = scene_generator.random_scene(layout, bins=9, seed=3)
    np.testing.assert_array_equal(small.h, large.h[:5])
    np.testing.assert_array_equal(small.rv_blocks[2], large.rv_blocks[2][:5])


def test_single_node_scene_rejected():
    with pytest.raises(LayoutError):
        scene_generator.random_scene(NodeLayout(node_sizes=(4,)), bins=3)


def test_gating_starts_with_a_pause():
    gating = scene_generator.speech_gating(200, SceneParams(gating_period=40, speech_activity=0.25))
    assert not gating[0]
    assert gating.sum() == 5 * 10
    np.testing.assert_array_equal(gating[:40], gating[40:80])


def test_oracle_covariances_add_up(oracle_scene, layout):
    rx, rv, ry = scene_generator.oracle_covariances(oracle_scene)
    np.testing.assert_allclose(ry, rx + rv)
    assert np.linalg.matrix_rank(rx[4], tol=1e-10) == 1
    assert np.all(rv[:, :4, 4:] == 0)


def test_sampled_frames_follow_the_gating(oracle_scene):
    x, v, y, labels = scene_generator.sample_frames(oracle_scene)
    silent = ~oracle_scene.speech_gating
    assert np.all(x.data[:, :, silent] == 0)
    np.testing.assert_array_equal(labels.speech[3], oracle_scene.speech_gating)
    np.testing.assert_allclose(y.data, x.data + v.data)
    assert x.frame_len == 32


def test_sampled_noise_matches_block_covariance():
    layout = NodeLayout(node_sizes=(2, 2, 2))
    scene = scene_generator.random_scene(layout, bins=4, seed=9, frames=5000)
    x, v, _, _ = scene_generator.sample_frames(scene)
    rx, rv, _ = scene_generator.oracle_covariances(scene)
    for k in range(scene.bins):
        estimate = v.data[:, k] @ v.data[:, k].conj().T / scene.frames
        assert np.linalg.norm(estimate - rv[k]) < 0.05 * np.linalg.norm(rv[k])
        cross = x.data[:, k] @ v.data[:, k].conj().T / scene.frames
        bound = 0.05 * np.sqrt(np.trace(rx[k]).real * np.trace(rv[k]).real)
        assert np.linalg.norm(cross) < bound


def test_mix_reaches_target_snr(oracle_scene, layout):
    x, v, _, _ = scene_generator.sample_frames(oracle_scene)
    for target in (-5.0, 0.0, 5.0):
        noisy, scale = scene_generator.mix_at_snr(x, v, target, layout.ref_index)
        assert snr_db(x, v.scaled(scale), layout.ref_index) == pytest.approx(target, abs=1e-9)
        np.testing.assert_allclose(noisy.data, x.data + scale * v.data)


def test_mix_rejects_silent_components(oracle_scene):
    x, v, _, _ = scene_generator.sample_frames(oracle_scene)
    with pytest.raises(SceneError):
        scene_generator.mix_at_snr(x.scaled(0.0), v, 0.0, 0)


def test_ground_truth_from_speech_covariance(oracle_scene, layout):
    rx, _, _ = scene_generator.oracle_covariances(oracle_scene)
    truth = scene_generator.ground_truth_rtf(rx[6], layout)
    assert truth.method is None
    assert hermitian_angle(truth.h_hat, oracle_scene.h[6]) < 1e-8
    with pytest.raises(SceneError):
        scene_generator.ground_truth_rtf(np.zeros((15, 15)), layout)


def test_node_noise_gains_are_log_uniform(layout):
    scene = scene_generator.random_scene(layout, bins=200, seed=4)
    params = SceneParams()
    gains = np.concatenate([
        np.real(np.trace(block, axis1=1, axis2=2)) / block.shape[1] - params.noise_floor
        for block in scene.rv_blocks
    ])
    assert np.all((gains >= 0.1 * (1 - 1e-9)) & (gains <= 10 * (1 + 1e-9)))
    exponents = np.log10(gains)
    assert abs(exponents.mean()) < 0.1
    assert exponents.std() == pytest.approx(2 / np.sqrt(12), abs=0.05)

import logging
import time

import numpy as np
import pytest

from asn_rtf.exceptions import NormalizationError, NotHermitianError
from asn_rtf.models.config import OdsOptions
from asn_rtf.models.estimates import Method
from asn_rtf.models.layout import NodeLayout
from asn_rtf.services.dsp.covariance import block_diagonal_projection
from asn_rtf.services.estimation import estimators
from asn_rtf.services.evaluation.metrics import hermitian_angle
from asn_rtf.services.simulation.scene_generator import oracle_covariances, random_scene
from asn_rtf.tests.conftest import random_hpd, random_vector


def test_cw_and_cw_d_exact_on_oracle_covariances(layout):
    scene = random_scene(layout, bins=257, seed=3)
    _, rv, ry = oracle_covariances(scene)
    started = time.perf_counter()
    estimates = [(estimators.rtf_cw(ry[k], rv[k], layout), estimators.rtf_cw_d(ry[k], rv[k], layout))
                 for k in range(scene.bins)]
    assert time.perf_counter() - started < 1.0
    for h, pair in zip(scene.h, estimates):
        for estimate in pair:
            assert hermitian_angle(h, estimate.h_hat) < 1e-8
            assert estimate.h_hat[layout.ref_index] == 1


def test_biased_exact_for_white_noise(rng):
    layout = NodeLayout(node_sizes=(2, 2, 1))
    h = random_vector(rng, 5)
    ry = 2.0 * np.outer(h, h.conj()) + 0.3 * np.eye(5)
    estimate = estimators.rtf_biased(ry, layout)
    assert hermitian_angle(h, estimate.h_hat) < 1e-8
    assert estimate.method == Method.BIASED


def test_biased_error_shrinks_with_speech_power(rng):
    layout = NodeLayout(node_sizes=(2, 2, 2))
    h = random_vector(rng, 6)
    rv = block_diagonal_projection(random_hpd(rng, 6), layout)
    angles = [
        hermitian_angle(h, estimators.rtf_biased(phi * np.outer(h, h.conj()) + rv, layout).h_hat)
        for phi in (0.1, 1.0, 10.0)
    ]
    assert angles[0] > angles[1] > angles[2] > 0


def test_cw_matches_biased_for_identity_noise(rng):
    layout = NodeLayout(node_sizes=(3, 3))
    ry = random_hpd(rng, 6)
    cw = estimators.rtf_cw(ry, np.eye(6), layout)
    np.testing.assert_allclose(cw.h_hat, estimators.rtf_biased(ry, layout).h_hat, atol=1e-14)


def test_cw_equals_cw_d_for_block_diagonal_noise():
    layout = NodeLayout(node_sizes=(3, 2, 2))
    for seed in range(50):
        rng = np.random.default_rng(seed)
        rv = block_diagonal_projection(random_hpd(rng, 7), layout)
        ry = random_hpd(rng, 7) + rv
        cw = estimators.rtf_cw(ry, rv, layout)
        cw_d = estimators.rtf_cw_d(ry, rv, layout)
        assert np.linalg.norm(cw.h_hat - cw_d.h_hat) < 1e-8


def test_cw_d_factors_each_node_once(rng, caplog):
    layout = NodeLayout(node_sizes=(2, 2, 2))
    rv = np.eye(6, dtype=np.complex128)
    rv[2:4, 2:4] = 1.0
    h = random_vector(rng, 6)
    with caplog.at_level(logging.WARNING, logger="asn_rtf.services.dsp.linalg"):
        estimators.rtf_cw_d(np.outer(h, h.conj()) + rv, rv, layout)
    loading = [record for record in caplog.records if "diagonal loading" in record.getMessage()]
    assert len(loading) == 1
    assert "node 1" in loading[0].getMessage()


def test_cw_d_drifts_with_inter_node_noise(rng):
    layout = NodeLayout(node_sizes=(2, 2, 2))
    h = random_vector(rng, 6)
    within_node = block_diagonal_projection(np.ones((6, 6)), layout)
    inter_node = np.ones((6, 6)) - within_node
    differences = []
    for eps in (0.0, 0.05, 0.2):
        rv = 2.0 * np.eye(6) + eps * inter_node
        ry = np.outer(h, h.conj()) + rv
        cw = estimators.rtf_cw(ry, rv, layout)
        cw_d = estimators.rtf_cw_d(ry, rv, layout)
        differences.append(np.linalg.norm(cw.h_hat - cw_d.h_hat))
    assert differences[0] < 1e-8 < differences[1] < differences[2]


def test_cw_independent_of_square_root(rng):
    layout = NodeLayout(node_sizes=(2, 2, 2))
    ry, rv = random_hpd(rng, 6), random_hpd(rng, 6)
    cholesky = estimators.rtf_cw(ry, rv, layout, square_root="cholesky")
    hermitian = estimators.rtf_cw(ry, rv, layout, square_root="hermitian")
    np.testing.assert_allclose(cholesky.h_hat, hermitian.h_hat, atol=1e-8)


def test_subtraction_exact_on_oracle(oracle_scene, layout):
    _, rv, ry = oracle_covariances(oracle_scene)
    estimate = estimators.rtf_subtraction(ry[5], rv[5], layout)
    assert hermitian_angle(oracle_scene.h[5], estimate.h_hat) < 1e-8
    assert estimate.method == Method.CS


def test_normalize_to_reference():
    h = estimators.normalize_to_reference(np.array([2j, 1.0, -4.0]), 0)
    assert h[0] == 1
    np.testing.assert_allclose(h, [1, -0.5j, 2j])
    with pytest.raises(NormalizationError):
        estimators.normalize_to_reference(np.array([0.0, 1.0]), 0)


def test_reference_outside_first_node(rng):
    layout = NodeLayout(node_sizes=(2, 2, 2), ref_index=3)
    h = random_vector(rng, 6)
    ry = np.outer(h, h.conj()) + np.eye(6)
    estimate = estimators.rtf_cw(ry, np.eye(6), layout)
    np.testing.assert_allclose(estimate.h_hat, h / h[3], atol=1e-10)


def test_non_hermitian_covariance_rejected(layout):
    ry = np.triu(np.ones((15, 15)))
    with pytest.raises(NotHermitianError):
        estimators.rtf_biased(ry, layout)


def test_dispatch_by_name(oracle_scene, layout):
    _, rv, ry = oracle_covariances(oracle_scene)
    for name in ("biased", "cw", "cw_d", "cs"):
        estimate = estimators.estimate_rtf(name, ry[0], rv[0], layout)
        assert estimate.method == Method(name)
    with pytest.raises(ValueError):
        estimators.estimate_rtf("cw", ry[0], None, layout)


@pytest.mark.parametrize("beta", [0.25, 4.0, 40.0])
def test_estimates_ignore_global_scale_of_ry(rng, beta):
    layout = NodeLayout(node_sizes=(2, 2, 2))
    h = random_vector(rng, 6)
    rv = block_diagonal_projection(random_hpd(rng, 6), layout)
    ry = np.outer(h, h.conj()) + rv + 0.05 * random_hpd(rng, 6)
    for name in ("biased", "cw", "cw_d"):
        plain = estimators.estimate_rtf(name, ry, rv, layout).h_hat
        scaled = estimators.estimate_rtf(name, beta * ry, rv, layout).h_hat
        np.testing.assert_allclose(scaled, plain, atol=1e-10)

    options = OdsOptions(starts=2)
    plain = estimators.rtf_ods(ry, layout, options)
    scaled = estimators.rtf_ods(beta * ry, layout, options)
    assert plain.converged and scaled.converged
    assert np.linalg.norm(scaled.h_hat - plain.h_hat) < 1e-6 * np.linalg.norm(plain.h_hat)

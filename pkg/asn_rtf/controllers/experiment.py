"""The run pipeline: trial x SNR x method, one CSV row each."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from asn_rtf.exceptions import AsnRtfError, WavFormatError
from asn_rtf.models.config import ExperimentConfig
from asn_rtf.models.covariance import CovarianceSet, FrameLabels
from asn_rtf.models.estimates import BeamformerWeights, EstimationDiagnostics, Method
from asn_rtf.models.spectrogram import SpectrogramTensor
from asn_rtf.services.dsp import covariance, stft
from asn_rtf.services.estimation import beamformer
from asn_rtf.services.estimation.estimators import estimate_rtf
from asn_rtf.services.evaluation.metrics import metric_report
from asn_rtf.services.simulation import scene_generator
from asn_rtf.services.storage import results, wav
from asn_rtf.settings import resolve_threads

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialData:
    """Clean components of one trial plus what the oracle knows about them."""

    trial: int
    x: SpectrogramTensor
    v: SpectrogramTensor
    h_true: np.ndarray
    labels: Optional[FrameLabels]
    # exact (R_x, R_v) of a synthetic scene, before SNR scaling
    oracle: Optional[Tuple[np.ndarray, np.ndarray]] = None


@dataclass
class RunOutcome:
    frame: pd.DataFrame
    summary: pd.DataFrame
    warnings: int
    paths: List[Path]

    @property
    def failed_rows(self) -> int:
        return int((self.frame["error"] != "").sum()) if not self.frame.empty else 0


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def apply_overrides(config: ExperimentConfig, seed: Optional[int] = None,
                    out: Optional[Path] = None) -> ExperimentConfig:
    """Command-line values take precedence over the config file."""
    data = config.model_dump()
    if seed is not None:
        data["experiment"]["seed"] = seed
    if out is not None:
        data["output"]["dir"] = Path(out)
    return ExperimentConfig.model_validate(data)


def synthetic_trial(config: ExperimentConfig, trial: int) -> TrialData:
    scene = scene_generator.random_scene(
        config.layout, config.stft.bins, config.scene,
        seed=trial_seed(config.experiment.seed, trial),
        frames=config.experiment.frames,
        sample_rate=config.stft.sample_rate,
    )
    x, v, _, labels = scene_generator.sample_frames(scene)
    rx, rv, _ = scene_generator.oracle_covariances(scene)
    return TrialData(trial, x, v, scene.h, labels, (rx, rv))


def load_recording(config: ExperimentConfig) -> Tuple[SpectrogramTensor, SpectrogramTensor,
                                                       np.ndarray, Optional[FrameLabels]]:
    """Speech and noise recordings in the STFT domain, ground truth and stored labels."""
    source = config.input
    channels = config.layout.total
    speech, speech_rate = wav.read_wav(source.speech_path, channels)
    noise, noise_rate = wav.read_wav(source.noise_path, channels)
    for path, rate in ((source.speech_path, speech_rate), (source.noise_path, noise_rate)):
        if rate != config.stft.sample_rate:
            raise WavFormatError(f"{path}: sample rate {rate} differs from the configured {config.stft.sample_rate}")
    if speech.shape != noise.shape:
        raise WavFormatError(f"speech {speech.shape} and noise {noise.shape} recordings differ in length")

    x = stft.analyze(speech, config.stft.frame_len, config.stft.hop, config.stft.sample_rate)
    v = stft.analyze(noise, config.stft.frame_len, config.stft.hop, config.stft.sample_rate)
    rx = covariance.component_covariance(x)
    h_true = np.stack([scene_generator.ground_truth_rtf(rx[k], config.layout).h_hat for k in range(x.bins)])
    labels = results.read_labels(source.labels_path) if source.labels_path is not None else None
    return x, v, h_true, labels


def frame_labels(config: ExperimentConfig, trial: TrialData, noisy: SpectrogramTensor) -> FrameLabels:
    if config.estimation.labels == "oracle":
        return trial.labels
    options = config.spp
    estimator = covariance.SppEstimator(options.prior_snr_db, options.alpha, options.init_frames)
    probabilities = estimator(noisy, config.probe_channels(), config.layout)
    return covariance.classify(probabilities, options.threshold)


def covariances(config: ExperimentConfig, trial: TrialData, noisy: SpectrogramTensor,
                noise_scale: float) -> CovarianceSet:
    if config.estimation.covariance == "oracle":
        rx, rv = trial.oracle
        rv = rv * noise_scale ** 2
        counts = np.full(noisy.bins, noisy.frames)
        return CovarianceSet(ry=rx + rv, rv=rv, n_speech_frames=counts, n_noise_frames=counts)
    return covariance.estimate(noisy, frame_labels(config, trial, noisy))


def beamformer_weights(h_hat: np.ndarray, rv: np.ndarray, config: ExperimentConfig,
                       diagnostics: EstimationDiagnostics) -> BeamformerWeights:
    """MVDR per bin; bins without a usable estimate or filter keep the reference channel."""
    selector = np.zeros(config.layout.total, dtype=np.complex128)
    selector[config.layout.ref_index] = 1.0
    weights = np.empty_like(h_hat)
    for k in range(h_hat.shape[0]):
        weights[k] = selector
        if not np.all(np.isfinite(h_hat[k])):
            diagnostics.fallback_bins.append(k)
            continue
        try:
            weights[k] = beamformer.mvdr_weights(h_hat[k], rv[k], config.estimation.loading)
        except AsnRtfError as e:
            logger.warning(f"MVDR failed at bin {k}, using the reference channel: {e}")
            diagnostics.fallback_bins.append(k)
    return BeamformerWeights(weights)


def evaluate_method(config: ExperimentConfig, method: Method, trial: TrialData, noise: SpectrogramTensor,
                    estimates: CovarianceSet) -> Tuple[dict, EstimationDiagnostics]:
    diagnostics = EstimationDiagnostics()
    h_hat = np.full((estimates.bins, estimates.channels), np.nan, dtype=np.complex128)
    for k in range(estimates.bins):
        try:
            estimate = estimate_rtf(method, estimates.ry[k], estimates.rv[k], config.layout,
                                    config.ods, config.estimation.loading)
        except AsnRtfError as e:
            logger.warning(f"{method.value} estimation failed at bin {k}: {e}")
            diagnostics.fail(k)
            continue
        h_hat[k] = estimate.h_hat
        diagnostics.add(estimate)
    if len(diagnostics.failed_bins) == estimates.bins:
        raise AsnRtfError(f"{method.value} failed on every bin")

    weights = beamformer_weights(h_hat, estimates.rv, config, diagnostics)
    report = metric_report(trial.h_true, h_hat, beamformer.apply(weights, trial.x),
                           beamformer.apply(weights, noise), trial.x, noise)
    row = report.as_row()
    if method == Method.ODS:
        row["ods_iterations"] = diagnostics.iterations
        row["ods_converged"] = diagnostics.converged
    return row, diagnostics


def _failed_row(trial: int, method: Method, snr: float, message: str) -> dict:
    return {"trial": trial, "method": method.value, "snr_in_db": snr, "error": message}


def run_trial(config: ExperimentConfig, trial: TrialData) -> Tuple[List[dict], int]:
    rows: List[dict] = []
    warnings = 0
    for snr in config.experiment.snr_db:
        try:
            noisy, scale = scene_generator.mix_at_snr(trial.x, trial.v, snr, config.layout.ref_index)
            noise = trial.v.scaled(scale)
            estimates = covariances(config, trial, noisy, scale)
        except AsnRtfError as e:
            logger.warning(f"trial {trial.trial} at {snr} dB failed: {e}")
            rows.extend(_failed_row(trial.trial, method, snr, f"covariance estimation failed: {e}")
                        for method in config.methods)
            warnings += len(config.methods)
            continue

        for method in config.methods:
            try:
                row, diagnostics = evaluate_method(config, method, trial, noise, estimates)
            except Exception as e:
                logger.warning(f"trial {trial.trial}, {method.value} at {snr} dB failed: {e}")
                rows.append(_failed_row(trial.trial, method, snr, f"{method.value} failed: {e}"))
                warnings += 1
                continue
            rows.append({"trial": trial.trial, "method": method.value, "snr_in_db": snr, "error": "", **row})
            warnings += diagnostics.warnings
        logger.info(f"trial {trial.trial} at {snr:g} dB done")
    return rows, warnings


def trial_source(config: ExperimentConfig):
    """Callable producing the TrialData of a trial index."""
    if config.input.mode == "synthetic":
        return lambda trial: synthetic_trial(config, trial)
    x, v, h_true, labels = load_recording(config)
    if labels is not None and labels.speech.shape != (x.bins, x.frames):
        raise WavFormatError(
            f"labels cover {labels.bins} bins x {labels.frames} frames, recordings give {x.bins} x {x.frames}"
        )
    return lambda trial: TrialData(trial, x, v, h_true, labels)


def collect(config: ExperimentConfig, threads: int = 0) -> Tuple[pd.DataFrame, int]:
    """All rows of a run, in the fixed output order, plus the warning count."""
    make_trial = trial_source(config)

    def work(trial: int) -> Tuple[List[dict], int]:
        try:
            return run_trial(config, make_trial(trial))
        except AsnRtfError as e:
            logger.warning(f"trial {trial} failed: {e}")
            rows = [_failed_row(trial, method, snr, f"trial failed: {e}")
                    for method in config.methods for snr in config.experiment.snr_db]
            return rows, len(rows)

    trials = range(config.experiment.trials)
    workers = min(resolve_threads(threads), config.experiment.trials)
    logger.info(f"Running {config.experiment.trials} trial(s) on {workers} worker(s): "
                f"layout {config.layout.describe()}, methods {[m.value for m in config.methods]}")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(work, trials))

    rows = [row for trial_rows, _ in outcomes for row in trial_rows]
    return results.results_frame(rows), sum(warnings for _, warnings in outcomes)


def cmd_run(config: ExperimentConfig, threads: int = 0) -> RunOutcome:
    frame, warnings = collect(config, threads)
    summary = results.summarize(frame)
    out_dir = Path(config.output.dir)
    paths = [
        results.write_results(frame, out_dir / config.output.results_csv),
        results.write_summary(summary, out_dir / config.output.summary_csv),
    ]
    logger.info(f"Wrote {len(frame)} rows to {paths[0]}")
    return RunOutcome(frame, summary, warnings, paths)

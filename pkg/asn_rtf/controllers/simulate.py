import logging
from pathlib import Path
from typing import List

from asn_rtf.controllers.experiment import trial_seed
from asn_rtf.exceptions import ConfigError
from asn_rtf.models.config import ExperimentConfig
from asn_rtf.services.dsp import stft
from asn_rtf.services.simulation import scene_generator
from asn_rtf.services.storage import results, wav

logger = logging.getLogger(__name__)

SCENE_FILE = "scene.json"
SPEECH_FILE = "speech.wav"
NOISE_FILE = "noise.wav"
LABELS_FILE = "labels.csv"


def cmd_simulate(config: ExperimentConfig, trial: int = 0) -> List[Path]:
    """Write the scene of one trial, its speech and noise components as WAV, and the oracle labels.

    The component files are the time-domain synthesis of the drawn STFT frames;
    they can be fed back through `[input] mode = wav`.
    """
    if config.input.mode != "synthetic":
        raise ConfigError("simulate needs [input] mode = synthetic")

    out_dir = Path(config.output.dir)
    scene = scene_generator.random_scene(
        config.layout, config.stft.bins, config.scene,
        seed=trial_seed(config.experiment.seed, trial),
        frames=config.experiment.frames,
        sample_rate=config.stft.sample_rate,
    )
    x, v, _, labels = scene_generator.sample_frames(scene)

    paths = [
        results.save_scene(scene, out_dir / SCENE_FILE),
        out_dir / SPEECH_FILE,
        out_dir / NOISE_FILE,
        results.write_labels(labels, out_dir / LABELS_FILE),
    ]
    wav.write_wav(paths[1], stft.synthesize(x), scene.sample_rate)
    wav.write_wav(paths[2], stft.synthesize(v), scene.sample_rate)
    logger.info(f"Simulated {scene.bins} bins x {scene.frames} frames for layout "
                f"{config.layout.describe()} into {out_dir}")
    return paths

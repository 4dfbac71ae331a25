import logging
from itertools import cycle, islice
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from asn_rtf.controllers.experiment import RunOutcome, collect
from asn_rtf.exceptions import ConfigError
from asn_rtf.models.config import ExperimentConfig
from asn_rtf.services.storage import results

logger = logging.getLogger(__name__)

AXES = ("snr", "frames", "nodes")
DEFAULT_VALUES = {"frames": (100, 1000, 10000), "nodes": (3, 4, 5)}
SWEEP_CSV = "sweep.csv"
SWEEP_SUMMARY_CSV = "sweep_summary.csv"


def repeat_nodes(node_sizes: Sequence[int], n_nodes: int) -> tuple:
    """Cycle through the configured node sizes until there are `n_nodes` of them."""
    return tuple(islice(cycle(node_sizes), n_nodes))


def config_at(config: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    data = config.model_dump()
    if axis == "snr":
        data["experiment"]["snr_db"] = (float(value),)
    elif axis == "frames":
        data["experiment"]["frames"] = int(value)
    else:
        data["layout"]["node_sizes"] = repeat_nodes(config.layout.node_sizes, int(value))
        data["spp"]["probe_channels"] = ()
    try:
        return ExperimentConfig.model_validate(data)
    except ValueError as e:
        raise ConfigError(f"{axis} = {value:g} is not a valid setting: {e}") from e


def axis_values(config: ExperimentConfig, axis: str, values: Optional[Sequence[float]]) -> List[float]:
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}, expected one of {', '.join(AXES)}")
    if axis != "snr" and config.input.mode == "wav":
        raise ConfigError(f"the {axis} axis needs synthetic input")
    if values:
        return list(values)
    if axis == "snr":
        return list(config.experiment.snr_db)
    return list(DEFAULT_VALUES[axis])


def cmd_sweep(config: ExperimentConfig, axis: str, values: Optional[Sequence[float]] = None,
              threads: int = 0) -> RunOutcome:
    """cmd_run at every point of one axis, merged into a long-format table."""
    points = axis_values(config, axis, values)
    frames = []
    warnings = 0
    for value in points:
        logger.info(f"Sweep {axis} = {value:g}")
        frame, point_warnings = collect(config_at(config, axis, value), threads)
        frame.insert(0, "value", float(value))
        frame.insert(0, "axis", axis)
        frames.append(frame)
        warnings += point_warnings

    merged = pd.concat(frames, ignore_index=True)
    summary = results.summarize(merged, ["axis", "value"])
    out_dir = Path(config.output.dir)
    paths = [
        results.write_results(merged, out_dir / SWEEP_CSV),
        results.write_summary(summary, out_dir / SWEEP_SUMMARY_CSV),
    ]
    logger.info(f"Wrote {len(merged)} sweep rows to {paths[0]}")
    return RunOutcome(merged, summary, warnings, paths)

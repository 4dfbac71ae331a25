"""CSV results, summaries, frame-label files and scene files."""

import json
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np
import pandas as pd

from asn_rtf.exceptions import AsnRtfError
from asn_rtf.models.covariance import NOISE_ONLY, SPEECH_PLUS_NOISE, FrameLabels
from asn_rtf.models.estimates import Method
from asn_rtf.models.layout import NodeLayout
from asn_rtf.models.scene import SceneSpec

RESULT_COLUMNS = [
    "trial", "method", "snr_in_db", "mean_hermitian_angle_rad", "delta_snr_broadband_db",
    "delta_snr_weighted_db", "ods_iterations", "ods_converged", "error",
]
METRIC_COLUMNS = ["mean_hermitian_angle_rad", "delta_snr_broadband_db", "delta_snr_weighted_db"]
FLOAT_FORMAT = "%.12g"


def _write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return path


def results_frame(rows: Iterable[dict]) -> pd.DataFrame:
    """Rows in fixed column order, sorted by trial, method, snr."""
    frame = pd.DataFrame(list(rows), columns=RESULT_COLUMNS)
    if frame.empty:
        return frame
    method_rank = {method.value: rank for rank, method in enumerate(Method)}
    frame["_method_rank"] = frame["method"].map(method_rank)
    frame = frame.sort_values(["trial", "_method_rank", "snr_in_db"], kind="mergesort")
    frame = frame.drop(columns="_method_rank").reset_index(drop=True)
    frame["ods_iterations"] = frame["ods_iterations"].astype("Int64")
    frame["ods_converged"] = frame["ods_converged"].map({True: "true", False: "false"})
    frame["error"] = frame["error"].fillna("")
    return frame


def summarize(frame: pd.DataFrame, extra_columns: List[str] = ()) -> pd.DataFrame:
    """Mean and standard deviation per (method, snr) over the successful trials."""
    keys = list(extra_columns) + ["method", "snr_in_db"]
    if frame.empty:
        return pd.DataFrame(columns=keys)
    ok = frame[frame["error"] == ""]
    stats = ok.groupby(keys, sort=False)[METRIC_COLUMNS].agg(["mean", "std"])
    stats.columns = [f"{column}_{stat}" for column, stat in stats.columns]
    counts = frame.groupby(keys, sort=False).agg(
        trials=("trial", "size"),
        errors=("error", lambda errors: int((errors != "").sum())),
    )
    return counts.join(stats).reset_index()


def write_results(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    return _write_csv(frame, path)


def write_summary(summary: pd.DataFrame, path: Union[str, Path]) -> Path:
    return _write_csv(summary, path)


def write_labels(labels: FrameLabels, path: Union[str, Path]) -> Path:
    bins, frames = np.indices(labels.speech.shape)
    frame = pd.DataFrame({
        "bin": bins.ravel(),
        "frame": frames.ravel(),
        "label": np.where(labels.speech.ravel(), SPEECH_PLUS_NOISE, NOISE_ONLY),
    })
    return _write_csv(frame, path)


def read_labels(path: Union[str, Path]) -> FrameLabels:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        raise AsnRtfError(f"cannot read labels from {path}: {e}") from e
    if list(frame.columns) != ["bin", "frame", "label"]:
        raise AsnRtfError(f"{path}: expected columns bin,frame,label")
    unknown = set(frame["label"]) - {SPEECH_PLUS_NOISE, NOISE_ONLY}
    if unknown:
        raise AsnRtfError(f"{path}: unknown labels {sorted(unknown)}")
    bins, frames = frame["bin"].max() + 1, frame["frame"].max() + 1
    if len(frame) != bins * frames:
        raise AsnRtfError(f"{path}: {len(frame)} rows do not cover {bins} bins x {frames} frames")
    speech = np.zeros((bins, frames), dtype=bool)
    speech[frame["bin"].to_numpy(), frame["frame"].to_numpy()] = (frame["label"] == SPEECH_PLUS_NOISE).to_numpy()
    return FrameLabels(speech)


def _complex_to_json(array: np.ndarray) -> list:
    return np.stack([array.real, array.imag], axis=-1).tolist()


def _complex_from_json(values) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    return array[..., 0] + 1j * array[..., 1]


def save_scene(scene: SceneSpec, path: Union[str, Path]) -> Path:
    document = {
        "layout": {"node_sizes": list(scene.layout.node_sizes), "ref_index": scene.layout.ref_index},
        "seed": scene.seed,
        "sample_rate": scene.sample_rate,
        "h": _complex_to_json(scene.h),
        "phi_x": scene.phi_x.tolist(),
        "rv_blocks": [_complex_to_json(block) for block in scene.rv_blocks],
        "speech_gating": scene.speech_gating.astype(int).tolist(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=1) + "\n", encoding="utf-8")
    return path


def load_scene(path: Union[str, Path]) -> SceneSpec:
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    return SceneSpec(
        layout=NodeLayout(**document["layout"]),
        h=_complex_from_json(document["h"]),
        phi_x=np.asarray(document["phi_x"], dtype=np.float64),
        rv_blocks=tuple(_complex_from_json(block) for block in document["rv_blocks"]),
        speech_gating=np.asarray(document["speech_gating"], dtype=bool),
        seed=int(document["seed"]),
        sample_rate=int(document["sample_rate"]),
    )

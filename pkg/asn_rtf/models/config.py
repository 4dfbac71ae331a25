from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from asn_rtf.models.estimates import DEFAULT_METHODS, Method
from asn_rtf.models.layout import NodeLayout
from asn_rtf.models.scene import SceneParams


class StftOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_rate: int = Field(16000, gt=0)
    frame_len: int = Field(512, ge=2)
    hop: int = 256

    @model_validator(mode="before")
    @classmethod
    def _default_hop(cls, data):
        if isinstance(data, dict) and data.get("hop") is None:
            data = dict(data)
            data.pop("hop", None)
            try:
                data["hop"] = int(data.get("frame_len", 512)) // 2
            except (TypeError, ValueError):
                pass
        return data

    @field_validator("frame_len")
    @classmethod
    def _even_frame(cls, value: int) -> int:
        if value % 2:
            raise ValueError("frame_len must be even")
        return value

    @model_validator(mode="after")
    def _half_overlap(self) -> "StftOptions":
        if self.hop != self.frame_len // 2:
            raise ValueError("hop must be frame_len / 2")
        return self

    @property
    def bins(self) -> int:
        return self.frame_len // 2 + 1


class OdsOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(500, ge=1)
    tol: float = Field(1e-9, gt=0)
    starts: int = Field(4, ge=1)
    init: Literal["biased", "random"] = "biased"
    seed: int = Field(0, ge=0)
    backend: Literal["lbfgs", "scipy"] = "lbfgs"
    memory: int = Field(10, ge=1)


class SppOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    prior_snr_db: float = 15.0
    alpha: float = Field(0.9, ge=0, lt=1)
    init_frames: int = Field(5, ge=1)
    threshold: float = Field(0.5, gt=0, lt=1)
    # empty = first microphone of every node
    probe_channels: Tuple[int, ...] = ()


class EstimationOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    labels: Literal["oracle", "spp"] = "oracle"
    covariance: Literal["sample", "oracle"] = "sample"
    loading: float = Field(1e-8, ge=0)


class ExperimentOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    snr_db: Tuple[float, ...] = (-5.0, 0.0, 5.0)
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    frames: int = Field(1000, ge=2)

    @field_validator("snr_db")
    @classmethod
    def _nonempty(cls, value):
        if len(value) == 0:
            raise ValueError("snr list must not be empty")
        return value


class InputOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["synthetic", "wav"] = "synthetic"
    speech_path: Optional[Path] = None
    noise_path: Optional[Path] = None
    labels_path: Optional[Path] = None

    @model_validator(mode="after")
    def _wav_paths(self) -> "InputOptions":
        if self.mode == "wav":
            for name in ("speech_path", "noise_path"):
                path = getattr(self, name)
                if path is None:
                    raise ValueError(f"{name} is required in wav mode")
                if not Path(path).exists():
                    raise ValueError(f"{name} {path} does not exist")
        if self.labels_path is not None and not Path(self.labels_path).exists():
            raise ValueError(f"labels_path {self.labels_path} does not exist")
        return self


class OutputOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    dir: Path = Path("results")
    results_csv: str = "results.csv"
    summary_csv: str = "summary.csv"


class ExperimentConfig(BaseModel):
    """Fully validated experiment description, defaults filled."""

    model_config = ConfigDict(frozen=True)

    layout: NodeLayout
    stft: StftOptions = StftOptions()
    methods: Tuple[Method, ...] = DEFAULT_METHODS
    ods: OdsOptions = OdsOptions()
    spp: SppOptions = SppOptions()
    experiment: ExperimentOptions = ExperimentOptions()
    scene: SceneParams = SceneParams()
    estimation: EstimationOptions = EstimationOptions()
    input: InputOptions = InputOptions()
    output: OutputOptions = OutputOptions()

    @field_validator("methods")
    @classmethod
    def _methods(cls, value):
        if len(value) == 0:
            raise ValueError("at least one method is required")
        return tuple(Method.ordered(value))

    @model_validator(mode="after")
    def _scene_semantics(self) -> "ExperimentConfig":
        if self.layout.n_nodes < 2:
            raise ValueError("layout needs at least 2 nodes")
        probes = self.spp.probe_channels
        if probes:
            if len(probes) != self.layout.n_nodes:
                raise ValueError("probe_channels needs one channel per node")
            if any(not 0 <= c < self.layout.total for c in probes):
                raise ValueError("probe_channels outside the layout")
            if sorted(self.layout.node_of(c) for c in probes) != list(range(self.layout.n_nodes)):
                raise ValueError("probe_channels must name one channel of every node")
        if self.input.mode == "wav" and self.estimation.covariance == "oracle":
            raise ValueError("oracle covariances need synthetic input")
        if self.input.mode == "wav" and self.estimation.labels == "oracle" and self.input.labels_path is None:
            raise ValueError("oracle labels in wav mode need input.labels_path")
        return self

    def probe_channels(self) -> List[int]:
        return list(self.spp.probe_channels) or self.layout.probe_channels()

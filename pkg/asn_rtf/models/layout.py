from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.linalg import block_diag

from asn_rtf.exceptions import LayoutError


class NodeLayout(BaseModel):
    """Partition of the M microphones of the network into N nodes.

    The reference microphone is global for the whole network, not per node.
    """

    model_config = ConfigDict(frozen=True)

    node_sizes: Tuple[int, ...]
    ref_index: int = 0

    @field_validator("node_sizes", mode="before")
    @classmethod
    def _parse_sizes(cls, value):
        if isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        return tuple(int(size) for size in value)

    @field_validator("node_sizes")
    @classmethod
    def _check_sizes(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(value) == 0:
            raise ValueError("node_sizes must list at least one node")
        if any(size < 1 for size in value):
            raise ValueError("every node needs at least one microphone")
        return value

    @model_validator(mode="after")
    def _check_reference(self) -> "NodeLayout":
        if not 0 <= self.ref_index < self.total:
            raise ValueError(f"ref_index {self.ref_index} outside [0, {self.total})")
        return self

    @property
    def total(self) -> int:
        return int(sum(self.node_sizes))

    @property
    def n_nodes(self) -> int:
        return len(self.node_sizes)

    def node_of(self, channel: int) -> int:
        for node, (start, length) in enumerate(block_spans(self)):
            if start <= channel < start + length:
                return node
        raise LayoutError(f"channel {channel} is not part of the layout")

    @property
    def ref_node(self) -> int:
        return self.node_of(self.ref_index)

    def probe_channels(self) -> List[int]:
        """First microphone of every node."""
        return [start for start, _ in block_spans(self)]

    def require_nodes(self, minimum: int, purpose: str) -> None:
        if self.n_nodes < minimum:
            raise LayoutError(f"{purpose} needs at least {minimum} nodes, layout has {self.n_nodes}")

    def describe(self) -> str:
        return ",".join(str(size) for size in self.node_sizes)


def block_spans(layout: NodeLayout) -> List[Tuple[int, int]]:
    """(start, length) of every node, contiguous and ordered."""
    starts = np.concatenate(([0], np.cumsum(layout.node_sizes)[:-1]))
    return [(int(start), int(size)) for start, size in zip(starts, layout.node_sizes)]


def selection_mask(layout: NodeLayout) -> np.ndarray:
    """Boolean M×M mask, False inside the node-wise diagonal blocks."""
    same_node = block_diag(*[np.ones((size, size), dtype=bool) for size in layout.node_sizes])
    return ~same_node.astype(bool)

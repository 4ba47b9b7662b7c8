from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.core.config import settings
from src.core.enums import Activation
from src.core.exceptions import SchemaMismatch, ShapeMismatch
from src.nn.network import DenseNet


class NetworkState(BaseModel):
    """Portable dump of a DenseNet: sizes, activations and row-major parameters."""

    format_version: int = Field(default_factory=lambda: settings.MODEL_FORMAT_VERSION)
    layer_sizes: Tuple[int, ...]
    hidden_activation: Activation
    output_activation: Activation
    weights: List[List[float]]
    biases: List[List[float]]

    @model_validator(mode="after")
    def check_shapes(self) -> "NetworkState":
        pairs = list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))
        if len(self.weights) != len(pairs) or len(self.biases) != len(pairs):
            raise ShapeMismatch("Layer count does not match layer_sizes")
        for (fan_in, fan_out), w, b in zip(pairs, self.weights, self.biases):
            if len(w) != fan_in * fan_out or len(b) != fan_out:
                raise ShapeMismatch(f"Layer {fan_in}->{fan_out} has wrong parameter count")
        return self


def dump_network(net: DenseNet) -> NetworkState:
    return NetworkState(
        layer_sizes=net.layer_sizes,
        hidden_activation=net.hidden_activation,
        output_activation=net.output_activation,
        weights=[w.ravel(order="C").tolist() for w in net.weights],
        biases=[b.tolist() for b in net.biases],
    )


def load_network(state: NetworkState) -> DenseNet:
    if state.format_version != settings.MODEL_FORMAT_VERSION:
        raise SchemaMismatch(
            f"Network format version {state.format_version} is not supported",
            detail=f"expected={settings.MODEL_FORMAT_VERSION}",
        )
    sizes = state.layer_sizes
    weights = [
        np.asarray(w, dtype=np.float64).reshape(fan_out, fan_in)
        for w, fan_in, fan_out in zip(state.weights, sizes[:-1], sizes[1:])
    ]
    return DenseNet(
        layer_sizes=tuple(sizes),
        hidden_activation=state.hidden_activation,
        output_activation=state.output_activation,
        weights=weights,
        biases=[np.asarray(b, dtype=np.float64) for b in state.biases],
    )

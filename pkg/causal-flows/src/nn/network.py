import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.enums import Activation
from src.core.exceptions import InvalidArchitecture, ShapeMismatch
from src.nn import activations as act


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


@dataclass
class DenseNet:
    """
    Fully connected feed-forward network.

    Attributes:
        layer_sizes: Widths from input to output
        hidden_activation: Activation applied after every hidden layer
        output_activation: Activation applied after the last layer
        weights: One (out, in) matrix per layer
        biases: One (out,) vector per layer
    """

    layer_sizes: Tuple[int, ...]
    hidden_activation: Activation = Activation.RELU
    output_activation: Activation = Activation.IDENTITY
    weights: List[Array] = field(default_factory=list)
    biases: List[Array] = field(default_factory=list)

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def parameters(self) -> List[Array]:
        """Parameter arrays in a fixed order: W0, b0, W1, b1, ..."""
        params: List[Array] = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def copy(self) -> "DenseNet":
        return DenseNet(
            layer_sizes=self.layer_sizes,
            hidden_activation=self.hidden_activation,
            output_activation=self.output_activation,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class ForwardCache:
    inputs: List[Array]
    pre_activations: List[Array]
    squeeze: bool = False


def init_network(
    layer_sizes: Sequence[int],
    activations: Tuple[Activation, Activation] = (Activation.RELU, Activation.IDENTITY),
    seed: int | np.random.SeedSequence = 0,
) -> DenseNet:
    """
    Draw a fresh network.

    Weights are uniform on +-sqrt(6 / fan_in), biases start at zero.

    Args:
        layer_sizes: Widths from input to output, at least two entries
        activations: (hidden, output) activation pair
        seed: Seed for the weight draw

    Raises:
        InvalidArchitecture: On fewer than two layers or a non-positive width
    """
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise InvalidArchitecture("A network needs at least an input and an output layer")
    if any(s <= 0 for s in sizes):
        raise InvalidArchitecture(f"Layer sizes must be positive, got {list(sizes)}")

    rng = np.random.default_rng(seed)
    weights: List[Array] = []
    biases: List[Array] = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    hidden, output = activations
    return DenseNet(
        layer_sizes=sizes,
        hidden_activation=hidden,
        output_activation=output,
        weights=weights,
        biases=biases,
    )


def _as_batch(net: DenseNet, x: ArrayLike) -> Tuple[Array, bool]:
    arr = np.asarray(x, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != net.input_size:
        raise ShapeMismatch(
            f"Expected input width {net.input_size}, got shape {tuple(np.shape(x))}"
        )
    return arr, squeeze


def _activation_for(net: DenseNet, layer: int) -> Activation:
    return net.output_activation if layer == len(net.weights) - 1 else net.hidden_activation


def forward(net: DenseNet, x: ArrayLike) -> Tuple[Array, ForwardCache]:
    """
    Run the network on one input vector or a (batch, in) matrix.

    Returns:
        The output (same rank as the input) and the cache needed by ``backward``.
    """
    a, squeeze = _as_batch(net, x)
    cache = ForwardCache(inputs=[], pre_activations=[], squeeze=squeeze)
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        cache.inputs.append(a)
        pre = a @ w.T + b
        cache.pre_activations.append(pre)
        a = act.apply(_activation_for(net, layer), pre)
    return (a[0] if squeeze else a), cache


def predict(net: DenseNet, x: ArrayLike) -> Array:
    a, squeeze = _as_batch(net, x)
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        a = act.apply(_activation_for(net, layer), a @ w.T + b)
    return a[0] if squeeze else a


def backward(net: DenseNet, cache: ForwardCache, grad_out: ArrayLike) -> Tuple[List[Array], Array]:
    """
    Reverse-mode pass for ``sum(output * grad_out)``.

    Parameter gradients are summed over the batch and follow the order of
    ``DenseNet.parameters()``.

    Raises:
        ShapeMismatch: If ``grad_out`` does not match the cached output
    """
    delta = np.asarray(grad_out, dtype=np.float64)
    if cache.squeeze and delta.ndim == 1:
        delta = delta[None, :]
    expected = cache.pre_activations[-1].shape
    if delta.shape != expected:
        raise ShapeMismatch(f"Output gradient shape {delta.shape} does not match {expected}")

    grads_w: List[Array] = [np.empty(0)] * len(net.weights)
    grads_b: List[Array] = [np.empty(0)] * len(net.weights)
    for layer in reversed(range(len(net.weights))):
        delta = delta * act.derivative(
            _activation_for(net, layer), cache.pre_activations[layer]
        )
        grads_w[layer] = delta.T @ cache.inputs[layer]
        grads_b[layer] = delta.sum(axis=0)
        delta = delta @ net.weights[layer]

    grads: List[Array] = []
    for gw, gb in zip(grads_w, grads_b):
        grads.extend((gw, gb))
    return grads, (delta[0] if cache.squeeze else delta)

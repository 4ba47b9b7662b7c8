import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.enums import Activation


def relu(x: ArrayLike) -> NDArray[np.float64]:
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def elu_plus(x: ArrayLike) -> NDArray[np.float64]:
    """ELU shifted up by one: ``x + 1`` for positive input, ``exp(x)`` otherwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0, x + 1.0, np.exp(np.minimum(x, 0.0)))


def apply(kind: Activation, x: NDArray[np.float64]) -> NDArray[np.float64]:
    if kind is Activation.RELU:
        return relu(x)
    if kind is Activation.ELU_PLUS:
        return elu_plus(x)
    return x


def derivative(kind: Activation, pre: NDArray[np.float64]) -> NDArray[np.float64]:
    """Elementwise derivative evaluated at the pre-activation."""
    if kind is Activation.RELU:
        return (pre > 0).astype(np.float64)
    if kind is Activation.ELU_PLUS:
        return np.where(pre > 0, 1.0, np.exp(np.minimum(pre, 0.0)))
    return np.ones_like(pre)

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from numpy.typing import NDArray

from src.core.enums import OptimizerKind
from src.core.exceptions import ShapeMismatch


Array = NDArray[np.float64]

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class OptimizerState:
    kind: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 1e-4
    first_moments: List[Array] = field(default_factory=list)
    second_moments: List[Array] = field(default_factory=list)
    step: int = 0

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")


def optimizer_step(
    state: OptimizerState, params: Sequence[Array], grads: Sequence[Array]
) -> OptimizerState:
    """
    Apply one descent update to ``params`` in place.

    Sgd: ``p -= lr * g``. Adam: bias-corrected first/second moment update.

    Raises:
        ShapeMismatch: If the gradient list does not line up with the parameters
    """
    if len(params) != len(grads):
        raise ShapeMismatch(f"{len(params)} parameters but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if p.shape != np.shape(g):
            raise ShapeMismatch(f"Parameter shape {p.shape} vs gradient shape {np.shape(g)}")

    state.step += 1
    lr = state.learning_rate
    if state.kind is OptimizerKind.SGD:
        for p, g in zip(params, grads):
            p -= lr * g
        return state

    if not state.first_moments:
        state.first_moments = [np.zeros_like(p) for p in params]
        state.second_moments = [np.zeros_like(p) for p in params]
    elif [m.shape for m in state.first_moments] != [p.shape for p in params]:
        raise ShapeMismatch("Adam moment shapes do not match the parameters")

    correction1 = 1.0 - ADAM_BETA1**state.step
    correction2 = 1.0 - ADAM_BETA2**state.step
    for p, g, m, v in zip(params, grads, state.first_moments, state.second_moments):
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(g)
        p -= lr * (m / correction1) / (np.sqrt(v / correction2) + ADAM_EPS)
    return state

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.typing import NDArray

from src.core.exceptions import InvalidNodeCount, NonFiniteEvaluation


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Clenshaw-Curtis rule on [-1, 1].

    Attributes:
        n: Node count
        nodes: Ascending abscissae, symmetric about 0
        weights: Positive weights summing to 2
    """

    n: int
    nodes: Array
    weights: Array


@lru_cache(maxsize=32)
def clenshaw_curtis(n: int) -> QuadratureRule:
    """
    Build the n-point Clenshaw-Curtis rule (abscissae cos(j*pi/(n-1))).

    Raises:
        InvalidNodeCount: If n < 1
    """
    if n < 1:
        raise InvalidNodeCount(f"Need at least one node, got {n}")
    if n == 1:
        return _frozen(1, np.zeros(1), np.full(1, 2.0))

    N = n - 1
    j = np.arange(n)
    # sin form keeps the nodes exactly antisymmetric
    nodes = np.sin(np.pi * (2 * j - N) / (2 * N))
    theta = np.pi * j / N

    weights = np.zeros(n)
    interior = np.ones(N - 1)
    inner_theta = theta[1:-1]
    if N % 2 == 0:
        weights[0] = weights[N] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            interior -= 2.0 * np.cos(2 * k * inner_theta) / (4 * k**2 - 1)
        interior -= np.cos(N * inner_theta) / (N**2 - 1)
    else:
        weights[0] = weights[N] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            interior -= 2.0 * np.cos(2 * k * inner_theta) / (4 * k**2 - 1)
    weights[1:-1] = 2.0 * interior / N
    weights = 0.5 * (weights + weights[::-1])
    return _frozen(n, nodes, weights)


def _frozen(n: int, nodes: Array, weights: Array) -> QuadratureRule:
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(n=n, nodes=nodes, weights=weights)


def nodes_on_interval(rule: QuadratureRule, upper: Array | float) -> Tuple[Array, Array]:
    """
    Map the rule onto [0, upper] for each entry of ``upper``.

    Returns:
        (points, scaled_weights), both shaped ``upper.shape + (n,)``. When
        upper < 0 the scaled weights are negative, giving the signed integral.
    """
    upper = np.asarray(upper, dtype=np.float64)
    half = upper[..., None] / 2.0
    points = half * (rule.nodes + 1.0)
    return points, half * rule.weights


def integrate(f: Callable[[Array], Array], upper: float, rule: QuadratureRule) -> float:
    """
    Approximate the signed integral of ``f`` over [0, upper].

    ``f`` receives all nodes at once and must return one value per node.

    Raises:
        NonFiniteEvaluation: If ``f`` produces a NaN or infinity
    """
    points, scaled = nodes_on_interval(rule, upper)
    values = np.asarray(f(points), dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NonFiniteEvaluation(
            f"Integrand is not finite on [0, {upper}]", detail=f"upper={upper}"
        )
    return float(np.dot(scaled, values))

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.exceptions import BracketNotFound, NonFiniteEvaluation
from src.flow.normalizer import Normalizer, conditioner, transform


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

MAX_DOUBLINGS = 200
BRACKET_WIDTH_TOL = 1e-8
RESIDUAL_TOL = 1e-10
MAX_ITERATIONS = 400


def invert_normalizer(norm: Normalizer, z: ArrayLike, parents: ArrayLike) -> Array | float:
    """
    Solve normalizer(v) = z for v.

    Brackets each target by doubling outward from [-1, 1], then narrows the
    bracket by bisection, taking a Newton step with the exact slope beta(v)
    whenever it lands strictly inside the bracket.

    Args:
        norm: Monotone normalizer
        z: Scalar target, or a batch of targets
        parents: Parent values (vector for a scalar target, matrix for a batch)

    Raises:
        BracketNotFound: If a target is not finite or cannot be bracketed
            within 200 doublings
    """
    scalar = np.ndim(z) == 0
    target = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if not np.all(np.isfinite(target)):
        bad = target[~np.isfinite(target)][0]
        raise BracketNotFound("Cannot invert a non-finite target", detail=f"z={bad}")
    c = conditioner(norm, parents, target.shape[0])

    lo, hi = _bracket(norm, target, c)
    v = _solve(norm, target, c, lo, hi)
    return float(v[0]) if scalar else v


def _evaluate(norm: Normalizer, v: Array, c: Array) -> tuple[Array, Array]:
    try:
        return transform(norm, v, c)
    except NonFiniteEvaluation:
        raise BracketNotFound("Normalizer overflowed while bracketing the target")


def _bracket(norm: Normalizer, target: Array, c: Array) -> tuple[Array, Array]:
    lo = np.full_like(target, -1.0)
    hi = np.full_like(target, 1.0)
    pending = np.arange(target.shape[0])
    for _ in range(MAX_DOUBLINGS + 1):
        h_lo, _ = _evaluate(norm, lo[pending], c[pending])
        h_hi, _ = _evaluate(norm, hi[pending], c[pending])
        below = h_lo > target[pending]
        above = h_hi < target[pending]
        lo[pending[below]] *= 2.0
        hi[pending[above]] *= 2.0
        pending = pending[below | above]
        if pending.size == 0:
            return lo, hi
    raise BracketNotFound(
        f"Could not bracket {pending.size} target(s) after {MAX_DOUBLINGS} doublings",
        detail=f"z={target[pending[0]]}",
    )


def _solve(norm: Normalizer, target: Array, c: Array, lo: Array, hi: Array) -> Array:
    v = 0.5 * (lo + hi)
    fv, slope = _evaluate(norm, v, c)
    active = np.arange(target.shape[0])
    for _ in range(MAX_ITERATIONS):
        residual = fv[active] - target[active]
        done = (np.abs(residual) <= RESIDUAL_TOL) | (hi[active] - lo[active] <= BRACKET_WIDTH_TOL)
        active, residual = active[~done], residual[~done]
        if active.size == 0:
            break

        x = v[active]
        lo[active] = np.where(residual < 0, x, lo[active])
        hi[active] = np.where(residual > 0, x, hi[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x - residual / slope[active]
        inside = np.isfinite(newton) & (newton > lo[active]) & (newton < hi[active])
        v[active] = np.where(inside, newton, 0.5 * (lo[active] + hi[active]))
        fv[active], slope[active] = _evaluate(norm, v[active], c[active])
    return v

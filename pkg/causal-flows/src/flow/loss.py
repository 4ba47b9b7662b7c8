import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from src.core.exceptions import ShapeMismatch, SigmaNotPositiveDefinite
from src.flow.cgnf import Cgnf, flow_forward
from src.flow.normalizer import forward_with_cache, normalizer_backward


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class LossBreakdown:
    """total = -(base_logdensity + logdet_jacobian), summed over the batch."""

    total: float
    base_logdensity: float
    logdet_jacobian: float


def sigma_cholesky(sigma: ArrayLike) -> Array:
    """
    Lower Cholesky factor of a correlation matrix.

    Raises:
        SigmaNotPositiveDefinite: If sigma is not symmetric with unit
            diagonal, or is not positive definite
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ShapeMismatch(f"Sigma_Z must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, atol=1e-12):
        raise SigmaNotPositiveDefinite("Sigma_Z is not symmetric")
    if not np.allclose(np.diag(sigma), 1.0, atol=1e-12):
        raise SigmaNotPositiveDefinite("Sigma_Z must have a unit diagonal")
    try:
        return linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError:
        raise SigmaNotPositiveDefinite(
            "Sigma_Z is not positive definite", detail=np.array2string(sigma, precision=4)
        )


def is_identity(sigma: Array) -> bool:
    return bool(np.array_equal(sigma, np.eye(sigma.shape[0])))


def base_logdensity(
    z: Array, sigma: Array, use_identity_path: bool = True
) -> Tuple[Array, Array]:
    """
    Row-wise log N(z; 0, sigma) and its gradient w.r.t. z.
    """
    k = z.shape[1]
    if use_identity_path and is_identity(sigma):
        logpdf = -0.5 * np.sum(z * z, axis=1) - 0.5 * k * LOG_2PI
        return logpdf, -z
    chol = sigma_cholesky(sigma)
    u = linalg.solve_triangular(chol, z.T, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    logpdf = -0.5 * np.sum(u * u, axis=0) - 0.5 * logdet - 0.5 * k * LOG_2PI
    precision_z = linalg.solve_triangular(chol.T, u, lower=False).T
    return logpdf, -precision_z


def _breakdown(logpdf: Array, log_derivs: Array) -> LossBreakdown:
    base = float(np.sum(logpdf))
    logdet = float(np.sum(log_derivs))
    return LossBreakdown(total=-(base + logdet), base_logdensity=base, logdet_jacobian=logdet)


def nll(cgnf: Cgnf, batch: ArrayLike, use_identity_path: bool = True) -> LossBreakdown:
    """
    Negative log-likelihood of a model-scale batch, summed over rows.

    ``use_identity_path=False`` forces the Cholesky route even for Sigma_Z = I.
    """
    rows = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if rows.shape[0] == 0:
        raise ShapeMismatch("nll needs a non-empty batch")
    z, log_derivs = flow_forward(cgnf, rows)
    logpdf, _ = base_logdensity(z, cgnf.sigma_z, use_identity_path)
    return _breakdown(logpdf, log_derivs)


def loss_gradients(
    cgnf: Cgnf, batch: ArrayLike, scale: float = 1.0
) -> Tuple[LossBreakdown, List[Array]]:
    """
    Loss and exact gradients of ``scale * nll.total`` w.r.t. ``cgnf.parameters()``.

    The breakdown returned is unscaled.
    """
    rows = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if rows.shape[1] != cgnf.k:
        raise ShapeMismatch(f"Rows must have {cgnf.k} columns, got {rows.shape[1]}")

    z = np.empty_like(rows)
    log_derivs = np.empty_like(rows)
    caches = {}
    for name in cgnf.dag.topo_order:
        i = cgnf.dag.index(name)
        parents = rows[:, cgnf.parent_indices(name)]
        z[:, i], log_derivs[:, i], caches[name] = forward_with_cache(
            cgnf.normalizers[name], rows[:, i], parents
        )

    logpdf, grad_logpdf = base_logdensity(z, cgnf.sigma_z)
    grad_z = -scale * grad_logpdf
    grad_log_deriv = np.full(rows.shape[0], -scale)

    grads: List[Array] = []
    for name, norm in cgnf.normalizers.items():
        i = cgnf.dag.index(name)
        grads.extend(normalizer_backward(norm, caches[name], grad_z[:, i], grad_log_deriv))
    return _breakdown(logpdf, log_derivs), grads

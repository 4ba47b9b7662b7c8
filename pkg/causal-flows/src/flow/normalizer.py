import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.enums import Activation
from src.core.exceptions import NonFiniteEvaluation, ShapeMismatch
from src.nn.network import DenseNet, ForwardCache, backward, forward, init_network, predict
from src.quadrature.clenshaw_curtis import QuadratureRule, clenshaw_curtis, nodes_on_interval
from src.schemas.train import ArchitectureConfig


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

LOG_DERIV_FLOOR = 1e-12


@dataclass
class Normalizer:
    """
    Monotone map v -> z = int_0^v beta(t; c) dt + alpha(c) for one variable.

    Attributes:
        embedding: Conditioner network over the parents, None for roots
        root_embedding: Learnable constant conditioner output for roots
        integrand: Network over (t, c) with an EluPlus head
        offset_weight: Offset head weights, alpha(c) = c @ offset_weight + offset_bias
        offset_bias: Offset head bias, shape (1,)
        rule: Quadrature rule used for the integral
    """

    embedding: Optional[DenseNet]
    root_embedding: Optional[Array]
    integrand: DenseNet
    offset_weight: Array
    offset_bias: Array
    rule: QuadratureRule

    @property
    def n_parents(self) -> int:
        return 0 if self.embedding is None else self.embedding.input_size

    @property
    def embedding_width(self) -> int:
        return self.offset_weight.shape[0]

    def parameters(self) -> List[Array]:
        params: List[Array] = []
        if self.embedding is not None:
            params.extend(self.embedding.parameters())
        else:
            assert self.root_embedding is not None
            params.append(self.root_embedding)
        params.extend(self.integrand.parameters())
        params.extend((self.offset_weight, self.offset_bias))
        return params

    def copy(self) -> "Normalizer":
        return Normalizer(
            embedding=None if self.embedding is None else self.embedding.copy(),
            root_embedding=None if self.root_embedding is None else self.root_embedding.copy(),
            integrand=self.integrand.copy(),
            offset_weight=self.offset_weight.copy(),
            offset_bias=self.offset_bias.copy(),
            rule=self.rule,
        )


@dataclass
class NormalizerCache:
    v: Array
    conditioner: Array
    scaled_weights: Array
    beta_v: Array
    integrand_cache: ForwardCache
    embedding_cache: Optional[ForwardCache] = None
    batch: int = field(default=0)


def build_normalizer(
    n_parents: int, architecture: ArchitectureConfig, seed: np.random.SeedSequence
) -> Normalizer:
    embedding_seed, integrand_seed, head_seed = seed.spawn(3)
    width = architecture.embedding_width
    head_rng = np.random.default_rng(head_seed)

    embedding = None
    root_embedding = None
    if n_parents > 0:
        embedding = init_network(
            architecture.embedding_sizes(n_parents),
            (Activation.RELU, Activation.IDENTITY),
            seed=embedding_seed,
        )
    else:
        root_embedding = head_rng.normal(0.0, 1.0, size=width)

    integrand = init_network(
        architecture.integrand_sizes(), (Activation.RELU, Activation.ELU_PLUS), seed=integrand_seed
    )
    bound = np.sqrt(6.0 / width)
    return Normalizer(
        embedding=embedding,
        root_embedding=root_embedding,
        integrand=integrand,
        offset_weight=head_rng.uniform(-bound, bound, size=width),
        offset_bias=np.zeros(1),
        rule=clenshaw_curtis(architecture.quadrature_nodes),
    )


def identity_normalizer(n_parents: int, architecture: ArchitectureConfig) -> Normalizer:
    """Normalizer with beta == 1 and alpha == 0, i.e. z = v."""
    norm = build_normalizer(n_parents, architecture, np.random.SeedSequence(0))
    for w in norm.integrand.weights:
        w[...] = 0.0
    for b in norm.integrand.biases:
        b[...] = 0.0
    norm.offset_weight[...] = 0.0
    return norm


def conditioner(norm: Normalizer, parents: ArrayLike, batch: int) -> Array:
    """Conditioner output c, shape (batch, e)."""
    if norm.embedding is None:
        assert norm.root_embedding is not None
        return np.broadcast_to(norm.root_embedding, (batch, norm.embedding_width)).copy()
    return predict(norm.embedding, _parent_matrix(norm, parents, batch))


def _parent_matrix(norm: Normalizer, parents: ArrayLike, batch: int) -> Array:
    arr = np.asarray(parents, dtype=np.float64).reshape(batch, -1)
    if arr.shape[1] != norm.n_parents:
        raise ShapeMismatch(f"Expected {norm.n_parents} parent values, got {arr.shape[1]}")
    return arr


def _integrand_input(v: Array, c: Array, rule: QuadratureRule) -> Tuple[Array, Array]:
    points, scaled = nodes_on_interval(rule, v)
    t = np.concatenate([points, v[:, None]], axis=1)
    n_eval = t.shape[1]
    x = np.empty((v.shape[0] * n_eval, 1 + c.shape[1]))
    x[:, 0] = t.ravel()
    x[:, 1:] = np.repeat(c, n_eval, axis=0)
    return x, scaled


def transform(norm: Normalizer, v: ArrayLike, c: Array) -> Tuple[Array, Array]:
    """
    Evaluate z and beta(v) for a batch with a precomputed conditioner output.

    Raises:
        NonFiniteEvaluation: If the integrand or the result is not finite
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    x, scaled = _integrand_input(v, c, norm.rule)
    beta = predict(norm.integrand, x).reshape(v.shape[0], norm.rule.n + 1)
    z = np.sum(scaled * beta[:, :-1], axis=1) + c @ norm.offset_weight + norm.offset_bias[0]
    if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(z))):
        raise NonFiniteEvaluation("Normalizer produced a non-finite value")
    return z, beta[:, -1]


def normalizer_forward(
    norm: Normalizer, v: ArrayLike, parents: ArrayLike
) -> Tuple[Array | float, Array | float]:
    """
    Map v to (z, log_deriv) given the parent values.

    Accepts a scalar v with a parent vector, or a batch of v with a
    (batch, n_parents) parent matrix.
    """
    scalar = np.ndim(v) == 0
    v_arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    c = conditioner(norm, parents, v_arr.shape[0])
    z, beta_v = transform(norm, v_arr, c)
    log_deriv = np.log(np.maximum(beta_v, LOG_DERIV_FLOOR))
    if scalar:
        return float(z[0]), float(log_deriv[0])
    return z, log_deriv


def forward_with_cache(
    norm: Normalizer, v: Array, parents: Array
) -> Tuple[Array, Array, NormalizerCache]:
    batch = v.shape[0]
    embedding_cache = None
    if norm.embedding is None:
        c = conditioner(norm, parents, batch)
    else:
        c, embedding_cache = forward(norm.embedding, _parent_matrix(norm, parents, batch))

    x, scaled = _integrand_input(v, c, norm.rule)
    out, integrand_cache = forward(norm.integrand, x)
    beta = out.reshape(batch, norm.rule.n + 1)
    z = np.sum(scaled * beta[:, :-1], axis=1) + c @ norm.offset_weight + norm.offset_bias[0]
    if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(z))):
        raise NonFiniteEvaluation("Normalizer produced a non-finite value")
    beta_v = beta[:, -1]
    log_deriv = np.log(np.maximum(beta_v, LOG_DERIV_FLOOR))
    cache = NormalizerCache(
        v=v,
        conditioner=c,
        scaled_weights=scaled,
        beta_v=beta_v,
        integrand_cache=integrand_cache,
        embedding_cache=embedding_cache,
        batch=batch,
    )
    return z, log_deriv, cache


def normalizer_backward(
    norm: Normalizer, cache: NormalizerCache, grad_z: Array, grad_log_deriv: Array
) -> List[Array]:
    """
    Gradients of ``sum(grad_z * z + grad_log_deriv * log_deriv)`` w.r.t. the
    parameters, in the order of ``Normalizer.parameters()``.
    """
    batch, n = cache.batch, norm.rule.n
    grad_beta = np.empty((batch, n + 1))
    grad_beta[:, :-1] = grad_z[:, None] * cache.scaled_weights
    unclamped = cache.beta_v > LOG_DERIV_FLOOR
    grad_beta[:, -1] = np.where(
        unclamped, grad_log_deriv / np.where(unclamped, cache.beta_v, 1.0), 0.0
    )

    integrand_grads, grad_x = backward(
        norm.integrand, cache.integrand_cache, grad_beta.reshape(-1, 1)
    )
    grad_c = grad_x[:, 1:].reshape(batch, n + 1, -1).sum(axis=1)
    grad_c += grad_z[:, None] * norm.offset_weight
    grad_offset_weight = cache.conditioner.T @ grad_z
    grad_offset_bias = np.array([grad_z.sum()])

    grads: List[Array] = []
    if norm.embedding is None:
        grads.append(grad_c.sum(axis=0))
    else:
        assert cache.embedding_cache is not None
        embedding_grads, _ = backward(norm.embedding, cache.embedding_cache, grad_c)
        grads.extend(embedding_grads)
    grads.extend(integrand_grads)
    grads.extend((grad_offset_weight, grad_offset_bias))
    return grads

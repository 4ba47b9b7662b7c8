import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.exceptions import ShapeMismatch
from src.flow.normalizer import (
    Normalizer,
    build_normalizer,
    identity_normalizer,
    normalizer_forward,
)
from src.graph.dag import Dag
from src.schemas.train import ArchitectureConfig, PreprocessInfo


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


@dataclass
class Cgnf:
    """
    Causal-graphical normalizing flow.

    Attributes:
        dag: Causal skeleton; columns of every batch follow ``dag.names``
        normalizers: One normalizer per variable, keyed by name in declaration order
        architecture: Layout shared by all normalizers
        sigma_z: Correlation matrix of the base distribution
        preprocess: Constants linking model scale to data scale
    """

    dag: Dag
    normalizers: Dict[str, Normalizer]
    architecture: ArchitectureConfig
    sigma_z: Array = field(default_factory=lambda: np.eye(0))
    preprocess: Optional[PreprocessInfo] = None

    def __post_init__(self) -> None:
        k = len(self.dag.names)
        if self.sigma_z.size == 0:
            self.sigma_z = np.eye(k)
        if self.sigma_z.shape != (k, k):
            raise ShapeMismatch(f"sigma_z must be {k}x{k}, got {self.sigma_z.shape}")
        if list(self.normalizers) != list(self.dag.names):
            raise ShapeMismatch("Exactly one normalizer per variable is required")

    @property
    def k(self) -> int:
        return len(self.dag.names)

    def parent_indices(self, name: str) -> List[int]:
        return [self.dag.index(p) for p in self.dag.parents[name]]

    def parameters(self) -> List[Array]:
        params: List[Array] = []
        for norm in self.normalizers.values():
            params.extend(norm.parameters())
        return params

    def copy(self) -> "Cgnf":
        return Cgnf(
            dag=self.dag,
            normalizers={name: norm.copy() for name, norm in self.normalizers.items()},
            architecture=self.architecture,
            sigma_z=self.sigma_z.copy(),
            preprocess=self.preprocess,
        )

    def load_parameters(self, params: List[Array]) -> None:
        current = self.parameters()
        if len(current) != len(params):
            raise ShapeMismatch("Parameter list does not match the flow")
        for dst, src in zip(current, params):
            dst[...] = src


def build_cgnf(
    dag: Dag,
    architecture: ArchitectureConfig | None = None,
    seed: int = 0,
    sigma_z: ArrayLike | None = None,
) -> Cgnf:
    """Randomly initialized flow with one normalizer per DAG variable."""
    architecture = architecture or ArchitectureConfig()
    normalizers = {
        name: build_normalizer(
            len(dag.parents[name]), architecture, np.random.SeedSequence([seed, i])
        )
        for i, name in enumerate(dag.names)
    }
    sigma = np.eye(len(dag.names)) if sigma_z is None else np.asarray(sigma_z, dtype=np.float64)
    logger.debug(f"Built flow over {len(dag.names)} variables with seed {seed}")
    return Cgnf(dag=dag, normalizers=normalizers, architecture=architecture, sigma_z=sigma)


def identity_cgnf(dag: Dag, architecture: ArchitectureConfig | None = None) -> Cgnf:
    """Flow whose every normalizer is the identity map."""
    architecture = architecture or ArchitectureConfig()
    normalizers = {
        name: identity_normalizer(len(dag.parents[name]), architecture) for name in dag.names
    }
    return Cgnf(dag=dag, normalizers=normalizers, architecture=architecture)


def flow_forward(cgnf: Cgnf, rows: ArrayLike) -> Tuple[Array, Array]:
    """
    Push model-scale rows through every normalizer.

    Each variable is conditioned on its parents' observed values, so columns
    are independent given the row and are visited in topological order.

    Returns:
        (z, log_derivs), both with the shape of ``rows``
    """
    arr = np.asarray(rows, dtype=np.float64)
    single = arr.ndim == 1
    batch = arr[None, :] if single else arr
    if batch.ndim != 2 or batch.shape[1] != cgnf.k:
        raise ShapeMismatch(f"Rows must have {cgnf.k} columns, got shape {arr.shape}")

    z = np.empty_like(batch)
    log_derivs = np.empty_like(batch)
    for name in cgnf.dag.topo_order:
        i = cgnf.dag.index(name)
        parents = batch[:, cgnf.parent_indices(name)]
        z[:, i], log_derivs[:, i] = normalizer_forward(cgnf.normalizers[name], batch[:, i], parents)
    if single:
        return z[0], log_derivs[0]
    return z, log_derivs

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from src.core.config import settings
from src.core.exceptions import SigmaNotPositiveDefinite
from src.estimands.estimator import estimate
from src.flow.loss import sigma_cholesky
from src.graph.dag import Dag
from src.schemas.estimands import EstimandSpec, EstimateResult, RhoGrid, SensitivityRow
from src.schemas.train import ArchitectureConfig, TrainConfig
from src.train.dataset import Dataset
from src.train.trainer import train_model
from src.worker import run_jobs


logger: logging.Logger = logging.getLogger(__name__)


def correlation_matrix(
    dag: Dag, variable_a: str, variable_b: str, rho: float
) -> NDArray[np.float64]:
    """
    Identity correlation with ``rho`` between the disturbances of two variables.

    Raises:
        SigmaNotPositiveDefinite: Naming the offending grid point
    """
    i, j = dag.index(variable_a), dag.index(variable_b)
    sigma = np.eye(len(dag.names))
    sigma[i, j] = sigma[j, i] = rho
    try:
        sigma_cholesky(sigma)
    except SigmaNotPositiveDefinite:
        raise SigmaNotPositiveDefinite(
            f"rho={rho} between {variable_a!r} and {variable_b!r} is not a valid correlation",
            detail=f"{variable_a},{variable_b},{rho}",
        )
    return sigma


@dataclass(frozen=True)
class GridPointJob:
    dataset: Dataset
    dag: Dag
    spec: EstimandSpec
    config: TrainConfig
    architecture: Optional[ArchitectureConfig]
    sigma_z: NDArray[np.float64]
    sample_count: int
    seed: int


def run_grid_point(job: GridPointJob) -> EstimateResult:
    """Retrain under the correlated base distribution and estimate."""
    cgnf, _ = train_model(job.dataset, job.dag, job.config, job.architecture, job.sigma_z)
    return estimate(cgnf, job.spec, job.sample_count, job.seed)


def sensitivity_sweep(
    dataset: Dataset,
    dag: Dag,
    spec: EstimandSpec,
    config: TrainConfig,
    rho_pairs: Sequence[RhoGrid],
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
    architecture: Optional[ArchitectureConfig] = None,
    workers: Optional[int] = None,
) -> List[SensitivityRow]:
    """
    Re-estimate ``spec`` for every assumed disturbance correlation.

    Every grid point is validated before any training starts. Each point
    retrains with the correlation-aware likelihood and samples with
    correlated base draws. ``seed`` (default: ``config.seed``) drives both
    the retraining and the sampling of every point.

    Raises:
        SigmaNotPositiveDefinite: If a grid point gives an invalid Sigma_Z
    """
    seed = config.seed if seed is None else seed
    point_config = config.model_copy(update={"seed": seed})
    J = sample_count or settings.DEFAULT_SAMPLE_COUNT
    points = [
        (grid, rho, correlation_matrix(dag, grid.variable_a, grid.variable_b, rho))
        for grid in rho_pairs
        for rho in grid.rhos
    ]
    jobs = [
        GridPointJob(dataset, dag, spec, point_config, architecture, sigma, J, seed)
        for _, _, sigma in points
    ]
    outcomes = run_jobs(run_grid_point, jobs, workers)

    rows: List[SensitivityRow] = []
    for (grid, rho, _), outcome in zip(points, outcomes):
        rows.append(
            SensitivityRow(
                variable_a=grid.variable_a,
                variable_b=grid.variable_b,
                rho=rho,
                result=outcome.value,
                error=outcome.error,
            )
        )
    failed = sum(1 for row in rows if row.error is not None)
    logger.info(f"Sensitivity sweep finished: {len(rows)} grid point(s), {failed} failed")
    return rows

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from src.core.config import settings
from src.core.exceptions import ConfigError, NumericalError
from src.estimands.estimator import estimate
from src.graph.dag import Dag
from src.schemas.estimands import EstimandSpec, EstimateResult
from src.schemas.train import ArchitectureConfig, TrainConfig
from src.train.dataset import Dataset
from src.train.trainer import train_model
from src.worker import run_jobs


logger: logging.Logger = logging.getLogger(__name__)

FAILURE_WARN_FRACTION = 0.05


@dataclass(frozen=True)
class ReplicateJob:
    dataset: Dataset
    dag: Dag
    spec: EstimandSpec
    config: TrainConfig
    architecture: Optional[ArchitectureConfig]
    sample_count: int
    seed: int


def run_replicate(job: ReplicateJob) -> float:
    """Resample rows, retrain from a fresh initialization and re-estimate."""
    rng = np.random.default_rng([job.seed, 0xB007, 1])
    rows = rng.integers(0, job.dataset.n, size=job.dataset.n)
    config = job.config.model_copy(update={"seed": job.seed})
    cgnf, _ = train_model(job.dataset.take(rows), job.dag, config, job.architecture)
    return estimate(cgnf, job.spec, job.sample_count, job.seed).point


def percentile_interval(replicates: ArrayLike, level: float) -> Tuple[float, float]:
    """Inverted-CDF percentiles, so two replicates give their min and max."""
    values = np.asarray(replicates, dtype=np.float64)
    lo, hi = np.percentile(
        values, [100.0 * (1.0 - level) / 2.0, 100.0 * (1.0 + level) / 2.0], method="inverted_cdf"
    )
    return float(lo), float(hi)


def bootstrap(
    dataset: Dataset,
    dag: Dag,
    spec: EstimandSpec,
    config: TrainConfig,
    B: int,
    level: float = 0.90,
    seed: Optional[int] = None,
    sample_count: Optional[int] = None,
    architecture: Optional[ArchitectureConfig] = None,
    workers: Optional[int] = None,
) -> EstimateResult:
    """
    Percentile bootstrap around the full train-then-estimate pipeline.

    The point estimate comes from the original data; each of the B replicates
    resamples n rows with replacement and retrains from scratch. Failed
    replicates are counted and left out of the interval.

    Raises:
        ConfigError: If B < 2 or the level is outside (0, 1]
        NumericalError: If every replicate fails
    """
    if B < 2:
        raise ConfigError(f"Bootstrap needs at least 2 replicates, got {B}")
    if not 0 < level <= 1:
        raise ConfigError(f"Confidence level must lie in (0, 1], got {level}")
    seed = settings.DEFAULT_SEED if seed is None else seed
    J = sample_count or settings.DEFAULT_SAMPLE_COUNT

    base_config = config.model_copy(update={"seed": seed})
    cgnf, _ = train_model(dataset, dag, base_config, architecture)
    result = estimate(cgnf, spec, J, seed)

    children = np.random.SeedSequence(seed).generate_state(B, dtype=np.uint32)
    jobs = [
        ReplicateJob(dataset, dag, spec, config, architecture, J, int(child))
        for child in children
    ]
    outcomes = run_jobs(run_replicate, jobs, workers)
    replicates = [float(o.value) for o in outcomes if o.ok and o.value is not None]
    failures = B - len(replicates)
    if failures > FAILURE_WARN_FRACTION * B:
        logger.warning(f"{failures} of {B} bootstrap replicates failed")
    if not replicates:
        raise NumericalError("Every bootstrap replicate failed", detail=f"B={B}")

    ci_low, ci_high = percentile_interval(replicates, level)
    if not ci_low <= result.point <= ci_high:
        logger.warning(
            f"Point estimate {result.point:.4g} lies outside the percentile interval",
            extra={"ci_low": ci_low, "ci_high": ci_high},
        )
    return result.model_copy(
        update={
            "ci_low": ci_low,
            "ci_high": ci_high,
            "level": level,
            "replicates": replicates,
            "failures": failures,
        }
    )

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.bench.dgm import CoverageModel, model_for, simulate_dgm
from src.bench.truth import NAMED_ESTIMANDS, ground_truth, named_estimand
from src.core.config import settings
from src.core.enums import DgmKind, EstimandKind, HyperVariant
from src.core.exceptions import ConfigError
from src.estimands.bootstrap import bootstrap
from src.estimands.estimator import estimate_many
from src.schemas.bench import CoverageReport, HyperSweepReport, MceReport, MceRow
from src.schemas.estimands import EstimandSpec
from src.schemas.train import ArchitectureConfig, TrainConfig
from src.train.trainer import train_model
from src.worker import run_jobs


logger: logging.Logger = logging.getLogger(__name__)


@dataclass
class MceJob:
    kind: DgmKind
    n: int
    replication: int
    estimands: Tuple[str, ...]
    config: TrainConfig
    architecture: Optional[ArchitectureConfig]
    sample_count: int
    seed: int


def run_mce_replication(job: MceJob) -> Dict[str, float]:
    """Simulate one dataset, fit a flow on it and estimate every estimand."""
    model = model_for(job.kind)
    dataset = simulate_dgm(job.kind, job.n, job.seed)
    config = job.config.model_copy(update={"seed": job.seed})
    cgnf, _ = train_model(dataset, model.dag(), config, job.architecture)
    specs = [named_estimand(name) for name in job.estimands]
    results = estimate_many(cgnf, specs, job.sample_count, job.seed)
    return {r.estimand: r.point for r in results}


def _replication_seeds(seed: int, count: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint32)]


def run_mce(
    kind: DgmKind,
    sample_sizes: Sequence[int],
    replications: Optional[int] = None,
    config: Optional[TrainConfig] = None,
    seed: Optional[int] = None,
    estimands: Optional[Sequence[str]] = None,
    sample_count: Optional[int] = None,
    architecture: Optional[ArchitectureConfig] = None,
    workers: Optional[int] = None,
    variant: HyperVariant = HyperVariant.DEFAULT,
    oracle_draws: Optional[int] = None,
) -> MceReport:
    """
    Monte Carlo experiment: for every sample size and replication simulate,
    fit and estimate, then report bias and spread against the ground truth.

    Failed replications are logged and excluded; an estimand whose every
    replication failed at a size is left out of the report.
    """
    replications = replications or settings.DESK_REPLICATIONS
    seed = settings.DEFAULT_SEED if seed is None else seed
    config = config or TrainConfig()
    names = tuple(estimands or NAMED_ESTIMANDS)
    J = sample_count or settings.DEFAULT_SAMPLE_COUNT
    if not sample_sizes:
        raise ConfigError("run_mce needs at least one sample size")

    truths = {name: ground_truth(kind, name, oracle_draws, seed) for name in names}
    jobs: List[MceJob] = []
    for n in sample_sizes:
        seeds = _replication_seeds(seed + n, replications)
        jobs.extend(
            MceJob(kind, n, r, names, config, architecture, J, s) for r, s in enumerate(seeds)
        )
    logger.info(
        f"Monte Carlo experiment on {kind}: {len(jobs)} fits",
        extra={"variant": str(variant), "sizes": list(sample_sizes)},
    )
    outcomes = run_jobs(run_mce_replication, jobs, workers)

    rows: List[MceRow] = []
    for n in sample_sizes:
        cell = [o for o, job in zip(outcomes, jobs) if job.n == n]
        succeeded = [o.value for o in cell if o.ok and o.value is not None]
        failures = len(cell) - len(succeeded)
        if failures:
            logger.warning(f"{failures} of {len(cell)} replications failed at n={n}")
        for name in names:
            estimates = np.array([values[name] for values in succeeded])
            if estimates.size == 0:
                continue
            truth = truths[name]
            rows.append(
                MceRow(
                    estimand=name,
                    n=n,
                    bias=float(estimates.mean() - truth.value),
                    sd=float(estimates.std(ddof=1)) if estimates.size > 1 else None,
                    replications=int(estimates.size),
                    failures=failures,
                    truth=truth.value,
                    truth_source=truth.source,
                    estimates=estimates.tolist(),
                )
            )
    return MceReport(dgm=kind, variant=variant, seed=seed, rows=rows)


@dataclass
class CoverageJob:
    n: int
    replicates: int
    level: float
    config: TrainConfig
    architecture: Optional[ArchitectureConfig]
    sample_count: int
    seed: int


def run_coverage_dataset(job: CoverageJob) -> Tuple[float, float]:
    model = CoverageModel()
    dataset = model.simulate(job.n, job.seed)
    spec = EstimandSpec(kind=EstimandKind.ATE, name="ATE_A_Y", treatments="A", outcome="Y")
    result = bootstrap(
        dataset,
        model.dag(),
        spec,
        job.config,
        job.replicates,
        level=job.level,
        seed=job.seed,
        sample_count=job.sample_count,
        architecture=job.architecture,
        workers=1,
    )
    assert result.ci_low is not None and result.ci_high is not None
    return result.ci_low, result.ci_high


def run_coverage(
    n_datasets: int,
    B: int,
    n: int,
    level: float = 0.90,
    seed: Optional[int] = None,
    config: Optional[TrainConfig] = None,
    sample_count: Optional[int] = None,
    architecture: Optional[ArchitectureConfig] = None,
    workers: Optional[int] = None,
) -> CoverageReport:
    """
    Share of simulated datasets whose bootstrap percentile interval covers
    the true average effect of the coverage model.

    Datasets run in parallel; each bootstrap runs its replicates in-process.
    """
    if n_datasets < 1:
        raise ConfigError(f"Coverage needs at least one dataset, got {n_datasets}")
    seed = settings.DEFAULT_SEED if seed is None else seed
    config = config or TrainConfig()
    J = sample_count or settings.DEFAULT_SAMPLE_COUNT
    truth = CoverageModel.true_ate

    jobs = [
        CoverageJob(n, B, level, config, architecture, J, s)
        for s in _replication_seeds(seed, n_datasets)
    ]
    logger.info(f"Coverage run: {n_datasets} datasets x {B} replicates, n={n}")
    outcomes = run_jobs(run_coverage_dataset, jobs, workers)
    intervals = [list(o.value) for o in outcomes if o.ok and o.value is not None]
    covered = sum(1 for lo, hi in intervals if lo <= truth <= hi)
    report = CoverageReport(
        n=n,
        datasets=n_datasets,
        replicates=B,
        level=level,
        truth=truth,
        covered=covered,
        failures=n_datasets - len(intervals),
        seed=seed,
        intervals=intervals,
    )
    logger.info(f"Coverage {report.rate:.3f} at nominal level {level}")
    return report


def apply_variant(
    variant: HyperVariant, config: TrainConfig, architecture: ArchitectureConfig
) -> Tuple[TrainConfig, ArchitectureConfig]:
    """Default configuration with one hyper-parameter changed."""
    if variant is HyperVariant.ONE_LESS_LAYER:
        return config, architecture.without_last_layer()
    if variant is HyperVariant.QUARTER_FEWER_NODES:
        return config, architecture.scaled_nodes(0.75)
    if variant is HyperVariant.BATCH_512:
        return config.model_copy(update={"batch_size": 512}), architecture
    if variant is HyperVariant.LEARNING_RATE_1E3:
        return config.model_copy(update={"learning_rate": 1e-3}), architecture
    return config, architecture


def run_hyper_sweep(
    kind: DgmKind,
    variants: Sequence[HyperVariant],
    n: int,
    replications: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[TrainConfig] = None,
    architecture: Optional[ArchitectureConfig] = None,
    estimands: Optional[Sequence[str]] = None,
    sample_count: Optional[int] = None,
    workers: Optional[int] = None,
    oracle_draws: Optional[int] = None,
) -> HyperSweepReport:
    """Monte Carlo experiment under each variant; an empty list runs the default only."""
    config = config or TrainConfig()
    architecture = architecture or ArchitectureConfig()
    chosen = list(dict.fromkeys(variants)) or [HyperVariant.DEFAULT]
    report = HyperSweepReport(dgm=kind)
    for variant in chosen:
        variant_config, variant_architecture = apply_variant(variant, config, architecture)
        report.reports[variant] = run_mce(
            kind,
            [n],
            replications,
            variant_config,
            seed,
            estimands,
            sample_count,
            variant_architecture,
            workers,
            variant,
            oracle_draws=oracle_draws,
        )
    return report

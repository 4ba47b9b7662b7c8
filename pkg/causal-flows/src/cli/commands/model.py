import logging
from pathlib import Path
from typing import Any, List, Optional

import click
import pandas as pd

from src.cli.common import RunContext, pass_run
from src.cli.deps import MODEL_FILE, get_dag, get_dataset, get_model, model_path
from src.core.digests import digest_file
from src.core.enums import EstimandKind
from src.estimands.bootstrap import bootstrap
from src.estimands.decompose import decompose_check
from src.estimands.estimator import estimate_many
from src.estimands.sensitivity import sensitivity_sweep
from src.flow.serialization import dump_cgnf
from src.graph.dag import validate_regimes
from src.repositories.models import ModelRepository
from src.repositories.results import ResultRepository
from src.repositories.samples import SampleRepository
from src.repositories.tables import CsvRepository
from src.schemas.common import IResultRecord
from src.schemas.graph import Regime
from src.schemas.sampling import SamplePlan
from src.simulate.sampler import sample_regimes
from src.train.trainer import train_model


logger: logging.Logger = logging.getLogger(__name__)

model_option = click.option(
    "--model",
    "model_file",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help=f"Trained model file (default: <out>/{MODEL_FILE}).",
)


def _write_records(run: RunContext, name: str, records: List[IResultRecord[Any]]) -> Path:
    path = ResultRepository().save(run.out / name, records)
    click.echo(str(path))
    return path


@click.command()
@pass_run
def train(run: RunContext) -> None:
    """Fit a flow to the configured data and write the model file."""
    dag = get_dag(run)
    dataset, data_digest = get_dataset(run, dag)
    config = run.config.train.model_copy(update={"seed": run.seed})
    cgnf, history = train_model(dataset, dag, config, run.config.model)

    model_file = dump_cgnf(cgnf, history, data_digest, run.config.echo())
    path = ModelRepository().save(run.out / MODEL_FILE, model_file)
    frame = pd.DataFrame(
        {
            "epoch": range(len(history.train_loss)),
            "train_loss": history.train_loss,
            "valid_loss": history.valid_loss,
        }
    )
    header = run.meta(data_digest=data_digest, model_digest=digest_file(path))
    CsvRepository(header).save(run.out / "history.csv", frame)
    logger.info(
        "Training finished",
        extra={
            "best_epoch": history.best_epoch,
            "best_valid_loss": history.best_valid_loss,
            "stop_reason": str(history.stop_reason),
        },
    )
    click.echo(str(path))


@click.command()
@model_option
@click.option("--decompose", is_flag=True, help="Also check that effect components sum to the ATE.")
@pass_run
def estimate(run: RunContext, model_file: Optional[Path], decompose: bool) -> None:
    """Estimate every configured estimand from a trained model."""
    cgnf, stored = get_model(run, model_file)
    meta = run.meta(
        model_digest=digest_file(model_path(run, model_file)), data_digest=stored.data_digest
    )
    J = run.config.sampling.sample_count
    specs = run.config.estimands
    results = estimate_many(cgnf, specs, J, run.seed) if specs else []
    records: List[IResultRecord[Any]] = [IResultRecord(data=r, meta=meta) for r in results]

    if decompose:
        for spec in specs:
            if spec.kind not in (EstimandKind.NDE, EstimandKind.NIE, EstimandKind.PSE):
                continue
            report = decompose_check(
                cgnf,
                spec.treatments[0],
                spec.outcome,
                spec.mediators,
                (spec.treated[0], spec.control[0]),
                J,
                run.seed,
            )
            records.append(IResultRecord(message="Decomposition checked", data=report, meta=meta))
    _write_records(run, "results.jsonl", records)


@click.command(name="bootstrap")
@pass_run
def bootstrap_command(run: RunContext) -> None:
    """Percentile bootstrap intervals for every configured estimand."""
    dag = get_dag(run)
    dataset, data_digest = get_dataset(run, dag)
    section = run.config.bootstrap
    meta = run.meta(data_digest=data_digest)
    records: List[IResultRecord[Any]] = []
    for spec in run.config.estimands:
        result = bootstrap(
            dataset,
            dag,
            spec,
            run.config.train,
            section.replicates,
            level=section.level,
            seed=run.seed,
            sample_count=run.config.sampling.sample_count,
            architecture=run.config.model,
            workers=run.workers,
        )
        records.append(IResultRecord(message="Bootstrap interval computed", data=result, meta=meta))
    _write_records(run, "bootstrap.jsonl", records)


@click.command()
@pass_run
def sensitivity(run: RunContext) -> None:
    """Re-estimate under each assumed disturbance correlation."""
    dag = get_dag(run)
    dataset, data_digest = get_dataset(run, dag)
    meta = run.meta(data_digest=data_digest)
    records: List[IResultRecord[Any]] = []
    for spec in run.config.estimands:
        rows = sensitivity_sweep(
            dataset,
            dag,
            spec,
            run.config.train,
            run.config.sensitivity,
            run.config.sampling.sample_count,
            run.seed,
            run.config.model,
            run.workers,
        )
        for row in rows:
            records.append(
                IResultRecord(
                    message="Sensitivity point computed" if row.error is None else row.error,
                    data=row,
                    meta={**meta, "estimand": spec.label},
                    status=row.error is None,
                )
            )
    _write_records(run, "sensitivity.jsonl", records)


@click.command()
@model_option
@pass_run
def sample(run: RunContext, model_file: Optional[Path]) -> None:
    """Export draws of the configured regimes, one CSV per regime."""
    cgnf, stored = get_model(run, model_file)
    regimes = run.config.sampling.regimes or {"observational": Regime()}
    validate_regimes(cgnf.dag, regimes)
    plan = SamplePlan(
        regimes=regimes,
        sample_count=run.config.sampling.sample_count,
        seed=run.seed,
    )
    samples = sample_regimes(cgnf, plan)
    model_digest = digest_file(model_path(run, model_file))
    header = run.meta(model_digest=model_digest, data_digest=stored.data_digest)
    SampleRepository(header).export(
        run.out / "samples", samples, plan, model_digest, run.config_digest
    )
    click.echo(str(run.out / "samples"))

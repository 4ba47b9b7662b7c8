import logging
from pathlib import Path
from typing import Optional, Tuple

import click

from src.bench.dgm import simulate_dgm
from src.bench.harness import run_coverage, run_hyper_sweep, run_mce
from src.cli.common import RunContext, pass_run
from src.core.enums import DgmKind, HyperVariant
from src.repositories.reports import ReportRepository
from src.repositories.tables import CsvRepository


logger: logging.Logger = logging.getLogger(__name__)

dgm_option = click.option(
    "--dgm",
    "kind",
    type=click.Choice([k.value for k in DgmKind]),
    default=None,
    help="Benchmark model (default: bench.dgm of the config).",
)


def _kind(run: RunContext, kind: Optional[str]) -> DgmKind:
    return DgmKind(kind) if kind else run.config.bench.dgm


@click.command()
@click.argument("kind", type=click.Choice([k.value for k in DgmKind]))
@click.option("-n", "--rows", "n", type=click.IntRange(min=1), default=1000, show_default=True)
@pass_run
def simulate(run: RunContext, kind: str, n: int) -> None:
    """Write a dataset drawn from one of the benchmark models."""
    dataset = simulate_dgm(DgmKind(kind), n, run.seed)
    header = run.meta()
    header.pop("config")
    path = CsvRepository({**header, "dgm": kind, "n": n}).save(
        run.out / f"{kind}_{n}.csv", dataset.to_frame()
    )
    click.echo(str(path))


@click.command()
@dgm_option
@click.option("--sizes", type=str, default=None, help="Comma-separated sample sizes.")
@pass_run
def mce(run: RunContext, kind: Optional[str], sizes: Optional[str]) -> None:
    """Monte Carlo bias and spread of the seven benchmark estimands."""
    dgm = _kind(run, kind)
    bench = run.config.bench
    sample_sizes: Tuple[int, ...] = (
        tuple(int(s) for s in sizes.split(",")) if sizes else bench.sample_sizes
    )
    click.echo(
        f"Projected fits: {len(sample_sizes) * run.replications} "
        f"({len(sample_sizes)} sizes x {run.replications} replications)",
        err=True,
    )
    report = run_mce(
        dgm,
        sample_sizes,
        run.replications,
        run.config.train,
        run.seed,
        bench.estimands,
        run.config.sampling.sample_count,
        run.config.model,
        run.workers,
        oracle_draws=bench.oracle_draws,
    )
    paths = ReportRepository(run.meta()).save_mce(run.out, report, stem=f"mce_{dgm.value}")
    for path in paths:
        click.echo(str(path))


@click.command()
@click.option("-n", "--rows", "n", type=click.IntRange(min=1), default=None)
@click.option("--datasets", type=click.IntRange(min=1), default=None)
@pass_run
def coverage(run: RunContext, n: Optional[int], datasets: Optional[int]) -> None:
    """Bootstrap interval coverage on the coverage benchmark model."""
    bench = run.config.bench
    report = run_coverage(
        datasets or bench.coverage_datasets,
        run.config.bootstrap.replicates,
        n or bench.coverage_n,
        level=run.config.bootstrap.level,
        seed=run.seed,
        config=run.config.train,
        sample_count=run.config.sampling.sample_count,
        architecture=run.config.model,
        workers=run.workers,
    )
    header = {**run.meta(), "coverage": report.rate, "covered": report.covered}
    path = ReportRepository(header).save_coverage(run.out, report)
    click.echo(f"coverage={report.rate:.4f}", err=True)
    click.echo(str(path))


@click.command(name="hyper-sweep")
@dgm_option
@click.option("-n", "--rows", "n", type=click.IntRange(min=1), default=16000, show_default=True)
@click.option(
    "--variant",
    "variants",
    multiple=True,
    type=click.Choice([v.value for v in HyperVariant]),
    help="Variant to run; repeat for several (default: bench.variants of the config).",
)
@pass_run
def hyper_sweep(run: RunContext, kind: Optional[str], n: int, variants: Tuple[str, ...]) -> None:
    """Monte Carlo experiment under each hyper-parameter variant."""
    dgm = _kind(run, kind)
    chosen = [HyperVariant(v) for v in variants] or run.config.bench.variants
    report = run_hyper_sweep(
        dgm,
        chosen,
        n,
        run.replications,
        run.seed,
        run.config.train,
        run.config.model,
        run.config.bench.estimands,
        run.config.sampling.sample_count,
        run.workers,
        oracle_draws=run.config.bench.oracle_draws,
    )
    repository = ReportRepository(run.meta())
    for i, (variant, mce_report) in enumerate(report.reports.items()):
        for path in repository.save_mce(run.out, mce_report, stem=f"sweep_{dgm.value}_{i}"):
            click.echo(f"{variant.value}\t{path}")

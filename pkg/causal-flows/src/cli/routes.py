import logging
from pathlib import Path
from typing import Optional

import click

from src.cli.commands import bench, model
from src.cli.common import RunContext
from src.cli.handlers import ExceptionHandlingGroup
from src.core.config import settings
from src.schemas.run import load_run_config


logger: logging.Logger = logging.getLogger(__name__)


@click.group(cls=ExceptionHandlingGroup)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="YAML run configuration.",
)
@click.option("--seed", type=int, default=None, help="Overrides the configured seed.")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--paper-scale", is_flag=True, help="Use full replication counts.")
@click.version_option(settings.VERSION, prog_name=settings.PROJECT_NAME)
@click.pass_context
def cli(
    ctx: click.Context,
    config_path: Optional[Path],
    seed: Optional[int],
    workers: Optional[int],
    out: Optional[Path],
    paper_scale: bool,
) -> None:
    """Causal effect estimation with causal-graphical normalizing flows."""
    config = load_run_config(config_path)
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if workers is not None:
        overrides["workers"] = workers
    if out is not None:
        overrides["output"] = config.output.model_copy(update={"directory": out})
    ctx.obj = RunContext(config=config.model_copy(update=overrides), paper_scale=paper_scale)


# To add a command, define it under src/cli/commands and register it here
for command in (
    model.train,
    model.estimate,
    model.bootstrap_command,
    model.sensitivity,
    model.sample,
    bench.simulate,
    bench.mce,
    bench.coverage,
    bench.hyper_sweep,
):
    cli.add_command(command)

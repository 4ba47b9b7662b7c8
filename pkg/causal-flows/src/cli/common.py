from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import click

from src.core.config import settings
from src.core.digests import digest_json
from src.schemas.run import RunConfig


@dataclass
class RunContext:
    """Run configuration with the command-line overrides applied."""

    config: RunConfig
    paper_scale: bool = False

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def workers(self) -> int:
        return self.config.workers or settings.WORKERS or 1

    @property
    def out(self) -> Path:
        return self.config.output.directory

    @property
    def replications(self) -> int:
        if self.config.bench.replications:
            return self.config.bench.replications
        return settings.PAPER_REPLICATIONS if self.paper_scale else settings.DESK_REPLICATIONS

    @property
    def config_digest(self) -> str:
        return digest_json(self.config.echo())

    def meta(self, **digests: Optional[str]) -> Dict[str, Any]:
        """Config echo plus digests, attached to every output."""
        return {
            "config": self.config.echo(),
            "config_digest": self.config_digest,
            "seed": self.seed,
            **{k: v for k, v in digests.items() if v is not None},
        }


pass_run = click.make_pass_decorator(RunContext)

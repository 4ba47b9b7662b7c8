import logging
import logging.config

import yaml  # type: ignore

from src.cli.routes import cli
from src.core.config import settings


def configure_logging() -> None:
    if settings.LOGGING_CONFIG_PATH.exists():
        with open(settings.LOGGING_CONFIG_PATH) as f:
            config = yaml.safe_load(f)
        logging.config.dictConfig(config)
    else:
        print("Warning: logconfig.yml not found")  # pragma: no cover
        logging.basicConfig(level=settings.LOG_LEVEL)


def run() -> None:
    configure_logging()
    logging.getLogger(__name__).debug(f"{settings.PROJECT_NAME} {settings.VERSION} starting")
    cli(prog_name=settings.PROJECT_NAME)


if __name__ == "__main__":
    run()

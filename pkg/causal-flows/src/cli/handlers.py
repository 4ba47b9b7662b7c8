import logging
from typing import Any

import click

from src.core.exceptions import BaseEngineException
from src.schemas.common import IErrorRecord


logger: logging.Logger = logging.getLogger(__name__)


class ExceptionHandlingGroup(click.Group):
    """
    Command group that turns every failure into a JSON error record on
    stdout and a documented exit code: 2 for input errors, 1 otherwise.
    """

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except BaseEngineException as exc:
            logger.error(f"{exc.code}: {exc.message}", extra={"detail": exc.detail})
            record = IErrorRecord(message=exc.message, data=exc.as_record())
            click.echo(record.model_dump_json())
            ctx.exit(exc.exit_code)
        except Exception as exc:
            logger.exception("Unhandled error")
            record = IErrorRecord(
                message="Internal error",
                data={
                    "status": False,
                    "error": type(exc).__name__,
                    "message": str(exc),
                    "detail": "An unexpected error occurred.",
                    "exit_code": 1,
                },
            )
            click.echo(record.model_dump_json())
            ctx.exit(1)

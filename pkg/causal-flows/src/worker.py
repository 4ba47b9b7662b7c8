import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, List, Optional, Sequence, TypeVar

from src.core.config import settings
from src.core.exceptions import BaseEngineException


logger: logging.Logger = logging.getLogger(__name__)

J = TypeVar("J")
R = TypeVar("R")


@dataclass
class JobOutcome(Generic[R]):
    index: int
    value: Optional[R] = None
    error: Optional[str] = None
    error_code: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _guarded(fn: Callable[[J], R], index: int, job: J) -> JobOutcome[R]:
    try:
        return JobOutcome(index=index, value=fn(job))
    except BaseEngineException as exc:
        logger.warning(f"Job {index} failed: {exc.message}", extra={"error": exc.code})
        return JobOutcome(index=index, error=exc.message, error_code=exc.code)
    except (ArithmeticError, ValueError) as exc:
        code = type(exc).__name__
        logger.warning(f"Job {index} failed: {exc}", extra={"error": code})
        return JobOutcome(index=index, error=str(exc) or code, error_code=code)


def run_jobs(
    fn: Callable[[J], R], jobs: Sequence[J], workers: Optional[int] = None
) -> List[JobOutcome[R]]:
    """
    Run independent jobs, in a process pool when ``workers`` > 1.

    Engine errors and numerical failures (ArithmeticError, ValueError, which
    covers LinAlgError) are captured per job; other exceptions propagate. Outcomes
    come back in job order, so results do not depend on scheduling.

    Args:
        fn: Top-level (picklable) function applied to each job
        jobs: Job payloads
        workers: Pool size; defaults to settings.WORKERS
    """
    workers = min(workers or settings.WORKERS or 1, max(len(jobs), 1))
    logger.info(f"Running {len(jobs)} job(s) on {workers} worker(s)")
    if workers <= 1:
        return [_guarded(fn, i, job) for i, job in enumerate(jobs)]

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_guarded, fn, i, job) for i, job in enumerate(jobs)]
        return [f.result() for f in futures]

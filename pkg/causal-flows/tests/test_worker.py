import numpy as np
import pytest

from src.core.exceptions import NonFiniteLoss
from src.worker import run_jobs


def square(x: int) -> int:
    return x * x


def fail_on_three(x: int) -> int:
    if x == 3:
        raise NonFiniteLoss("diverged", detail=f"job={x}")
    return x


def crash(x: int) -> int:
    raise RuntimeError("bug")


def singular(x: int) -> float:
    if x == 2:
        return float(np.linalg.inv(np.zeros((2, 2)))[0, 0])
    return float(x)


class TestRunJobs:
    """Ordered job execution with per-job error capture"""

    def test_in_process(self):
        outcomes = run_jobs(square, [1, 2, 3], workers=1)

        assert [o.value for o in outcomes] == [1, 4, 9]
        assert [o.index for o in outcomes] == [0, 1, 2]

    def test_pool_keeps_job_order(self):
        outcomes = run_jobs(square, list(range(8)), workers=2)

        assert [o.value for o in outcomes] == [x * x for x in range(8)]

    def test_engine_errors_are_captured(self):
        outcomes = run_jobs(fail_on_three, [1, 3, 5], workers=1)

        assert [o.ok for o in outcomes] == [True, False, True]
        assert outcomes[1].error == "diverged"
        assert outcomes[1].error_code == "NonFiniteLoss"

    def test_numerical_failures_are_captured(self):
        outcomes = run_jobs(singular, [1, 2, 3], workers=1)

        assert [o.value for o in outcomes] == [1.0, None, 3.0]
        assert outcomes[1].error_code == "LinAlgError"

    def test_numerical_failures_are_captured_in_pool(self):
        outcomes = run_jobs(singular, [2, 4], workers=2)

        assert [o.ok for o in outcomes] == [False, True]

    def test_other_errors_propagate(self):
        with pytest.raises(RuntimeError):
            run_jobs(crash, [1], workers=1)

    def test_empty_job_list(self):
        assert run_jobs(square, [], workers=4) == []

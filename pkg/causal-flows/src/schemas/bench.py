from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from src.core.enums import DgmKind, HyperVariant, TruthSource


class TruthValue(BaseModel):
    dgm: DgmKind
    estimand: str
    value: float
    source: TruthSource
    mc_se: Optional[float] = None


class MceRow(BaseModel):
    """
    Bias and spread of one estimand at one sample size.

    ``sd`` is None when fewer than two replications succeeded.
    """

    estimand: str
    n: int = Field(..., ge=1)
    bias: float
    sd: Optional[float] = None
    replications: int = Field(..., gt=0)
    failures: int = 0
    truth: float
    truth_source: TruthSource
    estimates: List[float] = Field(default_factory=list)


class MceReport(BaseModel):
    dgm: DgmKind
    variant: HyperVariant = HyperVariant.DEFAULT
    seed: int
    rows: List[MceRow] = Field(default_factory=list)

    def row(self, estimand: str, n: int) -> MceRow:
        for r in self.rows:
            if r.estimand == estimand and r.n == n:
                return r
        raise KeyError((estimand, n))


class CoverageReport(BaseModel):
    n: int
    datasets: int
    replicates: int
    level: float
    truth: float
    covered: int
    failures: int = 0
    seed: int
    intervals: List[List[float]] = Field(default_factory=list)

    @property
    def rate(self) -> float:
        completed = self.datasets - self.failures
        return self.covered / completed if completed else 0.0


class HyperSweepReport(BaseModel):
    dgm: DgmKind
    reports: Dict[HyperVariant, MceReport] = Field(default_factory=dict)

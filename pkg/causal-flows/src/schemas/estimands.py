from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.enums import EstimandKind


class ConditioningClause(BaseModel):
    """
    Filter applied to the natural regime's samples of ``variable``.

    A discrete variable is matched on ``value``; a continuous one on the closed
    ``interval``. With neither set, the estimate is stratified (every support
    level, or ``bins`` quantile bins).
    """

    model_config = ConfigDict(frozen=True)

    variable: str
    value: Optional[float] = None
    interval: Optional[Tuple[float, float]] = None
    bins: int = Field(default=5, ge=1)

    @model_validator(mode="after")
    def check_exclusive(self) -> "ConditioningClause":
        if self.value is not None and self.interval is not None:
            raise ValueError("Give either a value or an interval, not both")
        if self.interval is not None and self.interval[0] > self.interval[1]:
            raise ValueError("Interval lower bound exceeds the upper bound")
        return self

    @property
    def is_concrete(self) -> bool:
        return self.value is not None or self.interval is not None

    def describe(self) -> str:
        if self.value is not None:
            return f"{self.variable}=={self.value:g}"
        if self.interval is not None:
            return f"{self.interval[0]:g}<={self.variable}<={self.interval[1]:g}"
        return self.variable


class EstimandSpec(BaseModel):
    """
    A named causal contrast.

    Attributes:
        kind: ATE, CATE, AJE, NDE, NIE or PSE
        name: Label used in result records
        treatments: Intervened variables (several only for AJE)
        outcome: Outcome variable
        treated: Values a* per treatment, on the data scale
        control: Values a per treatment, on the data scale
        mediators: Ordered mediators for NDE, NIE and PSE
        path_mediator: PSE stage; None selects the direct path
        condition: CATE filter
    """

    model_config = ConfigDict(frozen=True)

    kind: EstimandKind
    name: Optional[str] = None
    treatments: Tuple[str, ...] = Field(..., min_length=1)
    outcome: str
    treated: Tuple[float, ...] = (1.0,)
    control: Tuple[float, ...] = (0.0,)
    mediators: Tuple[str, ...] = ()
    path_mediator: Optional[str] = None
    condition: Optional[ConditioningClause] = None

    @field_validator("treatments", mode="before")
    @classmethod
    def coerce_treatments(cls, v: Any) -> Any:
        return (v,) if isinstance(v, str) else v

    @field_validator("treated", "control", mode="before")
    @classmethod
    def coerce_values(cls, v: Any) -> Any:
        return (v,) if isinstance(v, (int, float)) else v

    @model_validator(mode="after")
    def check_shape(self) -> "EstimandSpec":
        n = len(self.treatments)
        if len(self.treated) != n or len(self.control) != n:
            raise ValueError("treated and control need one value per treatment")
        if self.kind is not EstimandKind.AJE and n != 1:
            raise ValueError(f"{self.kind} takes exactly one treatment")
        if self.kind in (EstimandKind.NDE, EstimandKind.NIE, EstimandKind.PSE):
            if not self.mediators:
                raise ValueError(f"{self.kind} needs at least one mediator")
        if self.path_mediator is not None and self.path_mediator not in self.mediators:
            raise ValueError("path_mediator must be one of the mediators")
        if self.kind is EstimandKind.CATE and self.condition is None:
            raise ValueError("CATE needs a conditioning clause")
        return self

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        parts = [str(self.kind), *self.treatments]
        if self.kind is EstimandKind.PSE and self.path_mediator:
            parts.append(self.path_mediator)
        parts.append(self.outcome)
        return "_".join(parts)

    def with_condition(self, condition: ConditioningClause) -> "EstimandSpec":
        return self.model_copy(update={"condition": condition})


class EstimateResult(BaseModel):
    estimand: str
    kind: EstimandKind
    point: float
    mc_se: float
    sample_count: int
    conditioning_count: Optional[int] = None
    condition: Optional[str] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    level: Optional[float] = None
    replicates: Optional[List[float]] = None
    failures: int = 0
    seed: Optional[int] = None


class DecompositionReport(BaseModel):
    treatment: str
    outcome: str
    mediators: Tuple[str, ...]
    ate: EstimateResult
    components: Dict[str, EstimateResult] = Field(default_factory=dict)
    total: float
    difference: float
    tolerance: float
    holds: bool


class RhoGrid(BaseModel):
    """Correlations to try between the base disturbances of two variables."""

    variable_a: str
    variable_b: str
    rhos: Tuple[float, ...] = Field(..., min_length=1)


class SensitivityRow(BaseModel):
    variable_a: str
    variable_b: str
    rho: float
    result: Optional[EstimateResult] = None
    error: Optional[str] = None

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.config import settings
from src.schemas.graph import Regime, check_regime_references


class SamplePlan(BaseModel):
    """
    Regimes to simulate on one shared set of base draws.

    Attributes:
        regimes: Ordered label -> Regime map; FromRegime may only point backwards
        sample_count: Monte Carlo draws J per regime
        seed: Seed of the base draws
        sigma_z: Optional base correlation overriding the model's
    """

    model_config = ConfigDict(frozen=True)

    regimes: Dict[str, Regime]
    sample_count: int = Field(default_factory=lambda: settings.DEFAULT_SAMPLE_COUNT, ge=1)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    sigma_z: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_references(self) -> "SamplePlan":
        check_regime_references(self.regimes)
        return self


class SampleManifest(BaseModel):
    """Sidecar written next to exported regime samples."""

    plan: SamplePlan
    columns: List[str]
    files: Dict[str, str]
    model_digest: Optional[str] = None
    config_digest: Optional[str] = None

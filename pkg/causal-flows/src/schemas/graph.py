from typing import Annotated, Dict, Literal, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.enums import VariableKind
from src.core.exceptions import RegimeReferenceError


IDENTIFIER = r"^[A-Za-z_][A-Za-z0-9_.]*$"


class VariableSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., pattern=IDENTIFIER, description="Variable identifier")
    kind: VariableKind = VariableKind.CONTINUOUS
    support: Optional[Tuple[int, ...]] = Field(
        None, description="Sorted integer levels, discrete variables only"
    )

    @model_validator(mode="after")
    def check_support(self) -> "VariableSpec":
        if self.support is None:
            return self
        if self.kind is not VariableKind.DISCRETE:
            raise ValueError(f"{self.name}: support is only allowed for discrete variables")
        if not self.support:
            raise ValueError(f"{self.name}: discrete support must not be empty")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError(f"{self.name}: support must be strictly increasing")
        return self


class Natural(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["natural"] = "natural"


class Fixed(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["fixed"] = "fixed"
    value: float = Field(..., description="Intervention value on the data scale")


class FromRegime(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["from_regime"] = "from_regime"
    regime: str = Field(..., min_length=1, description="Label of the source regime")


Assignment = Annotated[Union[Natural, Fixed, FromRegime], Field(discriminator="kind")]


class Regime(BaseModel):
    """Per-variable assignment rules for one interventional world.

    Variables absent from ``assignments`` are Natural.
    """

    model_config = ConfigDict(frozen=True)

    assignments: Dict[str, Assignment] = Field(default_factory=dict)

    @field_validator("assignments")
    @classmethod
    def drop_naturals(cls, v: Dict[str, Assignment]) -> Dict[str, Assignment]:
        return {name: rule for name, rule in v.items() if not isinstance(rule, Natural)}

    def rule(self, name: str) -> Assignment:
        return self.assignments.get(name, Natural())

    def references(self) -> set[str]:
        return {r.regime for r in self.assignments.values() if isinstance(r, FromRegime)}


def check_regime_references(regimes: Mapping[str, Regime]) -> None:
    """
    FromRegime references must name an earlier label, which rules out cycles.

    Raises:
        RegimeReferenceError
    """
    earlier: set[str] = set()
    for label, regime in regimes.items():
        for ref in sorted(regime.references()):
            if ref not in earlier:
                raise RegimeReferenceError(
                    f"Regime {label!r} references {ref!r}, which is not an earlier regime",
                    detail=f"regime={label},reference={ref}",
                )
        earlier.add(label)

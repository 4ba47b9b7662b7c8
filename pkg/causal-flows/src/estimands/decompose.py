import logging
from typing import Dict, List, Optional, Sequence, Tuple

from src.core.config import settings
from src.core.enums import EstimandKind
from src.estimands.estimator import contrast_draws, summarize
from src.flow.cgnf import Cgnf
from src.schemas.estimands import DecompositionReport, EstimandSpec


logger: logging.Logger = logging.getLogger(__name__)


def _component_specs(
    treatment: str,
    outcome: str,
    mediators: Tuple[str, ...],
    contrasts: Tuple[float, float],
) -> Dict[str, EstimandSpec]:
    treated, control = contrasts
    common = dict(treatments=(treatment,), outcome=outcome, treated=treated, control=control)
    if len(mediators) == 1:
        return {
            "NDE": EstimandSpec(kind=EstimandKind.NDE, mediators=mediators, **common),
            "NIE": EstimandSpec(kind=EstimandKind.NIE, mediators=mediators, **common),
        }
    specs = {"PSE direct": EstimandSpec(kind=EstimandKind.PSE, mediators=mediators, **common)}
    for m in mediators:
        specs[f"PSE via {m}"] = EstimandSpec(
            kind=EstimandKind.PSE, mediators=mediators, path_mediator=m, **common
        )
    return specs


def decompose_check(
    cgnf: Cgnf,
    treatment: str,
    outcome: str,
    mediators: Sequence[str],
    contrasts: Tuple[float, float] = (1.0, 0.0),
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
) -> DecompositionReport:
    """
    Verify that the path-specific components add up to the total effect.

    With one mediator the components are NDE and NIE; with several they are
    the direct PSE plus one PSE per mediator stage. All contrasts come from
    the same base draws, so the sum matches the ATE up to rounding; the
    check allows three Monte Carlo standard errors of the ATE.
    """
    J = sample_count or settings.DEFAULT_SAMPLE_COUNT
    seed = settings.DEFAULT_SEED if seed is None else seed
    mediators = tuple(mediators)
    ate_spec = EstimandSpec(
        kind=EstimandKind.ATE,
        treatments=(treatment,),
        outcome=outcome,
        treated=contrasts[0],
        control=contrasts[1],
    )
    components = _component_specs(treatment, outcome, mediators, contrasts) if mediators else {}
    specs: List[EstimandSpec] = [ate_spec, *components.values()]
    draws = contrast_draws(cgnf, specs, J, seed)

    ate = summarize(ate_spec, draws[0], seed)
    results = {
        name: summarize(spec, d, seed)
        for (name, spec), d in zip(components.items(), draws[1:])
    }
    total = float(sum(r.point for r in results.values())) if results else ate.point
    difference = total - ate.point
    tolerance = 3.0 * ate.mc_se
    holds = abs(difference) <= tolerance + 1e-12 * max(1.0, abs(ate.point))
    if not holds:
        logger.warning(
            f"Decomposition of {treatment}->{outcome} misses the ATE by {difference:.3g}",
            extra={"tolerance": tolerance},
        )
    return DecompositionReport(
        treatment=treatment,
        outcome=outcome,
        mediators=mediators,
        ate=ate,
        components=results,
        total=total,
        difference=difference,
        tolerance=tolerance,
        holds=holds,
    )

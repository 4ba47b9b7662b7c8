import logging
from typing import Dict, Optional, Tuple

from src.core.config import settings
from src.core.enums import EstimandKind
from src.core.exceptions import InvalidMediatorOrder
from src.graph.dag import Dag, validate_regimes
from src.schemas.estimands import EstimandSpec
from src.schemas.graph import Fixed, FromRegime, Regime
from src.schemas.sampling import SamplePlan


logger: logging.Logger = logging.getLogger(__name__)

NATURAL = "natural"
TREATED = "treated"
CONTROL = "control"
UNDER_CONTROL = "a"
UNDER_TREATED = "a_star"
CROSS = "cross"


def ladder_label(j: int) -> str:
    return f"ladder_{j}"


def validate_spec(spec: EstimandSpec, dag: Dag) -> None:
    """
    Check variable names and mediator ordering against the DAG.

    Raises:
        UnknownVariable: For a name the DAG does not declare
        InvalidMediatorOrder: If mediators are not descendants of the
            treatment and ancestors of the outcome, in topological order
    """
    for name in (*spec.treatments, spec.outcome, *spec.mediators):
        dag.index(name)
    if spec.condition is not None:
        dag.index(spec.condition.variable)
    if not spec.mediators:
        return

    treatment = spec.treatments[0]
    downstream = dag.descendants(treatment)
    upstream = dag.ancestors(spec.outcome)
    for m in spec.mediators:
        if m not in downstream or m not in upstream:
            raise InvalidMediatorOrder(
                f"Mediator {m!r} must lie between {treatment!r} and {spec.outcome!r}"
            )
    position = {name: i for i, name in enumerate(dag.topo_order)}
    ranks = [position[m] for m in spec.mediators]
    if ranks != sorted(ranks) or len(set(ranks)) != len(ranks):
        raise InvalidMediatorOrder(
            f"Mediators {list(spec.mediators)} are not in topological order",
            detail=",".join(dag.topo_order),
        )


def _fixed(spec: EstimandSpec, values: Tuple[float, ...]) -> Dict[str, Fixed]:
    return {t: Fixed(value=v) for t, v in zip(spec.treatments, values)}


def regimes_for(spec: EstimandSpec) -> Dict[str, Regime]:
    """Ordered regime set whose contrast defines ``spec``."""
    kind = spec.kind
    if kind in (EstimandKind.ATE, EstimandKind.AJE, EstimandKind.CATE):
        regimes: Dict[str, Regime] = {}
        if kind is EstimandKind.CATE:
            regimes[NATURAL] = Regime()
        regimes[TREATED] = Regime(assignments=_fixed(spec, spec.treated))
        regimes[CONTROL] = Regime(assignments=_fixed(spec, spec.control))
        return regimes

    treatment = spec.treatments[0]
    a_star = Fixed(value=spec.treated[0])
    a = Fixed(value=spec.control[0])
    if kind in (EstimandKind.NDE, EstimandKind.NIE):
        copied = {m: FromRegime(regime=UNDER_CONTROL) for m in spec.mediators}
        cross = {treatment: a_star, **copied}
        return {
            UNDER_CONTROL: Regime(assignments={treatment: a}),
            UNDER_TREATED: Regime(assignments={treatment: a_star}),
            CROSS: Regime(assignments=cross),
        }

    # PSE ladder: ladder_j copies m_1..m_j from the a-world, treatment at a*
    regimes = {UNDER_CONTROL: Regime(assignments={treatment: a})}
    for j in range(len(spec.mediators), -1, -1):
        copied = {m: FromRegime(regime=UNDER_CONTROL) for m in spec.mediators[:j]}
        regimes[ladder_label(j)] = Regime(assignments={treatment: a_star, **copied})
    return regimes


def contrast_labels(spec: EstimandSpec) -> Tuple[str, str]:
    """(minuend, subtrahend) regime labels of the contrast."""
    kind = spec.kind
    if kind is EstimandKind.NDE:
        return CROSS, UNDER_CONTROL
    if kind is EstimandKind.NIE:
        return UNDER_TREATED, CROSS
    if kind is EstimandKind.PSE:
        K = len(spec.mediators)
        if spec.path_mediator is None:
            return ladder_label(K), UNDER_CONTROL
        j = spec.mediators.index(spec.path_mediator) + 1
        return ladder_label(j - 1), ladder_label(j)
    return TREATED, CONTROL


def plan_for(
    spec: EstimandSpec,
    dag: Dag,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
) -> SamplePlan:
    """
    Translate an estimand into the regimes to simulate.

    Raises:
        UnknownVariable, InvalidMediatorOrder, InvalidInterventionValue
    """
    validate_spec(spec, dag)
    regimes = regimes_for(spec)
    validate_regimes(dag, regimes)
    return SamplePlan(
        regimes=regimes,
        sample_count=sample_count or settings.DEFAULT_SAMPLE_COUNT,
        seed=settings.DEFAULT_SEED if seed is None else seed,
    )

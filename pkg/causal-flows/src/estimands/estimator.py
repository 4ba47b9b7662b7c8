import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from src.core.config import settings
from src.core.enums import EstimandKind, VariableKind
from src.core.exceptions import EmptyConditioningSet, UnsupportedEstimand
from src.estimands.planner import NATURAL, contrast_labels, plan_for
from src.flow.cgnf import Cgnf
from src.schemas.estimands import ConditioningClause, EstimandSpec, EstimateResult
from src.schemas.graph import FromRegime, Regime
from src.schemas.sampling import SamplePlan
from src.simulate.sampler import SampleSet, sample_regimes


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


def _prefixed(i: int, label: str) -> str:
    return f"{i}/{label}"


def merged_plan(
    cgnf: Cgnf, specs: Sequence[EstimandSpec], sample_count: int, seed: int
) -> SamplePlan:
    """One plan holding every spec's regimes, labels prefixed by the spec index."""
    regimes: Dict[str, Regime] = {}
    for i, spec in enumerate(specs):
        plan = plan_for(spec, cgnf.dag, sample_count, seed)
        for label, regime in plan.regimes.items():
            assignments = {
                name: FromRegime(regime=_prefixed(i, rule.regime))
                if isinstance(rule, FromRegime)
                else rule
                for name, rule in regime.assignments.items()
            }
            regimes[_prefixed(i, label)] = Regime(assignments=assignments)
    return SamplePlan(regimes=regimes, sample_count=sample_count, seed=seed)


def _contrast(samples: SampleSet, spec: EstimandSpec, i: int) -> Array:
    plus, minus = contrast_labels(spec)
    return samples.column(_prefixed(i, plus), spec.outcome) - samples.column(
        _prefixed(i, minus), spec.outcome
    )


def _mask(values: Array, clause: ConditioningClause) -> NDArray[np.bool_]:
    if clause.value is not None:
        return values == clause.value
    assert clause.interval is not None
    lo, hi = clause.interval
    return (values >= lo) & (values <= hi)


def summarize(
    spec: EstimandSpec,
    diffs: Array,
    seed: int,
    mask: Optional[NDArray[np.bool_]] = None,
) -> EstimateResult:
    J = diffs.shape[0]
    selected = diffs if mask is None else diffs[mask]
    if selected.size == 0:
        condition = spec.condition.describe() if spec.condition else ""
        raise EmptyConditioningSet(
            f"No Monte Carlo sample satisfies {condition}", detail=f"J={J}"
        )
    point = float(selected.mean())
    mc_se = float(selected.std(ddof=1) / np.sqrt(selected.size)) if selected.size > 1 else 0.0
    return EstimateResult(
        estimand=spec.label,
        kind=spec.kind,
        point=point,
        mc_se=mc_se,
        sample_count=J,
        conditioning_count=None if mask is None else int(selected.size),
        condition=None if spec.condition is None else spec.condition.describe(),
        seed=seed,
    )


def _strata(cgnf: Cgnf, spec: EstimandSpec, natural: Array) -> List[ConditioningClause]:
    assert spec.condition is not None
    clause = spec.condition
    var = cgnf.dag.spec(clause.variable)
    if var.kind is VariableKind.DISCRETE:
        support = var.support or np.unique(natural)
        return [clause.model_copy(update={"value": float(v)}) for v in support]
    edges = np.quantile(natural, np.linspace(0.0, 1.0, clause.bins + 1))
    return [
        clause.model_copy(update={"interval": (float(lo), float(hi))})
        for lo, hi in zip(edges[:-1], edges[1:])
    ]


def estimate_many(
    cgnf: Cgnf,
    specs: Sequence[EstimandSpec],
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[EstimateResult]:
    """
    Estimate several contrasts from one shared simulation.

    A CATE whose clause names no value or interval is stratified and yields
    one result per stratum.

    Raises:
        EmptyConditioningSet: If a concrete CATE clause matches no sample
    """
    if not specs:
        return []
    J = sample_count or settings.DEFAULT_SAMPLE_COUNT
    seed = settings.DEFAULT_SEED if seed is None else seed
    samples = sample_regimes(cgnf, merged_plan(cgnf, specs, J, seed))

    results: List[EstimateResult] = []
    for i, spec in enumerate(specs):
        diffs = _contrast(samples, spec, i)
        if spec.kind is not EstimandKind.CATE:
            results.append(summarize(spec, diffs, seed))
            continue
        assert spec.condition is not None
        natural = samples.column(_prefixed(i, NATURAL), spec.condition.variable)
        clauses = (
            [spec.condition] if spec.condition.is_concrete else _strata(cgnf, spec, natural)
        )
        for clause in clauses:
            concrete = spec.with_condition(clause)
            results.append(summarize(concrete, diffs, seed, _mask(natural, clause)))
    logger.info(f"Estimated {len(results)} contrast(s) with J={J}", extra={"seed": seed})
    return results


def estimate(
    cgnf: Cgnf,
    spec: EstimandSpec,
    sample_count: Optional[int] = None,
    seed: Optional[int] = None,
) -> EstimateResult:
    """
    Monte Carlo estimate of one contrast: the mean over draws of the outcome
    difference between the two regimes, with its Monte Carlo standard error.
    """
    if spec.condition is not None and not spec.condition.is_concrete:
        raise UnsupportedEstimand(
            "A stratified CATE yields several results; use estimate_many",
            detail=spec.label,
        )
    return estimate_many(cgnf, [spec], sample_count, seed)[0]


def contrast_draws(
    cgnf: Cgnf, specs: Sequence[EstimandSpec], sample_count: int, seed: int
) -> List[Array]:
    """Per-draw contrasts of unconditional specs, all from one shared simulation."""
    samples = sample_regimes(cgnf, merged_plan(cgnf, specs, sample_count, seed))
    return [_contrast(samples, spec, i) for i, spec in enumerate(specs)]

import logging
from itertools import product
from typing import Dict, Hashable, List, Optional, Tuple

import numpy as np

from src.bench.dgm import StructuralModel, model_for
from src.core.config import settings
from src.core.enums import DgmKind, EstimandKind, TruthSource
from src.core.exceptions import UnsupportedEstimand
from src.estimands.planner import contrast_labels, regimes_for, validate_spec
from src.schemas.bench import TruthValue
from src.schemas.estimands import EstimandSpec
from src.simulate.sampler import resolve_node_keys


logger: logging.Logger = logging.getLogger(__name__)

NAMED_ESTIMANDS: Dict[str, EstimandSpec] = {
    spec.label: spec
    for spec in (
        EstimandSpec(kind=EstimandKind.ATE, name="ATE_A_Y", treatments="A", outcome="Y"),
        EstimandSpec(kind=EstimandKind.PSE, name="PSE_A_Y", treatments="A", outcome="Y", mediators=("L", "M")),
        EstimandSpec(
            kind=EstimandKind.PSE, name="PSE_A_L_Y", treatments="A", outcome="Y",
            mediators=("L", "M"), path_mediator="L",
        ),
        EstimandSpec(
            kind=EstimandKind.PSE, name="PSE_A_M_Y", treatments="A", outcome="Y",
            mediators=("L", "M"), path_mediator="M",
        ),
        EstimandSpec(kind=EstimandKind.ATE, name="ATE_A_M", treatments="A", outcome="M"),
        EstimandSpec(kind=EstimandKind.NDE, name="NDE_A_M", treatments="A", outcome="M", mediators=("L",)),
        EstimandSpec(kind=EstimandKind.NIE, name="NIE_A_L_M", treatments="A", outcome="M", mediators=("L",)),
    )
}

# Reference values, kept to three decimals
PUBLISHED_TRUTHS: Dict[DgmKind, Dict[str, float]] = {
    DgmKind.LINEAR_GAUSSIAN: {
        "ATE_A_Y": 0.180, "PSE_A_Y": 0.100, "PSE_A_L_Y": 0.060, "PSE_A_M_Y": 0.020,
        "ATE_A_M": 0.150, "NDE_A_M": 0.100, "NIE_A_L_M": 0.050,
    },
    DgmKind.DISCRETE_NON_ADDITIVE: {
        "ATE_A_Y": 0.143, "PSE_A_Y": 0.109, "PSE_A_L_Y": 0.022, "PSE_A_M_Y": 0.012,
        "ATE_A_M": 0.113, "NDE_A_M": 0.092, "NIE_A_L_M": 0.020,
    },
    DgmKind.NONLINEAR_HETEROSKEDASTIC: {
        "ATE_A_Y": 0.325, "PSE_A_Y": 0.189, "PSE_A_L_Y": 0.085, "PSE_A_M_Y": 0.051,
        "ATE_A_M": 0.207, "NDE_A_M": 0.127, "NIE_A_L_M": 0.080,
    },
}


def named_estimand(name: str, model: Optional[StructuralModel] = None) -> EstimandSpec:
    try:
        spec = NAMED_ESTIMANDS[name]
    except KeyError:
        raise UnsupportedEstimand(
            f"Unknown estimand {name!r}", detail=", ".join(NAMED_ESTIMANDS)
        )
    if model is not None:
        validate_spec(spec, model.dag())
    return spec


def _outcome_keys(model: StructuralModel, spec: EstimandSpec) -> Tuple[Hashable, Hashable]:
    keys = resolve_node_keys(model.dag(), regimes_for(spec))
    plus, minus = contrast_labels(spec)
    return keys[plus][spec.outcome], keys[minus][spec.outcome]


def _natural_closure(key: Hashable, into: List[Hashable]) -> None:
    """Natural keys feeding ``key``, parents first."""
    if key[0] != "natural" or key in into:
        return
    for parent in key[2:]:
        _natural_closure(parent, into)
    into.append(key)


def analytic_mean(model: StructuralModel, key: Hashable) -> float:
    """Mean of a node when every structural mean is linear in its parents."""
    coefficients = model.linear_means()
    if coefficients is None:
        raise UnsupportedEstimand(f"{type(model).__name__} has no linear structural means")
    intercepts = model.intercepts()
    memo: Dict[Hashable, float] = {}

    def mean(k: Hashable) -> float:
        if k[0] == "fixed":
            return float(k[2])
        if k not in memo:
            name = k[1]
            total = intercepts.get(name, 0.0)
            for parent_name, parent_key in zip(model.parents[name], k[2:]):
                total += coefficients[name].get(parent_name, 0.0) * mean(parent_key)
            memo[k] = total
        return memo[k]

    return mean(key)


def enumerated_mean(model: StructuralModel, key: Hashable) -> float:
    """
    Exact mean of a node over every joint configuration of its upstream nodes.

    Distinct nodes of the same variable are treated as independent draws.
    """
    order: List[Hashable] = []
    _natural_closure(key, order)
    supports = [model.supports[k[1]] for k in order]

    def value(k: Hashable, assignment: Dict[Hashable, float]) -> float:
        return float(k[2]) if k[0] == "fixed" else assignment[k]

    expectation = 0.0
    for levels in product(*supports):
        assignment = dict(zip(order, map(float, levels)))
        prob = 1.0
        for k in order:
            parent_values = {p: value(pk, assignment) for p, pk in zip(model.parents[k[1]], k[2:])}
            prob *= model.pmf(k[1], parent_values)[int(assignment[k])]
            if prob == 0.0:
                break
        expectation += prob * value(key, assignment)
    return expectation


def monte_carlo_contrast(
    model: StructuralModel,
    plus: Hashable,
    minus: Hashable,
    draws: int,
    seed: int,
    chunk: int = 1_000_000,
) -> Tuple[float, float]:
    """Common-random-numbers estimate of E[plus - minus] and its standard error."""
    rng = np.random.default_rng(seed)
    total, total_sq, done = 0.0, 0.0, 0
    while done < draws:
        n = min(chunk, draws - done)
        noise = model.noise(n, rng)
        memo: Dict[Hashable, np.ndarray] = {}

        def evaluate(k: Hashable) -> np.ndarray:
            if k[0] == "fixed":
                return np.full(n, float(k[2]))
            if k not in memo:
                name = k[1]
                parents = {p: evaluate(pk) for p, pk in zip(model.parents[name], k[2:])}
                memo[k] = model.evaluate(name, parents, noise[name])
            return memo[k]

        diff = evaluate(plus) - evaluate(minus)
        total += float(diff.sum())
        total_sq += float(np.square(diff).sum())
        done += n
    mean = total / draws
    variance = max(total_sq / draws - mean**2, 0.0)
    return mean, float(np.sqrt(variance / draws))


def ground_truth(
    kind: DgmKind,
    estimand: str | EstimandSpec,
    draws: Optional[int] = None,
    seed: Optional[int] = None,
) -> TruthValue:
    """
    True value of a named estimand under a benchmark structural model.

    Linear models are solved by propagating means, discrete ones by full
    enumeration, the rest by a common-random-numbers Monte Carlo oracle.

    Raises:
        UnsupportedEstimand: For an unknown estimand name
    """
    model = model_for(kind)
    spec = estimand if isinstance(estimand, EstimandSpec) else named_estimand(estimand)
    validate_spec(spec, model.dag())
    plus, minus = _outcome_keys(model, spec)

    if model.linear_means() is not None:
        value = analytic_mean(model, plus) - analytic_mean(model, minus)
        return TruthValue(dgm=kind, estimand=spec.label, value=value, source=TruthSource.ANALYTIC)
    if set(model.supports) == set(model.names):
        value = enumerated_mean(model, plus) - enumerated_mean(model, minus)
        return TruthValue(dgm=kind, estimand=spec.label, value=value, source=TruthSource.ENUMERATION)

    draws = draws or settings.ORACLE_DRAWS
    seed = settings.DEFAULT_SEED if seed is None else seed
    logger.info(f"Monte Carlo oracle for {spec.label} under {kind} with {draws} draws")
    value, mc_se = monte_carlo_contrast(model, plus, minus, draws, seed)
    return TruthValue(
        dgm=kind, estimand=spec.label, value=value, source=TruthSource.MC_ORACLE, mc_se=mc_se
    )

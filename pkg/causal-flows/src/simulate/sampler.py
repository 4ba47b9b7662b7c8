import logging
from dataclasses import dataclass
from typing import Dict, Hashable, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.config import settings
from src.core.enums import VariableKind
from src.core.exceptions import ShapeMismatch
from src.flow.cgnf import Cgnf
from src.flow.inversion import invert_normalizer
from src.flow.loss import is_identity, sigma_cholesky
from src.graph.dag import Dag, validate_regimes
from src.schemas.graph import Fixed, FromRegime, Regime
from src.schemas.sampling import SamplePlan
from src.schemas.train import PreprocessInfo
from src.train.preprocess import requantize


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


@dataclass
class SampleSet:
    """
    Simulated draws for every regime of a plan.

    Attributes:
        columns: Variable names, in DAG declaration order
        regimes: Data-scale J x k matrix per regime label
        model_scale: Model-scale J x k matrix per regime label
        base: The shared J x k base normal draws
    """

    columns: Tuple[str, ...]
    regimes: Dict[str, Array]
    model_scale: Dict[str, Array]
    base: Array

    def column(self, label: str, name: str) -> Array:
        return self.regimes[label][:, self.columns.index(name)]


def sample_base(J: int, k: int, sigma_z: Optional[ArrayLike], seed: int) -> Array:
    """
    J rows i.i.d. N(0, sigma_z), via the lower Cholesky factor.

    Raises:
        SigmaNotPositiveDefinite: If sigma_z is not a valid correlation matrix
    """
    sigma = np.eye(k) if sigma_z is None else np.asarray(sigma_z, dtype=np.float64)
    if sigma.shape != (k, k):
        raise ShapeMismatch(f"sigma_z must be {k}x{k}, got {sigma.shape}")
    chol = sigma_cholesky(sigma)
    draws = np.random.default_rng(seed).standard_normal((J, k))
    if is_identity(sigma):
        return draws
    return draws @ chol.T


def _preprocess_or_identity(cgnf: Cgnf) -> PreprocessInfo:
    if cgnf.preprocess is not None:
        return cgnf.preprocess
    k = cgnf.k
    return PreprocessInfo(
        columns=cgnf.dag.names, means=(0.0,) * k, sds=(1.0,) * k, dequantized=(False,) * k
    )


def sample_regimes(cgnf: Cgnf, plan: SamplePlan) -> SampleSet:
    """
    Simulate every regime of ``plan`` on one shared set of base draws.

    Variables are visited in topological order. Natural variables invert
    their normalizer at the shared base draw given the sampled parents,
    Fixed ones take the standardized intervention value, and FromRegime
    ones copy the column of an earlier regime. A variable whose rule and
    upstream inputs match a column already computed reuses that column.

    Raises:
        RegimeReferenceError, InvalidInterventionValue, SigmaNotPositiveDefinite,
        BracketNotFound
    """
    dag = cgnf.dag
    validate_regimes(dag, plan.regimes)
    info = _preprocess_or_identity(cgnf)
    J = plan.sample_count
    sigma = cgnf.sigma_z if plan.sigma_z is None else np.asarray(plan.sigma_z)
    base = sample_base(J, cgnf.k, sigma, plan.seed)

    keys = resolve_node_keys(dag, plan.regimes)
    computed: Dict[Hashable, Array] = {}
    model_scale: Dict[str, Array] = {}
    for label, regime in plan.regimes.items():
        values = np.empty((J, cgnf.k))
        for name in dag.topo_order:
            i = dag.index(name)
            key = keys[label][name]
            if key not in computed:
                computed[key] = _sample_node(cgnf, info, name, regime, values, base[:, i])
            values[:, i] = computed[key]
        model_scale[label] = values
        logger.debug(f"Sampled regime {label!r} with J={J}")

    data_scale = {label: _to_data_scale(cgnf, info, m) for label, m in model_scale.items()}
    return SampleSet(columns=dag.names, regimes=data_scale, model_scale=model_scale, base=base)


NodeKeys = Dict[str, Dict[str, Hashable]]


def resolve_node_keys(dag: Dag, regimes: Mapping[str, Regime]) -> NodeKeys:
    """
    Identity of every (regime, variable) column: its rule plus the identities
    of its inputs. Equal keys denote the same column across regimes.
    """
    keys: NodeKeys = {}
    for label, regime in regimes.items():
        keys[label] = {}
        for name in dag.topo_order:
            keys[label][name] = _node_key(name, dag.parents[name], regime, keys, label)
    return keys


def _node_key(
    name: str,
    parents: Tuple[str, ...],
    regime: Regime,
    keys: Dict[str, Dict[str, Hashable]],
    label: str,
) -> Hashable:
    rule = regime.rule(name)
    if isinstance(rule, Fixed):
        return ("fixed", name, rule.value)
    if isinstance(rule, FromRegime):
        return keys[rule.regime][name]
    return ("natural", name) + tuple(keys[label][p] for p in parents)


def _sample_node(
    cgnf: Cgnf,
    info: PreprocessInfo,
    name: str,
    regime: Regime,
    values: Array,
    base_column: Array,
) -> Array:
    rule = regime.rule(name)
    if isinstance(rule, Fixed):
        return np.full(values.shape[0], info.standardize_value(name, rule.value))

    norm = cgnf.normalizers[name]
    parents = values[:, cgnf.parent_indices(name)]
    out = np.empty(values.shape[0])
    chunk = settings.SAMPLE_CHUNK_SIZE
    for start in range(0, values.shape[0], chunk):
        stop = start + chunk
        out[start:stop] = invert_normalizer(norm, base_column[start:stop], parents[start:stop])
    return out


def _to_data_scale(cgnf: Cgnf, info: PreprocessInfo, model_values: Array) -> Array:
    data = info.destandardize(model_values)
    for i, spec in enumerate(cgnf.dag.variables):
        if spec.kind is not VariableKind.DISCRETE:
            continue
        support = spec.support or info.supports.get(spec.name)
        if support:
            data[:, i] = requantize(data[:, i], support)
        else:
            data[:, i] = np.rint(data[:, i])
    return data


def sample_observational(cgnf: Cgnf, J: int, seed: int) -> Array:
    """J data-scale draws from the fitted joint distribution."""
    plan = SamplePlan(regimes={"observational": Regime()}, sample_count=J, seed=seed)
    return sample_regimes(cgnf, plan).regimes["observational"]

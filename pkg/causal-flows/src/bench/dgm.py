import logging
from abc import ABC, abstractmethod
from typing import ClassVar, Dict, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import special, stats

from src.core.enums import DgmKind, VariableKind
from src.core.exceptions import UnsupportedEstimand
from src.graph.dag import Dag
from src.schemas.graph import VariableSpec
from src.train.dataset import Dataset


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]

APPENDIX_PARENTS: Dict[str, Tuple[str, ...]] = {
    "C": (),
    "A": ("C",),
    "L": ("C", "A"),
    "M": ("C", "A", "L"),
    "Y": ("C", "A", "L", "M"),
}


def _categorical(u: Array, probs: Array, levels: Tuple[int, ...]) -> Array:
    """Inverse-CDF draw; ``probs`` is (n, len(levels)) or (len(levels),)."""
    cdf = np.cumsum(np.broadcast_to(probs, (u.shape[0], len(levels))), axis=1)
    index = (u[:, None] >= cdf[:, :-1]).sum(axis=1)
    return np.asarray(levels, dtype=np.float64)[index]


def _bernoulli(u: Array, p: Array) -> Array:
    return (u < p).astype(np.float64)


class StructuralModel(ABC):
    """
    Known structural equations used to generate data and exact truths.

    Each variable is a deterministic function of its parents and an
    exogenous noise draw, so interventions reuse the same noise.
    """

    kind: ClassVar[Optional[DgmKind]] = None
    parents: Dict[str, Tuple[str, ...]] = APPENDIX_PARENTS
    supports: Dict[str, Tuple[int, ...]] = {}

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self.parents)

    def dag(self) -> Dag:
        specs = [
            VariableSpec(name=n, kind=VariableKind.DISCRETE, support=self.supports[n])
            if n in self.supports
            else VariableSpec(name=n)
            for n in self.names
        ]
        return Dag.build(specs, self.parents)

    @abstractmethod
    def noise(self, n: int, rng: np.random.Generator) -> Dict[str, Array]:
        """Exogenous draws for every variable."""

    @abstractmethod
    def evaluate(self, name: str, parents: Mapping[str, Array], noise: Array) -> Array:
        """Structural equation of ``name``."""

    def pmf(self, name: str, parents: Mapping[str, float]) -> Dict[int, float]:
        raise UnsupportedEstimand(f"{type(self).__name__} has no finite support for {name!r}")

    def linear_means(self) -> Optional[Dict[str, Dict[str, float]]]:
        """Coefficients of E[V | parents] when it is linear in the parents."""
        return None

    def intercepts(self) -> Dict[str, float]:
        return {}

    def simulate(self, n: int, seed: int) -> Dataset:
        rng = np.random.default_rng(seed)
        noise = self.noise(n, rng)
        dag = self.dag()
        values: Dict[str, Array] = {}
        for name in dag.topo_order:
            values[name] = self.evaluate(
                name, {p: values[p] for p in self.parents[name]}, noise[name]
            )
        matrix = np.column_stack([values[name] for name in self.names])
        return Dataset(columns=self.names, values=matrix, specs=dag.variables)


class LinearGaussian(StructuralModel):
    kind = DgmKind.LINEAR_GAUSSIAN
    coefficients: Dict[str, Dict[str, float]] = {
        "C": {},
        "A": {"C": 0.1},
        "L": {"A": 0.2, "C": 0.2},
        "M": {"A": 0.1, "C": 0.2, "L": 0.25},
        "Y": {"A": 0.1, "C": 0.1, "M": 0.25, "L": 0.25},
    }

    def noise(self, n: int, rng: np.random.Generator) -> Dict[str, Array]:
        return {name: rng.standard_normal(n) for name in self.names}

    def evaluate(self, name: str, parents: Mapping[str, Array], noise: Array) -> Array:
        mean = sum((c * parents[p] for p, c in self.coefficients[name].items()), np.zeros_like(noise))
        return mean + noise

    def linear_means(self) -> Optional[Dict[str, Dict[str, float]]]:
        return self.coefficients


class DiscreteNonAdditive(StructuralModel):
    """C, L in {1, 2, 3}; A, M, Y binary."""

    kind = DgmKind.DISCRETE_NON_ADDITIVE
    supports = {"C": (1, 2, 3), "A": (0, 1), "L": (1, 2, 3), "M": (0, 1), "Y": (0, 1)}
    c_probs = np.array([0.3, 0.5, 0.2])
    l_probs_treated = {1: np.array([0.5, 0.3, 0.2]), 2: np.array([0.3, 0.5, 0.2]), 3: np.array([0.2, 0.3, 0.5])}
    l_probs_control = np.array([0.6, 0.2, 0.2])

    def noise(self, n: int, rng: np.random.Generator) -> Dict[str, Array]:
        return {name: rng.uniform(size=n) for name in self.names}

    def _l_probs(self, a: Array, c: Array) -> Array:
        probs = np.tile(self.l_probs_control, (a.shape[0], 1))
        for level, row in self.l_probs_treated.items():
            probs[(a == 1) & (c == level)] = row
        return probs

    def _p_one(self, name: str, v: Mapping[str, Array]) -> Array:
        if name == "A":
            return 0.3 + 0.1 * v["C"]
        if name == "M":
            return special.expit(-0.5 + 0.4 * v["A"] + 0.2 * v["C"] + 0.3 * v["L"])
        return special.expit(
            -0.5 + 0.3 * v["A"] + 0.1 * v["C"] + 0.3 * v["M"] + 0.3 * v["A"] * v["M"] + 0.3 * v["L"]
        )

    def evaluate(self, name: str, parents: Mapping[str, Array], noise: Array) -> Array:
        if name == "C":
            return _categorical(noise, self.c_probs, self.supports["C"])
        if name == "L":
            return _categorical(noise, self._l_probs(parents["A"], parents["C"]), self.supports["L"])
        return _bernoulli(noise, self._p_one(name, parents))

    def pmf(self, name: str, parents: Mapping[str, float]) -> Dict[int, float]:
        if name == "C":
            probs = self.c_probs
        elif name == "L":
            probs = self._l_probs(np.array([parents["A"]]), np.array([parents["C"]]))[0]
        else:
            p = float(self._p_one(name, {k: np.array([v]) for k, v in parents.items()})[0])
            probs = np.array([1.0 - p, p])
        return {level: float(q) for level, q in zip(self.supports[name], probs)}


def tukey_lambda_quantile(u: Array, location: Array, lam3: float = 0.3, lam4: float = 0.7) -> Array:
    """Generalized lambda quantile function with unit scale."""
    return location + (u**lam3 - (1.0 - u) ** lam4)


class NonlinearHeteroskedastic(StructuralModel):
    kind = DgmKind.NONLINEAR_HETEROSKEDASTIC
    supports = {"A": (0, 1)}

    def noise(self, n: int, rng: np.random.Generator) -> Dict[str, Array]:
        return {
            "C": stats.laplace.rvs(loc=0.0, scale=1.0, size=n, random_state=rng),
            "A": rng.uniform(size=n),
            "L": rng.uniform(size=n),
            "M": stats.t.rvs(df=10, size=n, random_state=rng),
            "Y": rng.standard_normal(n),
        }

    def evaluate(self, name: str, parents: Mapping[str, Array], noise: Array) -> Array:
        if name == "C":
            return noise
        if name == "A":
            return _bernoulli(noise, special.expit(0.1 * parents["C"]))
        a, c = parents["A"], parents["C"]
        if name == "L":
            return tukey_lambda_quantile(noise, 0.2 * a + 0.2 * c + 0.1 * a * c)
        l = parents["L"]
        if name == "M":
            return noise + 0.1 * a + 0.2 * c**2 + 0.25 * l + 0.15 * a * l
        m = parents["M"]
        mean = 0.1 * a + 0.1 * c**2 + 0.2 * m + 0.2 * a * m + 0.25 * l**2
        return mean + np.abs(c) * noise


class CoverageModel(StructuralModel):
    """C ~ Bern(0.6), A ~ Bern(0.4 + 0.2C), Y ~ N(0.2A + 0.4C, 1)."""

    kind = DgmKind.COVERAGE
    parents = {"C": (), "A": ("C",), "Y": ("C", "A")}
    supports = {"C": (0, 1), "A": (0, 1)}
    true_ate = 0.2

    def noise(self, n: int, rng: np.random.Generator) -> Dict[str, Array]:
        return {"C": rng.uniform(size=n), "A": rng.uniform(size=n), "Y": rng.standard_normal(n)}

    def evaluate(self, name: str, parents: Mapping[str, Array], noise: Array) -> Array:
        if name == "C":
            return _bernoulli(noise, np.full_like(noise, 0.6))
        if name == "A":
            return _bernoulli(noise, 0.4 + 0.2 * parents["C"])
        return 0.2 * parents["A"] + 0.4 * parents["C"] + noise

    def linear_means(self) -> Optional[Dict[str, Dict[str, float]]]:
        return {"C": {}, "A": {"C": 0.2}, "Y": {"A": 0.2, "C": 0.4}}

    def intercepts(self) -> Dict[str, float]:
        return {"C": 0.6, "A": 0.4, "Y": 0.0}


class ConfoundedGaussian(StructuralModel):
    """A = U_A, Y = beta * A + U_Y with corr(U_A, U_Y) = rho."""

    kind = DgmKind.CONFOUNDED_GAUSSIAN
    parents = {"A": (), "Y": ("A",)}

    def __init__(self, beta: float = 0.5, rho: float = 0.3):
        self.beta = beta
        self.rho = rho

    def noise(self, n: int, rng: np.random.Generator) -> Dict[str, Array]:
        cov = np.array([[1.0, self.rho], [self.rho, 1.0]])
        draws = rng.multivariate_normal(np.zeros(2), cov, size=n, method="cholesky")
        return {"A": draws[:, 0], "Y": draws[:, 1]}

    def evaluate(self, name: str, parents: Mapping[str, Array], noise: Array) -> Array:
        if name == "A":
            return noise
        return self.beta * parents["A"] + noise

    def linear_means(self) -> Optional[Dict[str, Dict[str, float]]]:
        return {"A": {}, "Y": {"A": self.beta}}

    @property
    def confounding_bias(self) -> float:
        """Observational regression slope minus the causal effect."""
        return self.rho


_MODELS = {
    DgmKind.LINEAR_GAUSSIAN: LinearGaussian,
    DgmKind.DISCRETE_NON_ADDITIVE: DiscreteNonAdditive,
    DgmKind.NONLINEAR_HETEROSKEDASTIC: NonlinearHeteroskedastic,
    DgmKind.COVERAGE: CoverageModel,
    DgmKind.CONFOUNDED_GAUSSIAN: ConfoundedGaussian,
}


def model_for(kind: DgmKind) -> StructuralModel:
    return _MODELS[DgmKind(kind)]()


def simulate_dgm(kind: DgmKind, n: int, seed: int) -> Dataset:
    """Draw n rows from one of the benchmark structural models."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    logger.debug(f"Simulating {n} rows from {kind}")
    return model_for(kind).simulate(n, seed)

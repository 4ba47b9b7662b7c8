import logging
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.digests import digest_json
from src.core.enums import VariableKind
from src.core.exceptions import (
    CycleDetected,
    DuplicateVariable,
    InvalidInterventionValue,
    UnknownVariable,
)
from src.schemas.graph import Fixed, Regime, VariableSpec, check_regime_references


logger: logging.Logger = logging.getLogger(__name__)


class Dag(BaseModel):
    """
    Causal skeleton: declared variables, their parent sets and a topological order.

    Attributes:
        variables: Variable specs in declaration order
        parents: Parent names per variable, kept in declaration order
        topo_order: Parents-before-children order, ties broken by declaration order
    """

    model_config = ConfigDict(frozen=True)

    variables: Tuple[VariableSpec, ...]
    parents: Dict[str, Tuple[str, ...]]
    topo_order: Tuple[str, ...]

    @model_validator(mode="after")
    def check_structure(self) -> "Dag":
        names = [v.name for v in self.variables]
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise DuplicateVariable(f"Variable {name!r} declared twice")
            seen.add(name)
        for child, parent_names in self.parents.items():
            if child not in seen:
                raise UnknownVariable(f"Unknown variable {child!r}")
            for p in parent_names:
                if p not in seen:
                    raise UnknownVariable(f"Unknown parent {p!r} of {child!r}")
        if sorted(self.topo_order) != sorted(names):
            raise ValueError("topo_order must be a permutation of the variable names")
        position = {name: i for i, name in enumerate(self.topo_order)}
        for child, parent_names in self.parents.items():
            for p in parent_names:
                if position[p] >= position[child]:
                    raise CycleDetected(
                        f"{p!r} does not precede {child!r} in the topological order"
                    )
        return self

    @classmethod
    def build(
        cls,
        variables: Sequence[VariableSpec | str],
        parents: Mapping[str, Iterable[str]],
    ) -> "Dag":
        """Validate a parent map and compute its deterministic topological order."""
        specs = tuple(v if isinstance(v, VariableSpec) else VariableSpec(name=v) for v in variables)
        names = [v.name for v in specs]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateVariable(f"Variable(s) declared twice: {', '.join(dupes)}")
        index = {name: i for i, name in enumerate(names)}

        normalized: Dict[str, Tuple[str, ...]] = {}
        for name in names:
            raw = set(parents.get(name, ()))
            for p in raw:
                if p not in index:
                    raise UnknownVariable(f"Unknown parent {p!r} of {name!r}")
            normalized[name] = tuple(sorted(raw, key=index.__getitem__))
        for name in parents:
            if name not in index:
                raise UnknownVariable(f"Unknown variable {name!r}")

        graph = _to_graph(names, normalized)
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            cycle = None
        if cycle:
            path = " -> ".join([edge[0] for edge in cycle] + [cycle[-1][1]])
            raise CycleDetected(f"Cycle detected: {path}", detail=path)

        order = tuple(nx.lexicographical_topological_sort(graph, key=index.__getitem__))
        return cls(variables=specs, parents=normalized, topo_order=order)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def spec(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(f"Unknown variable {name!r}")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(f"Unknown variable {name!r}")

    def edges(self) -> List[Tuple[str, str]]:
        return [(p, child) for child in self.names for p in self.parents[child]]

    def children(self, name: str) -> Tuple[str, ...]:
        self.index(name)
        return tuple(c for c in self.names if name in self.parents[c])

    def descendants(self, name: str) -> set[str]:
        self.index(name)
        return set(nx.descendants(_to_graph(self.names, self.parents), name))

    def ancestors(self, name: str) -> set[str]:
        self.index(name)
        return set(nx.ancestors(_to_graph(self.names, self.parents), name))

    def fingerprint(self) -> str:
        return digest_json({"variables": list(self.names), "edges": self.edges()})

    def with_specs(self, specs: Iterable[VariableSpec]) -> "Dag":
        """Replace variable kinds/supports, e.g. with the ones inferred from data."""
        by_name = {s.name: s for s in specs}
        for name in by_name:
            self.index(name)
        variables = tuple(by_name.get(v.name, v) for v in self.variables)
        return Dag(variables=variables, parents=dict(self.parents), topo_order=self.topo_order)


def _to_graph(names: Sequence[str], parents: Mapping[str, Sequence[str]]) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(names)
    graph.add_edges_from((p, child) for child in names for p in parents.get(child, ()))
    return graph


def topological_order(dag: Dag) -> Tuple[str, ...]:
    return dag.topo_order


def mutilate(dag: Dag, targets: Iterable[str]) -> Dag:
    """
    Remove every incoming edge of the manipulated variables.

    Args:
        dag: Source graph
        targets: Names of the variables subject to intervention

    Returns:
        A Dag identical to ``dag`` except that each target has no parents

    Raises:
        UnknownVariable: If a target is not declared
    """
    targets = set(targets)
    for t in targets:
        dag.index(t)
    parents = {name: (() if name in targets else ps) for name, ps in dag.parents.items()}
    return Dag(variables=dag.variables, parents=parents, topo_order=dag.topo_order)


def validate_regimes(dag: Dag, regimes: Mapping[str, Regime]) -> None:
    """
    Check a labelled regime set against a Dag.

    FromRegime references must name an earlier label, which rules out cycles.
    Fixed values of discrete variables must lie in their support.
    """
    for regime in regimes.values():
        for name, rule in regime.assignments.items():
            spec = dag.spec(name)
            if isinstance(rule, Fixed) and spec.kind is VariableKind.DISCRETE:
                if spec.support is not None and rule.value not in spec.support:
                    raise InvalidInterventionValue(
                        f"Fixed value {rule.value} for {name!r} is outside its support",
                        detail=f"support={list(spec.support)}",
                    )
    check_regime_references(regimes)


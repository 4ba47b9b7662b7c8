from src.graph.dag import Dag, mutilate, topological_order, validate_regimes
from src.graph.parser import load_dag, parse_dag

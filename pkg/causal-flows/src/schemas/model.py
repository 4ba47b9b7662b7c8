from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.core.config import settings
from src.graph.dag import Dag
from src.nn.serialization import NetworkState
from src.schemas.train import ArchitectureConfig, PreprocessInfo, TrainHistory


class NormalizerState(BaseModel):
    embedding: Optional[NetworkState] = None
    root_embedding: Optional[List[float]] = None
    integrand: NetworkState
    offset_weight: List[float]
    offset_bias: List[float]


class ModelFile(BaseModel):
    """
    Versioned on-disk form of a trained flow.

    The DAG fingerprint and data digest let ``estimate`` refuse a model that
    was trained on a different graph or dataset.
    """

    format_version: int = Field(default_factory=lambda: settings.MODEL_FORMAT_VERSION)
    dag: Dag
    dag_fingerprint: str
    architecture: ArchitectureConfig
    normalizers: Dict[str, NormalizerState]
    sigma_z: List[List[float]]
    preprocess: Optional[PreprocessInfo] = None
    history: Optional[TrainHistory] = None
    data_digest: Optional[str] = None
    config: Dict[str, Any] = Field(default_factory=dict)

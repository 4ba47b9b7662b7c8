import logging
from pathlib import Path
from typing import Optional, Tuple

from src.core.digests import digest_file
from src.core.exceptions import SchemaMismatch
from src.cli.common import RunContext
from src.flow.cgnf import Cgnf
from src.flow.serialization import load_cgnf
from src.graph.dag import Dag
from src.graph.parser import load_dag
from src.repositories.models import ModelRepository
from src.schemas.model import ModelFile
from src.train.dataset import Dataset, load_csv


logger: logging.Logger = logging.getLogger(__name__)

MODEL_FILE = "model.json"


def get_dag(run: RunContext) -> Dag:
    section = run.config.require_dag()
    return load_dag(section.path, section.format)


def get_dataset(run: RunContext, dag: Dag) -> Tuple[Dataset, str]:
    """Dataset aligned to ``dag`` together with the digest of its file."""
    section = run.config.require_data()
    overrides = {spec.name: spec for spec in section.variables}
    dataset = load_csv(section.path, dag, overrides)
    return dataset, digest_file(section.path)


def model_path(run: RunContext, path: Optional[Path]) -> Path:
    return Path(path) if path else run.out / MODEL_FILE


def get_model(run: RunContext, path: Optional[Path]) -> Tuple[Cgnf, ModelFile]:
    """
    Load a trained model and check it against the configured DAG and data.

    Raises:
        SchemaMismatch: If the model was trained on another graph or dataset
    """
    model_file = ModelRepository().load(model_path(run, path))
    if run.config.dag is not None:
        fingerprint = get_dag(run).fingerprint()
        if fingerprint != model_file.dag_fingerprint:
            raise SchemaMismatch(
                "Model was trained on a different DAG",
                detail=f"model={model_file.dag_fingerprint} config={fingerprint}",
            )
    if run.config.data is not None and model_file.data_digest is not None:
        current = digest_file(run.config.require_data().path)
        if current != model_file.data_digest:
            raise SchemaMismatch(
                "Model was trained on different data",
                detail=f"model={model_file.data_digest} data={current}",
            )
    return load_cgnf(model_file), model_file

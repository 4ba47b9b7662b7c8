import logging
from typing import Any, Dict, Optional

import numpy as np

from src.core.config import settings
from src.core.exceptions import SchemaMismatch
from src.flow.cgnf import Cgnf
from src.flow.normalizer import Normalizer
from src.nn.serialization import dump_network, load_network
from src.quadrature.clenshaw_curtis import clenshaw_curtis
from src.schemas.model import ModelFile, NormalizerState
from src.schemas.train import TrainHistory


logger: logging.Logger = logging.getLogger(__name__)


def _dump_normalizer(norm: Normalizer) -> NormalizerState:
    return NormalizerState(
        embedding=None if norm.embedding is None else dump_network(norm.embedding),
        root_embedding=None if norm.root_embedding is None else norm.root_embedding.tolist(),
        integrand=dump_network(norm.integrand),
        offset_weight=norm.offset_weight.tolist(),
        offset_bias=norm.offset_bias.tolist(),
    )


def dump_cgnf(
    cgnf: Cgnf,
    history: Optional[TrainHistory] = None,
    data_digest: Optional[str] = None,
    config: Optional[Dict[str, Any]] = None,
) -> ModelFile:
    return ModelFile(
        dag=cgnf.dag,
        dag_fingerprint=cgnf.dag.fingerprint(),
        architecture=cgnf.architecture,
        normalizers={name: _dump_normalizer(n) for name, n in cgnf.normalizers.items()},
        sigma_z=cgnf.sigma_z.tolist(),
        preprocess=cgnf.preprocess,
        history=history,
        data_digest=data_digest,
        config=config or {},
    )


def load_cgnf(model_file: ModelFile) -> Cgnf:
    """
    Rebuild a flow from its model file.

    Raises:
        SchemaMismatch: On an unknown format version or a fingerprint that
            does not match the stored DAG
    """
    if model_file.format_version != settings.MODEL_FORMAT_VERSION:
        raise SchemaMismatch(
            f"Model format version {model_file.format_version} is not supported",
            detail=f"expected={settings.MODEL_FORMAT_VERSION}",
        )
    if model_file.dag.fingerprint() != model_file.dag_fingerprint:
        raise SchemaMismatch("Model file DAG does not match its fingerprint")

    rule = clenshaw_curtis(model_file.architecture.quadrature_nodes)
    normalizers = {}
    for name in model_file.dag.names:
        state = model_file.normalizers.get(name)
        if state is None:
            raise SchemaMismatch(f"Model file has no normalizer for {name!r}")
        normalizers[name] = Normalizer(
            embedding=None if state.embedding is None else load_network(state.embedding),
            root_embedding=(
                None if state.root_embedding is None else np.asarray(state.root_embedding)
            ),
            integrand=load_network(state.integrand),
            offset_weight=np.asarray(state.offset_weight, dtype=np.float64),
            offset_bias=np.asarray(state.offset_bias, dtype=np.float64),
            rule=rule,
        )
    return Cgnf(
        dag=model_file.dag,
        normalizers=normalizers,
        architecture=model_file.architecture,
        sigma_z=np.asarray(model_file.sigma_z, dtype=np.float64),
        preprocess=model_file.preprocess,
    )

import logging
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.enums import StopReason
from src.core.exceptions import NonFiniteEvaluation, NonFiniteLoss
from src.flow.cgnf import Cgnf, build_cgnf
from src.flow.loss import loss_gradients, nll, sigma_cholesky
from src.graph.dag import Dag
from src.nn.optimizers import OptimizerState, optimizer_step
from src.schemas.train import ArchitectureConfig, TrainConfig, TrainHistory
from src.train.dataset import Dataset
from src.train.early_stopping import EarlyStopping
from src.train.preprocess import prepare, split


logger: logging.Logger = logging.getLogger(__name__)

Array = NDArray[np.float64]


def fit(cgnf: Cgnf, dataset: Dataset, config: TrainConfig) -> Tuple[Cgnf, TrainHistory]:
    """
    Train a flow by mini-batch descent on the mean negative log-likelihood.

    Discrete columns are dequantized once, every column is standardized, and
    a seeded validation split drives early stopping. The returned flow holds
    the parameters of the best validation epoch.

    Args:
        cgnf: Initial flow; it is copied, not modified
        dataset: Data-scale observations covering every DAG variable
        config: Optimisation settings

    Returns:
        The trained flow and its per-epoch history

    Raises:
        NonFiniteLoss: If a batch loss or gradient is not finite
    """
    data = dataset.align(cgnf.dag)
    model = cgnf.copy()
    model.dag = cgnf.dag.with_specs(data.specs)
    values, model.preprocess = prepare(data, config.seed)
    sigma_cholesky(model.sigma_z)

    train_rows, valid_rows = split(data.n, config.validation_fraction, config.seed)
    train_values, valid_values = values[train_rows], values[valid_rows]
    shuffle_rng = np.random.default_rng([config.seed, 0x5F1, 1])

    params = model.parameters()
    state = OptimizerState(kind=config.optimizer, learning_rate=config.learning_rate)
    stopper = EarlyStopping(patience=config.patience_epochs)
    history = TrainHistory()
    checkpoint: List[Array] = [p.copy() for p in params]

    logger.info(
        f"Training on {len(train_rows)} rows, validating on {len(valid_rows)} rows",
        extra={"batch_size": config.batch_size, "learning_rate": config.learning_rate},
    )
    for epoch in range(config.max_epochs):
        order = shuffle_rng.permutation(len(train_rows))
        epoch_total = 0.0
        for batch_index, start in enumerate(range(0, len(order), config.batch_size)):
            batch = train_values[order[start : start + config.batch_size]]
            try:
                loss, grads = loss_gradients(model, batch, scale=1.0 / batch.shape[0])
                finite = np.isfinite(loss.total) and all(np.all(np.isfinite(g)) for g in grads)
            except NonFiniteEvaluation:
                finite = False
            if not finite:
                raise NonFiniteLoss(
                    f"Loss diverged at epoch {epoch}, batch {batch_index}",
                    detail=f"epoch={epoch},batch={batch_index}",
                )
            optimizer_step(state, params, grads)
            epoch_total += loss.total

        train_loss = epoch_total / len(train_rows)
        valid_loss = _mean_nll(model, valid_values)
        if not np.isfinite(valid_loss):
            raise NonFiniteLoss(
                f"Validation loss is not finite at epoch {epoch}", detail=f"epoch={epoch}"
            )
        history.train_loss.append(train_loss)
        history.valid_loss.append(valid_loss)
        logger.info(
            "epoch",
            extra={"epoch": epoch, "train_loss": train_loss, "valid_loss": valid_loss},
        )
        if stopper(valid_loss, epoch):
            checkpoint = [p.copy() for p in params]
        if stopper.early_stop:
            history.stop_reason = StopReason.PATIENCE
            break
    else:
        history.stop_reason = StopReason.MAX_EPOCHS

    model.load_parameters(checkpoint)
    history.best_epoch = stopper.best_epoch
    logger.info(
        f"Training stopped ({history.stop_reason}) after {len(history.valid_loss)} epochs",
        extra={"best_epoch": history.best_epoch, "best_valid_loss": history.best_valid_loss},
    )
    return model, history


def _mean_nll(model: Cgnf, values: Array, chunk: int = 4096) -> float:
    total = 0.0
    for start in range(0, values.shape[0], chunk):
        try:
            total += nll(model, values[start : start + chunk]).total
        except NonFiniteEvaluation:
            return float("inf")
    return total / values.shape[0]


def train_model(
    dataset: Dataset,
    dag: Dag,
    config: TrainConfig,
    architecture: Optional[ArchitectureConfig] = None,
    sigma_z: Optional[ArrayLike] = None,
) -> Tuple[Cgnf, TrainHistory]:
    """Initialize a flow from ``config.seed`` and fit it."""
    data = dataset.align(dag)
    cgnf = build_cgnf(
        dag.with_specs(data.specs), architecture, seed=config.seed, sigma_z=sigma_z
    )
    return fit(cgnf, data, config)

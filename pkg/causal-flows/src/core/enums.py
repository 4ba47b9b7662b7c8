# pragma: no cover start
from enum import Enum


class BaseEnum(str, Enum):
    def __str__(self) -> str:
        return str.__str__(self)


class VariableKind(BaseEnum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class DagFormat(BaseEnum):
    EDGE_LIST = "edge_list"
    ADJACENCY_MATRIX = "adjacency_matrix"


class Activation(BaseEnum):
    IDENTITY = "identity"
    RELU = "relu"
    ELU_PLUS = "elu_plus"


class OptimizerKind(BaseEnum):
    SGD = "sgd"
    ADAM = "adam"


class StopReason(BaseEnum):
    PATIENCE = "patience"
    MAX_EPOCHS = "max_epochs"


class EstimandKind(BaseEnum):
    ATE = "ATE"
    CATE = "CATE"
    AJE = "AJE"
    NDE = "NDE"
    NIE = "NIE"
    PSE = "PSE"


class DgmKind(BaseEnum):
    LINEAR_GAUSSIAN = "linear_gaussian"
    DISCRETE_NON_ADDITIVE = "discrete_non_additive"
    NONLINEAR_HETEROSKEDASTIC = "nonlinear_heteroskedastic"
    COVERAGE = "coverage"
    CONFOUNDED_GAUSSIAN = "confounded_gaussian"


class TruthSource(BaseEnum):
    ANALYTIC = "analytic"
    ENUMERATION = "enumeration"
    MC_ORACLE = "mc_oracle"


class HyperVariant(BaseEnum):
    DEFAULT = "default"
    ONE_LESS_LAYER = "default - one hidden layer"
    QUARTER_FEWER_NODES = "default - 1/4 of nodes"
    BATCH_512 = "batch size of 512"
    LEARNING_RATE_1E3 = "learning rate of 0.001"


# pragma: no cover stop

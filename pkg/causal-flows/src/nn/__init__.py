from src.nn.activations import elu_plus, relu
from src.nn.network import DenseNet, backward, forward, init_network, predict
from src.nn.optimizers import OptimizerState, optimizer_step
from src.nn.serialization import NetworkState, dump_network, load_network

from src.flow.cgnf import Cgnf, build_cgnf, flow_forward, identity_cgnf
from src.flow.inversion import invert_normalizer
from src.flow.loss import LossBreakdown, loss_gradients, nll, sigma_cholesky
from src.flow.normalizer import Normalizer, normalizer_forward
from src.flow.serialization import dump_cgnf, load_cgnf

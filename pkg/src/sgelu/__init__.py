"""From-scratch MLP training library built around the SGELU activation."""

__version__ = "0.1.0"

from .activations import ActivationKind, act_backward, act_forward, tabulate
from .mathcore import Rng, erf, matmul, std_normal_cdf
from .network import (
    AdamState,
    Network,
    adam_step,
    backward,
    evaluate,
    forward,
    init_network,
    mse_loss,
)

__all__ = [
    "ActivationKind", "act_forward", "act_backward", "tabulate",
    "Rng", "erf", "matmul", "std_normal_cdf",
    "Network", "AdamState", "init_network", "forward", "backward",
    "mse_loss", "adam_step", "evaluate",
    "__version__",
]

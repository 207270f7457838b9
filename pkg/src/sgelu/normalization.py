"""The two batch-level normalizers the experiments contrast.

BatchNormPre standardizes pre-activations per neuron with learnable
gamma/beta and running statistics for evaluation. MinMaxPost rescales
post-activations to [0, 1] per neuron using only the current batch's min
and max; it keeps no state between batches, which is why its forward cost
is so much lower than BN's.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass
class BatchNormPre:
    width: int
    eps: float = 1e-5
    momentum: float = 0.9
    gamma: np.ndarray = field(init=False)
    beta: np.ndarray = field(init=False)
    running_mean: np.ndarray = field(init=False)
    running_var: np.ndarray = field(init=False)

    def __post_init__(self):
        self.gamma = np.ones(self.width)
        self.beta = np.zeros(self.width)
        self.running_mean = np.zeros(self.width)
        self.running_var = np.ones(self.width)


@dataclass
class MinMaxPost:
    eps: float = 1e-8


def bn_forward(z, bn, train):
    """Standardize per column; returns (out, cache). Eval uses running stats."""
    if train:
        if z.shape[0] < 2:
            raise ConfigurationError("batch norm needs batch size >= 2 in train mode")
        mean = z.mean(axis=0)
        var = z.var(axis=0)
        inv_std = 1.0 / np.sqrt(var + bn.eps)
        zhat = (z - mean) * inv_std
        bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * mean
        bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * var
        cache = (zhat, inv_std, bn.gamma)
        return bn.gamma * zhat + bn.beta, cache
    zhat = (z - bn.running_mean) / np.sqrt(bn.running_var + bn.eps)
    return bn.gamma * zhat + bn.beta, None


def bn_backward(dout, cache):
    """Exact gradients of the train-mode transform: (dz, dgamma, dbeta)."""
    zhat, inv_std, gamma = cache
    n = zhat.shape[0]
    dgamma = (dout * zhat).sum(axis=0)
    dbeta = dout.sum(axis=0)
    dzhat = dout * gamma
    dz = (inv_std / n) * (
        n * dzhat - dzhat.sum(axis=0) - zhat * (dzhat * zhat).sum(axis=0)
    )
    return dz, dgamma, dbeta


def minmax_forward(a, mm, stats=None):
    """Rescale each column of the batch to [0, 1]; returns (out, cache).

    `stats` overrides the batch min/max (used by the finite-difference
    gradient checker, which must see the same frozen statistics the
    stop-gradient backward assumes).
    """
    if a.shape[0] < 2 and stats is None:
        raise ConfigurationError("min-max normalization needs batch size >= 2")
    if stats is None:
        mn = a.min(axis=0)
        mx = a.max(axis=0)
    else:
        mn, mx = stats
    inv_range = 1.0 / (mx - mn + mm.eps)
    return (a - mn) * inv_range, (mn, mx, inv_range)


def minmax_backward(dout, cache):
    """Stop-gradient backward: batch min/max treated as constants."""
    _, _, inv_range = cache
    return dout * inv_range


def time_normalizers(width, batch, iters, seed=0):
    """Median wall-clock cost per element of each forward pass, in ns."""
    if min(width, batch, iters) < 1:
        raise ConfigurationError("width, batch and iters must all be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((batch, width))
    bn = BatchNormPre(width)
    mm = MinMaxPost()
    bn_times, mm_times = [], []
    for _ in range(iters):
        t0 = time.perf_counter()
        bn_forward(z, bn, train=True)
        t1 = time.perf_counter()
        minmax_forward(z, mm)
        t2 = time.perf_counter()
        bn_times.append(t1 - t0)
        mm_times.append(t2 - t1)
    scale = 1e9 / (width * batch)
    return float(np.median(bn_times) * scale), float(np.median(mm_times) * scale)


def write_timing_csv(path, rows):
    """Timing CSV: normalizer,width,batch,ns_per_element."""
    with open(path, "w") as fh:
        fh.write("normalizer,width,batch,ns_per_element\n")
        for name, width, batch, ns in rows:
            fh.write(f"{name},{width},{batch},{ns:.6g}\n")

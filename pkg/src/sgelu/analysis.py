"""Post-training analyses: KS normality of weights, weight histograms,
finite-difference gradient certification, and the single-neuron
weight-update demonstration of why symmetry helps on the negative axis.
"""

import copy
from dataclasses import dataclass

import numpy as np

from . import activations as act
from . import network as nn
from .errors import ConfigurationError
from .mathcore import std_normal_cdf
from .normalization import BatchNormPre

KS_CRITICAL_COEFF = 1.36  # asymptotic coefficient at significance 0.05


@dataclass
class KSResult:
    n: int
    statistic: float
    critical_value: float
    passes: bool
    sample_mean: float
    sample_std: float


def ks_normal_test(samples):
    """One-sample KS test against N(mean, std) estimated from the sample.

    Parameters are estimated rather than Lilliefors-corrected, which
    inflates pass rates; that matches the plain test being reproduced.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    n = x.size
    if n < 8:
        raise ConfigurationError(f"KS test needs at least 8 samples, got {n}")
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    if std <= 0.0:
        raise ConfigurationError("KS test on a zero-variance sample")
    z = np.sort((x - mean) / std)
    cdf = std_normal_cdf(z)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    statistic = float(max(d_plus, d_minus))
    critical = KS_CRITICAL_COEFF / np.sqrt(n)
    return KSResult(n, statistic, float(critical), statistic < critical, mean, std)


def test_all_layers(net):
    """KS-test each hidden layer's flattened weights (output layer excluded)."""
    results = []
    for i, layer in enumerate(net.layers[:-1]):
        results.append((i, ks_normal_test(layer.weights)))
    return results


def weight_histogram(net, layer, bins):
    """Equal-width histogram of one layer's weights: (counts, bin_edges)."""
    if not 0 <= layer < len(net.layers):
        raise ConfigurationError(
            f"layer index {layer} out of range for {len(net.layers)} layers"
        )
    if bins < 2:
        raise ConfigurationError(f"need at least 2 bins, got {bins}")
    w = net.layers[layer].weights.ravel()
    counts, edges = np.histogram(w, bins=bins, range=(w.min(), w.max()))
    return counts, edges


def _loss_with_frozen_minmax(net, x, y, minmax_stats):
    y_pred, _ = nn.forward(net, x, train=True, minmax_stats=minmax_stats)
    loss, _ = nn.mse_loss(y_pred, y)
    return loss


def gradient_check(net, x, y, h=1e-5, corrupt=None):
    """Compare backward() with central finite differences, parameter by
    parameter; returns (max relative error, its location string).

    Min-max statistics are frozen at the unperturbed forward's values so
    the differences probe exactly the function the stop-gradient backward
    differentiates. `corrupt` = (param_idx, flat_idx, factor) scales one
    analytical gradient entry, detector-sanity testing only.
    """
    if h <= 0:
        raise ConfigurationError("finite-difference step must be positive")
    ps = nn.params(net)
    if sum(p.size for p in ps) > 10_000:
        raise ConfigurationError("gradient_check is for small networks (<= 1e4 params)")

    saved_bn = [
        (copy.deepcopy(l.normalizer.running_mean), copy.deepcopy(l.normalizer.running_var))
        if isinstance(l.normalizer, BatchNormPre) else None
        for l in net.layers
    ]
    y_pred, trace = nn.forward(net, x, train=True)
    _, dloss = nn.mse_loss(y_pred, y)
    analytic = nn.backward(net, trace, dloss)
    if corrupt is not None:
        pi, fi, factor = corrupt
        analytic[pi].ravel()[fi] *= factor
    frozen = {
        i: (c[0], c[1]) for i, c in enumerate(trace.mm_cache) if c is not None
    }

    names = nn.param_names(net)
    worst, worst_loc = 0.0, ""
    for pi, p in enumerate(ps):
        flat = p.ravel()
        a_flat = analytic[pi].ravel()
        for fi in range(flat.size):
            orig = flat[fi]
            flat[fi] = orig + h
            lp = _loss_with_frozen_minmax(net, x, y, frozen)
            flat[fi] = orig - h
            lm = _loss_with_frozen_minmax(net, x, y, frozen)
            flat[fi] = orig
            numeric = (lp - lm) / (2.0 * h)
            denom = max(abs(a_flat[fi]), abs(numeric))
            err = abs(a_flat[fi] - numeric) if denom < 1e-8 \
                else abs(a_flat[fi] - numeric) / denom
            if err > worst:
                worst = err
                idx = np.unravel_index(fi, p.shape)
                worst_loc = f"{names[pi]}[{','.join(map(str, idx))}]"

    for layer, saved in zip(net.layers, saved_bn):
        if saved is not None:
            layer.normalizer.running_mean, layer.normalizer.running_var = saved
    return worst, worst_loc


def weight_update_demo(kind, w0, x, target, lr, steps):
    """Plain gradient descent on a single neuron y = f(w x), bias fixed 0.

    Returns rows (step, w, z, y, |target - y|); row 0 is the initial state.
    The gradient is -(target - y) f'(z) x, the single-layer chain rule.
    """
    w = float(w0)
    rows = []
    for step in range(steps + 1):
        z = w * x
        y = act.act_forward(kind, z)
        err = target - y
        rows.append((step, w, z, y, abs(err)))
        grad = -err * act.act_backward(kind, z) * x
        w -= lr * grad
    return rows


def write_ks_csv(path, results):
    """KS report CSV: layer,n,statistic,critical,passes."""
    with open(path, "w") as fh:
        fh.write("layer,n,statistic,critical,passes\n")
        for layer, r in results:
            fh.write(
                f"{layer},{r.n},{r.statistic:.10g},{r.critical_value:.10g},"
                f"{int(r.passes)}\n"
            )


def write_histogram_csv(path, counts, edges):
    with open(path, "w") as fh:
        fh.write("bin_left,bin_right,count\n")
        for i, c in enumerate(counts):
            fh.write(f"{edges[i]:.10g},{edges[i + 1]:.10g},{c}\n")


def write_demo_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("step,w,z,y,abs_error\n")
        for step, w, z, y, e in rows:
            fh.write(f"{step},{w:.10g},{z:.10g},{y:.10g},{e:.10g}\n")

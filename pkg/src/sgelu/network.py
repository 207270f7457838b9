"""Dense feed-forward networks with manual backpropagation.

A layer computes z = x W^T + b, optionally standardizes z (BatchNormPre),
applies its activation, optionally rescales the result to [0, 1]
(MinMaxPost), and optionally drops units (inverted dropout). The backward
pass mirrors that chain exactly; gradients are certified against finite
differences in the analysis module.
"""

from dataclasses import dataclass, field

import numpy as np

from . import activations as act
from .errors import ConfigurationError
from .mathcore import check_finite
from .normalization import (
    BatchNormPre,
    MinMaxPost,
    bn_backward,
    bn_forward,
    minmax_backward,
    minmax_forward,
)


@dataclass
class LayerSpec:
    """Construction recipe for one layer."""

    width: int
    activation: act.ActivationKind
    normalizer: str | None = None  # None | "batchnorm" | "minmax"
    dropout_p: float = 0.0


@dataclass
class DenseLayer:
    weights: np.ndarray  # (fan_out, fan_in)
    bias: np.ndarray  # (fan_out,)
    activation: act.ActivationKind
    normalizer: object = None  # None | BatchNormPre | MinMaxPost
    dropout_p: float = 0.0

    @property
    def fan_in(self):
        return self.weights.shape[1]

    @property
    def fan_out(self):
        return self.weights.shape[0]


@dataclass
class Network:
    input_dim: int
    layers: list[DenseLayer] = field(default_factory=list)


@dataclass
class ForwardTrace:
    """Everything backward() needs, cached per layer during forward()."""

    x_in: list  # layer inputs
    z: list  # pre-activations as seen by the activation (post-BN)
    bn_cache: list
    mm_cache: list
    drop_mask: list
    output: np.ndarray = None


def init_network(input_dim, layer_specs, rng):
    """Glorot-normal weights, zero biases; deterministic per seed."""
    if not layer_specs:
        raise ConfigurationError("network needs at least one layer")
    net = Network(input_dim=input_dim)
    fan_in = input_dim
    for i, spec in enumerate(layer_specs):
        last = i == len(layer_specs) - 1
        if spec.normalizer == "minmax" and last:
            raise ConfigurationError("min-max normalization is not allowed on the output layer")
        std = np.sqrt(2.0 / (fan_in + spec.width))
        w = rng.normal(spec.width * fan_in, 0.0, std).reshape(spec.width, fan_in)
        if spec.normalizer == "batchnorm":
            norm = BatchNormPre(spec.width)
        elif spec.normalizer == "minmax":
            norm = MinMaxPost()
        elif spec.normalizer is None:
            norm = None
        else:
            raise ConfigurationError(f"unknown normalizer '{spec.normalizer}'")
        if not 0.0 <= spec.dropout_p < 1.0:
            raise ConfigurationError(f"dropout_p must be in [0, 1), got {spec.dropout_p}")
        net.layers.append(
            DenseLayer(w, np.zeros(spec.width), spec.activation, norm, spec.dropout_p)
        )
        fan_in = spec.width
    return net


def forward(net, x_batch, train, rng=None, minmax_stats=None):
    """Run the network; returns (y_pred, trace).

    `minmax_stats` optionally maps layer index -> (min, max) arrays to
    freeze min-max statistics (finite-difference checking only).
    """
    x = np.asarray(x_batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ConfigurationError(
            f"input shape {x.shape} does not match input_dim={net.input_dim}"
        )
    trace = ForwardTrace([], [], [], [], [])
    for i, layer in enumerate(net.layers):
        trace.x_in.append(x)
        z = x @ layer.weights.T + layer.bias
        bn_cache = None
        if isinstance(layer.normalizer, BatchNormPre):
            z, bn_cache = bn_forward(z, layer.normalizer, train)
        a = act.act_forward(layer.activation, z)
        mm_cache = None
        if isinstance(layer.normalizer, MinMaxPost):
            stats = None if minmax_stats is None else minmax_stats.get(i)
            a, mm_cache = minmax_forward(a, layer.normalizer, stats=stats)
        mask = None
        if layer.dropout_p > 0.0 and train:
            a, mask = dropout(a, layer.dropout_p, train=True, rng=rng)
        check_finite(a, f"activation in layer {i}", layer=i)
        trace.z.append(z)
        trace.bn_cache.append(bn_cache)
        trace.mm_cache.append(mm_cache)
        trace.drop_mask.append(mask)
        x = a
    trace.output = x
    return x, trace


def mse_loss(y_pred, y_true):
    """Mean over all elements of 0.5 (pred - true)^2, plus its gradient."""
    y_pred = np.asarray(y_pred, dtype=np.float64)
    y_true = np.asarray(y_true, dtype=np.float64)
    if y_pred.shape != y_true.shape:
        raise ConfigurationError(
            f"prediction shape {y_pred.shape} != target shape {y_true.shape}"
        )
    diff = y_pred - y_true
    loss = 0.5 * np.mean(diff * diff)
    return float(loss), diff / diff.size


def backward(net, trace, dloss):
    """Exact gradients of the loss w.r.t. every parameter.

    Returns a list of arrays in the order params() yields them.
    """
    if len(trace.x_in) != len(net.layers):
        raise ConfigurationError("trace does not match network depth")
    grads = [None] * len(net.layers)
    d = np.asarray(dloss, dtype=np.float64)
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        if trace.drop_mask[i] is not None:
            d = d * trace.drop_mask[i]
        if trace.mm_cache[i] is not None:
            d = minmax_backward(d, trace.mm_cache[i])
        dz = d * act.act_backward(layer.activation, trace.z[i])
        layer_grads = {}
        if trace.bn_cache[i] is not None:
            dz, dgamma, dbeta = bn_backward(dz, trace.bn_cache[i])
            layer_grads["gamma"] = dgamma
            layer_grads["beta"] = dbeta
        layer_grads["W"] = dz.T @ trace.x_in[i]
        layer_grads["b"] = dz.sum(axis=0)
        grads[i] = layer_grads
        d = dz @ layer.weights
    flat = []
    for i, layer in enumerate(net.layers):
        flat.append(grads[i]["W"])
        flat.append(grads[i]["b"])
        if isinstance(layer.normalizer, BatchNormPre):
            flat.append(grads[i]["gamma"])
            flat.append(grads[i]["beta"])
    return flat


def params(net):
    """Trainable arrays, in the fixed order backward() emits gradients."""
    out = []
    for layer in net.layers:
        out.append(layer.weights)
        out.append(layer.bias)
        if isinstance(layer.normalizer, BatchNormPre):
            out.append(layer.normalizer.gamma)
            out.append(layer.normalizer.beta)
    return out


def param_names(net):
    out = []
    for i, layer in enumerate(net.layers):
        out.append(f"layer{i}.W")
        out.append(f"layer{i}.b")
        if isinstance(layer.normalizer, BatchNormPre):
            out.append(f"layer{i}.gamma")
            out.append(f"layer{i}.beta")
    return out


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, param_list, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            m=[np.zeros_like(p) for p in param_list],
            v=[np.zeros_like(p) for p in param_list],
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )


def adam_step(param_list, grad_list, state):
    """One standard Adam update, in place; returns (params, state)."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for i, (p, g) in enumerate(zip(param_list, grad_list)):
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return param_list, state


def dropout(a, p_drop, train, rng=None):
    """Inverted dropout; identity in eval mode."""
    if not 0.0 <= p_drop < 1.0:
        raise ConfigurationError(f"p_drop must be in [0, 1), got {p_drop}")
    a = np.asarray(a, dtype=np.float64)
    if not train or p_drop == 0.0:
        return a, np.ones_like(a)
    keep = 1.0 - p_drop
    flat = np.array([rng.uniform() for _ in range(a.size)])
    mask = (flat >= p_drop).astype(np.float64).reshape(a.shape) / keep
    return a * mask, mask


def evaluate(net, x, y_true, task):
    """Eval-mode metrics: (loss, accuracy) for 'classify', (loss, None) else."""
    y_pred, _ = forward(net, x, train=False)
    loss, _ = mse_loss(y_pred, y_true)
    if task == "classify":
        acc = float(np.mean(np.argmax(y_pred, axis=1) == np.argmax(y_true, axis=1)))
        return loss, acc
    return loss, None


def save_network(path, net):
    """Serialize to .npz (weights, biases, activations, normalizer state)."""
    payload = {"input_dim": np.array(net.input_dim), "n_layers": np.array(len(net.layers))}
    for i, layer in enumerate(net.layers):
        payload[f"W{i}"] = layer.weights
        payload[f"b{i}"] = layer.bias
        payload[f"act{i}"] = np.array(layer.activation.name)
        payload[f"alpha{i}"] = np.array(layer.activation.alpha)
        payload[f"dropout{i}"] = np.array(layer.dropout_p)
        norm = layer.normalizer
        if isinstance(norm, BatchNormPre):
            payload[f"norm{i}"] = np.array("batchnorm")
            payload[f"gamma{i}"] = norm.gamma
            payload[f"beta{i}"] = norm.beta
            payload[f"rmean{i}"] = norm.running_mean
            payload[f"rvar{i}"] = norm.running_var
        elif isinstance(norm, MinMaxPost):
            payload[f"norm{i}"] = np.array("minmax")
        else:
            payload[f"norm{i}"] = np.array("none")
    np.savez(path, **payload)


def load_network(path):
    with np.load(path) as data:
        net = Network(input_dim=int(data["input_dim"]))
        for i in range(int(data["n_layers"])):
            kind = act.ActivationKind(str(data[f"act{i}"]), float(data[f"alpha{i}"]))
            norm_name = str(data[f"norm{i}"])
            if norm_name == "batchnorm":
                norm = BatchNormPre(int(data[f"b{i}"].shape[0]))
                norm.gamma = data[f"gamma{i}"].copy()
                norm.beta = data[f"beta{i}"].copy()
                norm.running_mean = data[f"rmean{i}"].copy()
                norm.running_var = data[f"rvar{i}"].copy()
            elif norm_name == "minmax":
                norm = MinMaxPost()
            else:
                norm = None
            net.layers.append(
                DenseLayer(
                    data[f"W{i}"].copy(), data[f"b{i}"].copy(), kind, norm,
                    float(data[f"dropout{i}"]),
                )
            )
    return net

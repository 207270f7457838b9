"""Elementwise activation functions with exact analytical derivatives.

The compared units are SGELU (alpha * x * erf(x/sqrt(2)), an even
function), GELU (x * Phi(x)), ReLU, ELU and LiSHT (x * tanh(x)). Linear
and Sigmoid are included for output layers.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .mathcore import SQRT2, erf, std_normal_cdf, std_normal_pdf

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class ActivationKind:
    """Tagged activation choice; alpha is only meaningful for sgelu/elu."""

    name: str
    alpha: float = 1.0

    def __post_init__(self):
        if self.name not in _FORWARD:
            raise ConfigurationError(f"unknown activation '{self.name}'")
        if self.name in ("sgelu", "elu") and not self.alpha > 0:
            raise ConfigurationError(
                f"{self.name} needs alpha > 0, got {self.alpha}"
            )

    def __str__(self):
        if self.name in ("sgelu", "elu"):
            return f"{self.name}(alpha={self.alpha:g})"
        return self.name


def sgelu(alpha=0.1):
    return ActivationKind("sgelu", alpha)


def gelu():
    return ActivationKind("gelu")


def relu():
    return ActivationKind("relu")


def elu(alpha=1.0):
    return ActivationKind("elu", alpha)


def lisht():
    return ActivationKind("lisht")


def linear():
    return ActivationKind("linear")


def sigmoid():
    return ActivationKind("sigmoid")


def by_name(name, alpha=None):
    """Resolve a CLI-style name; alpha defaults per kind (SGELU: 0.1)."""
    name = name.lower()
    if name == "sgelu":
        return sgelu(0.1 if alpha is None else alpha)
    if name == "elu":
        return elu(1.0 if alpha is None else alpha)
    return ActivationKind(name)


def _stable_sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


_FORWARD = {
    "sgelu": lambda x, a: a * x * erf(x / SQRT2),
    "gelu": lambda x, a: x * std_normal_cdf(x),
    "relu": lambda x, a: np.maximum(0.0, x),
    "elu": lambda x, a: np.where(x > 0, x, a * np.expm1(np.minimum(x, 0.0))),
    "lisht": lambda x, a: x * np.tanh(x),
    "linear": lambda x, a: x,
    "sigmoid": lambda x, a: _stable_sigmoid(x),
}


def _sgelu_grad(x, a):
    return a * (erf(x / SQRT2) + x * _SQRT_2_OVER_PI * np.exp(-0.5 * np.square(x)))


def _lisht_grad(x, a):
    t = np.tanh(x)
    return t + x * (1.0 - t * t)


def _sigmoid_grad(x, a):
    s = _stable_sigmoid(x)
    return s * (1.0 - s)


_BACKWARD = {
    "sgelu": _sgelu_grad,
    "gelu": lambda x, a: std_normal_cdf(x) + x * std_normal_pdf(x),
    # ReLU'(0) := 0 (subgradient convention)
    "relu": lambda x, a: np.where(x > 0, 1.0, 0.0),
    "elu": lambda x, a: np.where(x > 0, 1.0, a * np.exp(np.minimum(x, 0.0))),
    "lisht": _lisht_grad,
    "linear": lambda x, a: np.ones_like(x),
    "sigmoid": _sigmoid_grad,
}


def act_forward(kind, x):
    """Apply the activation elementwise; float in, float out."""
    if np.isscalar(x):
        return float(_FORWARD[kind.name](np.array([x], dtype=np.float64), kind.alpha)[0])
    return _FORWARD[kind.name](np.asarray(x, dtype=np.float64), kind.alpha)


def act_backward(kind, x):
    """Analytical derivative of act_forward, elementwise."""
    if np.isscalar(x):
        return float(_BACKWARD[kind.name](np.array([x], dtype=np.float64), kind.alpha)[0])
    return _BACKWARD[kind.name](np.asarray(x, dtype=np.float64), kind.alpha)


def tabulate(kind, xmin, xmax, n):
    """(n, 3) array of (x, f(x), f'(x)) rows on an even grid."""
    if not xmin < xmax:
        raise ConfigurationError(f"need xmin < xmax, got [{xmin}, {xmax}]")
    if n < 2:
        raise ConfigurationError(f"need n >= 2 grid points, got {n}")
    xs = np.linspace(xmin, xmax, n)
    return np.column_stack([xs, act_forward(kind, xs), act_backward(kind, xs)])


def write_table_csv(path, table):
    """Tabulation CSV: header x,f,df, 10 significant digits."""
    with open(path, "w") as fh:
        fh.write("x,f,df\n")
        for x, f, df in table:
            fh.write(f"{x:.10g},{f:.10g},{df:.10g}\n")

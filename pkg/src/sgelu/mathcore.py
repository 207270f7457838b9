"""Deterministic numeric primitives: erf, normal CDF/PDF, matmul, seeded RNG.

Everything here works on 64-bit floats. Matrices are plain 2-D numpy
arrays; `matrix()` and `check_finite()` enforce the invariants the rest of
the library relies on.
"""

import math

import numpy as np

from .errors import ConfigurationError, NumericalDivergenceError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# erf(x) = x * P(x^2) on |x| < 1.25: truncated Maclaurin series of
# (2/sqrt(pi)) * sum (-1)^n x^(2n+1) / (n! (2n+1)); truncation error < 3e-12.
_ERF_SMALL = [
    1.1283791670955126, -0.37612638903183754, 0.11283791670955126,
    -0.026866170645131252, 0.005223977625442188, -0.0008548327023450853,
    0.00012055332981789664, -1.492565035840625e-05, 1.6462114365889248e-06,
    -1.6365844691234924e-07, 1.4807192815879218e-08, -1.2290555301717928e-09,
    9.422759064650411e-11, -6.7113668551641105e-12, 4.4632242632864775e-13,
    -2.7835162072109215e-14,
]

# erf(x) = 1 - exp(-x^2) * T(u) on 1.25 <= x < 6, u = (2x - 7.25) / 4.75:
# Chebyshev fit of erfc(x) exp(x^2), abs error in erf < 1e-14.
_ERF_CHEB = [
    0.18659851271938355, -0.1240962932880018, 0.03970075380145645,
    -0.01226817670034353, 0.003673542190089446, -0.001068683734929625,
    0.00030270712773841093, -8.363977771974433e-05, 2.257954480210589e-05,
    -5.963964196522265e-06, 1.5431377658151178e-06, -3.9155802393482963e-07,
    9.752833858778583e-08, -2.3866443681438525e-08, 5.742612522458682e-09,
    -1.359587341560218e-09, 3.1693214352719923e-10, -7.278382002175233e-11,
    1.647680371497813e-11, -3.676196968307343e-12, 8.097744927900107e-13,
    -1.7239166042976152e-13, 3.713942956023808e-14,
]


def erf(x):
    """Gaussian error function, elementwise; |abs error| < 1e-11.

    Accepts a float or an ndarray and returns the same kind. Saturates to
    +/-1 for |x| >= 6 (true value is within 2e-17 of that).
    """
    scalar = np.isscalar(x)
    ax = np.abs(np.asarray(x, dtype=np.float64))
    out = np.ones_like(ax)

    small = ax < 1.25
    if small.any():
        s = ax[small]
        s2 = s * s
        p = np.full_like(s2, _ERF_SMALL[-1])
        for c in reversed(_ERF_SMALL[:-1]):
            p = p * s2 + c
        out[small] = s * p

    mid = (ax >= 1.25) & (ax < 6.0)
    if mid.any():
        m = ax[mid]
        u = (2.0 * m - 7.25) / 4.75
        # Clenshaw recurrence for the Chebyshev part
        b1 = np.zeros_like(u)
        b2 = np.zeros_like(u)
        for c in reversed(_ERF_CHEB[1:]):
            b1, b2 = 2.0 * u * b1 - b2 + c, b1
        t = u * b1 - b2 + _ERF_CHEB[0]
        out[mid] = 1.0 - np.exp(-m * m) * t

    out = np.copysign(out, np.asarray(x, dtype=np.float64))
    return float(out) if scalar else out


def std_normal_cdf(x):
    """P(Z <= x) for standard normal Z: 0.5 * (1 + erf(x / sqrt(2)))."""
    if np.isscalar(x):
        return 0.5 * (1.0 + erf(x / SQRT2))
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=np.float64) / SQRT2))


def std_normal_pdf(x):
    x = x if np.isscalar(x) else np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * np.square(x)) * INV_SQRT_2PI


def matrix(data):
    """Coerce to a 2-D float64 array, validating shape and finiteness."""
    m = np.asarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ConfigurationError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ConfigurationError(f"matrix dimensions must be positive, got {m.shape}")
    check_finite(m)
    return m


def check_finite(m, context="matrix", layer=None):
    if not np.all(np.isfinite(m)):
        raise NumericalDivergenceError(f"non-finite values in {context}", layer=layer)


def matmul(a, b):
    """Plain matrix product with an explicit shape check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[0]:
        raise ConfigurationError(
            f"matmul shape mismatch: {a.shape} x {b.shape}"
        )
    return a @ b


class Rng:
    """xorshift64* generator with Box-Muller normal sampling.

    Written out in full so identical seeds give identical streams on every
    platform. Single-owner: never share one instance across threads.
    """

    _MASK64 = 0xFFFFFFFFFFFFFFFF

    def __init__(self, seed):
        # splitmix-style scramble so small seeds don't start near zero
        s = (int(seed) + 0x9E3779B97F4A7C15) & self._MASK64
        s = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK64
        s = ((s ^ (s >> 27)) * 0x94D049BB133111EB) & self._MASK64
        self.state = (s ^ (s >> 31)) or 0x2545F4914F6CDD1D

    def next_u64(self):
        s = self.state
        s ^= (s >> 12)
        s = (s ^ (s << 25)) & self._MASK64
        s ^= (s >> 27)
        self.state = s
        return (s * 0x2545F4914F6CDD1D) & self._MASK64

    def uniform(self):
        # in (0, 1): top 53 bits, offset by half an ulp so log() is safe
        return ((self.next_u64() >> 11) + 0.5) / 9007199254740992.0

    def randint(self, n):
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def normal(self, n, mean=0.0, std=1.0):
        """n draws from N(mean, std^2) via Box-Muller, as a float64 array."""
        if std < 0:
            raise ConfigurationError(f"std must be >= 0, got {std}")
        out = np.empty(2 * ((n + 1) // 2))
        for i in range(0, len(out), 2):
            u1, u2 = self.uniform(), self.uniform()
            r = math.sqrt(-2.0 * math.log(u1))
            out[i] = r * math.cos(2.0 * math.pi * u2)
            out[i + 1] = r * math.sin(2.0 * math.pi * u2)
        return out[:n] * std + mean

    def permutation(self, n):
        """Fisher-Yates permutation of range(n)."""
        idx = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.randint(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx

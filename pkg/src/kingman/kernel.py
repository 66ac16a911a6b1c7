"""Bessel kernel of the Kingman algebra, the mixing law of its cosine variable,
and the matching Gauss-Jacobi quadrature.

For an order ``s >= -1/2`` the kernel

    Lambda_s(x) = Gamma(s+1) J_s(x) / (x/2)^s

is the ordinary characteristic function of a symmetric law F_s on [-1, 1].
F_s has density proportional to ``(1 - u^2)^(s - 1/2)``, i.e. it is the law of
``2B - 1`` with ``B ~ Beta(s + 1/2, s + 1/2)``.  This density is obtained by
matching characteristic functions (Poisson's integral for J_s), not read off
a formula; at ``s = -1/2`` it degenerates to the fair coin on {-1, +1} and
``Lambda_{-1/2} = cos``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_jacobi

from kingman.rng import as_generator

# Power series is used up to this argument; beyond it, Miller's backward
# recurrence.  At x = 8 the largest series term is ~1e2, so cancellation costs
# about two digits.
SERIES_MAX_X = 8.0
SERIES_MAX_TERMS = 200
SERIES_RTOL = 1e-16

_RESCALE_AT = 1e250


@dataclass(frozen=True)
class KingmanOrder:
    """Order ``s`` of the Kingman convolution; ``delta = 2(s+1)`` is the dimension."""

    s: float
    delta: float = field(init=False)

    def __post_init__(self):
        s = float(self.s)
        if not math.isfinite(s) or s < -0.5:
            raise ValueError(f"Kingman order requires finite s >= -1/2, got {self.s!r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "delta", 2.0 * (s + 1.0))

    @classmethod
    def from_delta(cls, delta: float) -> "KingmanOrder":
        return cls(delta / 2.0 - 1.0)

    @property
    def integer_dimension(self) -> int | None:
        """``delta`` as an int when it is one (to 1e-12), else None."""
        d = round(self.delta)
        return int(d) if abs(self.delta - d) <= 1e-12 else None


def as_order(order) -> KingmanOrder:
    if isinstance(order, KingmanOrder):
        return order
    return KingmanOrder(order)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a rule normalized against the F_s law."""

    order: KingmanOrder
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("quadrature nodes must be strictly increasing")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("quadrature weights must be positive and sum to 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def expect(self, f) -> float:
        """Approximate ``E f(theta_s)``."""
        return float(np.dot(self.weights, f(self.nodes)))


def _check_argument(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("Bessel kernel argument must be finite")
    if np.any(x < 0):
        raise ValueError("Bessel kernel argument must be nonnegative")
    return x


def _series_terms(s: float, xmax: float) -> int:
    """Number of series terms for arguments up to ``xmax``.

    Terms are increasing in x, so the stopping test is made on the largest
    argument: stop once the term falls below ``SERIES_RTOL`` (the kernel is
    bounded by 1, so this is an absolute tolerance).
    """
    q = 0.25 * xmax * xmax
    term = 1.0
    for k in range(1, SERIES_MAX_TERMS):
        term *= q / (k * (s + k))
        if term < SERIES_RTOL:
            return k
    return SERIES_MAX_TERMS


def _lambda_series(s: float, x: np.ndarray) -> np.ndarray:
    # Sum_k (-1)^k Gamma(s+1) / (k! Gamma(s+k+1)) (x/2)^(2k), i.e. the Bessel
    # series with the (x/2)^s factor divided out term by term; Horner form.
    q = -0.25 * x * x
    total = np.ones_like(x)
    for k in range(_series_terms(s, float(x.max())), 0, -1):
        total *= q
        total *= 1.0 / (k * (s + k))
        total += 1.0
    return total


def _start_index(xmax: float) -> int:
    n = int(xmax + 30.0 + 10.0 * xmax ** (1.0 / 3.0))
    return n + (n % 2)


def _lambda_recurrence(s: float, x: np.ndarray) -> np.ndarray:
    """Miller backward recurrence for J_{s+n}, normalized by Gegenbauer's sum

        (x/2)^s = Gamma(s+1) J_s + sum_{k>=1} (s+2k) Gamma(s+k)/k! J_{s+2k},

    which yields Lambda_s = Gamma(s+1) J_s / (x/2)^s as a ratio of the
    unnormalized sequence.  Needs x > 0.
    """
    n_start = _start_index(float(x.max()))
    # overflow is checked every `stride` steps; growth per step is below `growth`
    growth = 2.0 * (abs(s) + n_start) / float(x.min()) + 1.0
    stride = max(1, int(40.0 / math.log10(growth)))
    inv_x = 2.0 / x
    f_next = np.zeros_like(x)
    f = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for n in range(n_start, 0, -1):
        # here f ~ J_{s+n}, f_next ~ J_{s+n+1}
        if n % 2 == 0:
            k = n // 2
            norm += (s + 2 * k) * math.exp(gammaln(s + k) - gammaln(k + 1)) * f
        f_prev = (s + n) * inv_x * f
        f_prev -= f_next
        f_next, f = f, f_prev
        if n % stride:
            continue
        big = np.abs(f) > _RESCALE_AT
        if np.any(big):
            f[big] /= _RESCALE_AT
            f_next[big] /= _RESCALE_AT
            norm[big] /= _RESCALE_AT
    g0 = math.gamma(s + 1.0)
    norm += g0 * f
    return g0 * f / norm


def lambda_kernel(order, x):
    """Kernel ``Lambda_s(x) = Gamma(s+1) J_s(x) / (x/2)^s``, with value 1 at 0.

    Vectorized over ``x``; scalar input returns a float.
    """
    s = as_order(order).s
    x_arr = _check_argument(x)
    flat = np.atleast_1d(x_arr).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_MAX_X
    if np.any(small):
        out[small] = _lambda_series(s, flat[small])
    if np.any(~small):
        out[~small] = _lambda_recurrence(s, flat[~small])
    out = out.reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_j(order, x):
    """Bessel function of the first kind ``J_s(x)`` for ``x >= 0``."""
    s = as_order(order).s
    x_arr = _check_argument(x)
    lam = np.asarray(lambda_kernel(s, x_arr))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_scale = s * np.log(0.5 * x_arr) - gammaln(s + 1.0)
    out = lam * np.exp(log_scale)
    zero = x_arr == 0
    if np.any(zero):
        out = np.where(zero, 1.0 if s == 0 else (0.0 if s > 0 else np.inf), out)
    return float(out) if np.ndim(out) == 0 else out


def sample_theta(order, rng=None, size=None):
    """Draw from F_s, the symmetric law on [-1, 1] whose ch.f. is Lambda_s."""
    s = as_order(order).s
    rng = as_generator(rng)
    if s == -0.5:
        return 2.0 * rng.integers(0, 2, size=size) - 1.0
    a = s + 0.5
    return 2.0 * rng.beta(a, a, size=size) - 1.0


def gauss_jacobi_rule(order, n: int) -> QuadratureRule:
    """``n``-point Gauss rule for the normalized ``(1-u^2)^(s-1/2)`` weight.

    Exact for polynomials of degree ``<= 2n - 1``.  At ``s = -1/2`` the law is
    the two-point coin and the rule is {-1, +1} with weights 1/2 whatever ``n``.
    """
    order = as_order(order)
    if int(n) != n or n < 1:
        raise ValueError(f"quadrature size must be a positive integer, got {n!r}")
    if order.s == -0.5:
        return QuadratureRule(order, np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    alpha = order.s - 0.5
    nodes, weights = roots_jacobi(int(n), alpha, alpha)
    return QuadratureRule(order, nodes, weights / weights.sum())

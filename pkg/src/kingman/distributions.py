"""Rayleigh and Rayleighian laws on the nonnegative orthant.

The Rayleigh law sigma_s has density

    2 (s+1)^(s+1) / Gamma(s+1) * x^(2s+1) * exp(-(s+1) x^2),   x > 0,

so ``X^2 ~ Gamma(shape=s+1, rate=s+1)`` and ``E X^2 = 1``.  Its radial ch.f.
is ``exp(-t^2 / (4(s+1)))``.

A Rayleighian law is a product of scaled Rayleigh laws.  It is parametrized
here by its Levy-Khinchine scale vector ``lam``: the law with scales ``lam``
has radial ch.f. ``exp(-1/2 sum_j lam_j^2 t_j^2)``, which makes coordinate j
the law of ``lam_j * sqrt(2(s+1)) * X`` with ``X ~ sigma_s``.  Use
:meth:`RayleighianLaw.from_rayleigh_scales` to build the plain product
``T_c1 sigma_s x ... x T_ck sigma_s`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from kingman.kernel import KingmanOrder, as_order
from kingman.rng import as_generator


@dataclass(frozen=True)
class RayleighLaw:
    order: KingmanOrder

    def __post_init__(self):
        object.__setattr__(self, "order", as_order(self.order))


@dataclass(frozen=True)
class RayleighianLaw:
    order: KingmanOrder
    scales: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "order", as_order(self.order))
        scales = np.atleast_1d(np.asarray(self.scales, dtype=float))
        if scales.ndim != 1 or scales.size < 1:
            raise ValueError("Rayleighian scales must be a nonempty vector")
        if not np.all(np.isfinite(scales)) or np.any(scales < 0):
            raise ValueError("Rayleighian scales must be finite and nonnegative")
        object.__setattr__(self, "scales", scales)

    @property
    def dim(self) -> int:
        return self.scales.size

    @property
    def rayleigh_scales(self) -> np.ndarray:
        """Factors ``c_j`` with coordinate j distributed as ``T_{c_j} sigma_s``."""
        return self.scales * math.sqrt(self.order.delta)

    @classmethod
    def from_rayleigh_scales(cls, order, c) -> "RayleighianLaw":
        order = as_order(order)
        return cls(order, np.asarray(c, dtype=float) / math.sqrt(order.delta))


def _law(law) -> RayleighLaw:
    return law if isinstance(law, RayleighLaw) else RayleighLaw(as_order(law))


def rayleigh_density(law, x):
    s = _law(law).order.s
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("Rayleigh density is defined for x >= 0")
    log_const = math.log(2.0) + (s + 1.0) * math.log(s + 1.0) - gammaln(s + 1.0)
    with np.errstate(divide="ignore"):
        logpdf = log_const + (2.0 * s + 1.0) * np.log(x) - (s + 1.0) * x * x
    out = np.exp(logpdf)
    if 2.0 * s + 1.0 == 0:
        # s = -1/2: the x^0 factor is 1 at the origin too
        out = np.where(x == 0, math.exp(log_const), out)
    return float(out) if out.ndim == 0 else out


def rayleigh_cdf(law, x):
    """Closed-form CDF: regularized lower incomplete gamma ``P(s+1, (s+1) x^2)``."""
    s = _law(law).order.s
    x = np.asarray(x, dtype=float)
    out = gammainc(s + 1.0, (s + 1.0) * np.maximum(x, 0.0) ** 2)
    return float(out) if out.ndim == 0 else out


def sample_rayleigh(law, rng=None, size=None):
    s = _law(law).order.s
    rng = as_generator(rng)
    return np.sqrt(rng.gamma(s + 1.0, 1.0 / (s + 1.0), size=size))


def rayleigh_radchf(law, t):
    s = _law(law).order.s
    t = np.asarray(t, dtype=float)
    out = np.exp(-t * t / (4.0 * (s + 1.0)))
    return float(out) if out.ndim == 0 else out


def rayleighian_radchf(law: RayleighianLaw, t):
    """``exp(-1/2 sum_j lam_j^2 t_j^2)``; ``t`` has shape ``(k,)`` or ``(m, k)``."""
    t = np.asarray(t, dtype=float)
    if t.shape[-1] != law.dim:
        raise ValueError(f"argument has dimension {t.shape[-1]}, law has {law.dim}")
    out = np.exp(-0.5 * np.sum((law.scales * t) ** 2, axis=-1))
    return float(out) if out.ndim == 0 else out


def kdim_rayleigh_density(order, x):
    """Density of the k-fold product ``sigma_s x ... x sigma_s``; ``x`` is ``(..., k)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("k-dimensional Rayleigh density needs nonnegative coordinates")
    return np.prod(rayleigh_density(order, x), axis=-1)


def sample_rayleighian(law: RayleighianLaw, rng=None, size: int | None = None):
    """Rows of independent coordinates ``lam_j sqrt(2(s+1)) X_j``, ``X_j ~ sigma_s``.

    Returns shape ``(k,)`` when ``size`` is None, else ``(size, k)``.
    """
    rng = as_generator(rng)
    shape = (law.dim,) if size is None else (int(size), law.dim)
    return law.rayleigh_scales * sample_rayleigh(law.order, rng, size=shape)

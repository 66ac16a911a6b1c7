"""Radial characteristic functions.

The k-dimensional radial ch.f. of a law G on the orthant is

    G^(t) = E prod_j Lambda_s(t_j X_j),

which equals the ordinary Fourier transform of the symmetric law of
``(theta_1 X_1, ..., theta_k X_k)`` with independent ``theta_j ~ F_s``
(:func:`embed_fsk`).  Convolution in the Kingman algebra becomes pointwise
multiplication of radial ch.f.s.

Infinitely divisible laws are described by a :class:`LevyPair` ``[M, lam]``
with ``M`` a finite atomic Levy measure, and

    -log G^(t) = 1/2 sum_j lam_j^2 t_j^2
                 + sum_i m_i (1 - prod_j Lambda_s(t_j x_ij)) (1 + |x_i|^2) / |x_i|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from kingman.convolution import SampleBatch, convolve_batches
from kingman.kernel import KingmanOrder, as_order, lambda_kernel, sample_theta
from kingman.rng import as_generator

GRID_VALUES = (0.25, 0.5, 1.0, 2.0, 4.0)


def default_grid(k: int, values=GRID_VALUES) -> np.ndarray:
    """Tensor grid ``values^k`` as an ``(len(values)^k, k)`` array."""
    mesh = np.meshgrid(*([np.asarray(values, dtype=float)] * k), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _as_grid(t, k: int) -> tuple[np.ndarray, bool]:
    t = np.asarray(t, dtype=float)
    single = t.ndim <= 1
    t = np.atleast_2d(t)
    if t.shape[-1] != k:
        raise ValueError(f"argument has dimension {t.shape[-1]}, expected {k}")
    return t, single


@dataclass
class LevyPair:
    """Pair ``[M, lam]``: atoms ``x_i`` with masses ``m_i``, Rayleighian scales ``lam``."""

    order: KingmanOrder
    lam: np.ndarray
    atoms: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.order = as_order(self.order)
        self.lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        k = self.lam.size
        atoms = np.asarray(self.atoms, dtype=float)
        self.atoms = atoms.reshape(-1, k) if atoms.size else np.zeros((0, k))
        self.masses = np.atleast_1d(np.asarray(self.masses, dtype=float)).ravel()

    @property
    def dim(self) -> int:
        return self.lam.size

    @property
    def is_trivial(self) -> bool:
        return not np.any(self.lam) and self.masses.size == 0

    @property
    def jump_rates(self) -> np.ndarray:
        """Masses reweighted by ``(1 + |x|^2) / |x|^2``; the compound-Poisson rates."""
        sq = np.sum(self.atoms**2, axis=1)
        return self.masses * (1.0 + sq) / sq

    def scaled(self, tau: float) -> "LevyPair":
        """Pair of ``mu_tau``: masses times tau, scales times sqrt(tau)."""
        return LevyPair(self.order, self.lam * math.sqrt(tau), self.atoms.copy(), self.masses * tau)

    def to_dict(self) -> dict:
        return {
            "s": self.order.s,
            "k": self.dim,
            "lambda": self.lam.tolist(),
            "atoms": [{"x": x.tolist(), "m": float(m)} for x, m in zip(self.atoms, self.masses)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LevyPair":
        atoms = d.get("atoms", [])
        k = int(d["k"])
        pair = cls(
            KingmanOrder(d["s"]),
            d["lambda"],
            np.array([a["x"] for a in atoms], dtype=float).reshape(-1, k),
            np.array([a["m"] for a in atoms], dtype=float),
        )
        if pair.dim != k:
            raise ValueError(f"'lambda' has {pair.dim} entries but k = {k}")
        return pair


class LevyCheck(NamedTuple):
    ok: bool
    reason: str

    def __bool__(self):
        return self.ok


def check_levy_measure(pair: LevyPair) -> LevyCheck:
    """Validate ``[M, lam]``; returns ``(ok, reason)``, truthy iff valid."""
    k = pair.dim
    if k < 1:
        return LevyCheck(False, "dimension must be at least 1")
    if not np.all(np.isfinite(pair.lam)) or np.any(pair.lam < 0):
        return LevyCheck(False, "lambda entries must be finite and nonnegative")
    if pair.atoms.shape != (pair.masses.size, k):
        return LevyCheck(False, f"atoms have shape {pair.atoms.shape}, expected ({pair.masses.size}, {k})")
    if not np.all(np.isfinite(pair.atoms)) or np.any(pair.atoms < 0):
        return LevyCheck(False, "atom locations must lie in the closed nonnegative orthant")
    if not np.all(np.isfinite(pair.masses)) or np.any(pair.masses <= 0):
        return LevyCheck(False, "atom masses must be finite and positive")
    sq = np.sum(pair.atoms**2, axis=1)
    if np.any(sq == 0):
        return LevyCheck(False, "Levy measure puts mass at the origin")
    integral = float(np.sum(pair.masses * sq / (1.0 + sq)))
    if not math.isfinite(integral):
        return LevyCheck(False, "integral of |x|^2/(1+|x|^2) dM is not finite")
    return LevyCheck(True, "ok")


def _require_valid(pair: LevyPair):
    check = check_levy_measure(pair)
    if not check:
        raise ValueError(f"invalid Levy pair: {check.reason}")


def levy_exponent(pair: LevyPair, t):
    """``-log`` of the radial ch.f. of ``[M, lam]`` at ``t`` (shape ``(k,)`` or ``(m, k)``)."""
    _require_valid(pair)
    grid, single = _as_grid(t, pair.dim)
    if np.any(grid < 0):
        raise ValueError("radial ch.f. arguments must be nonnegative")
    out = 0.5 * np.sum((pair.lam * grid) ** 2, axis=1)
    if pair.masses.size:
        prod = np.ones((grid.shape[0], pair.masses.size))
        for j in range(pair.dim):
            prod *= lambda_kernel(pair.order, np.outer(grid[:, j], pair.atoms[:, j]))
        out = out + (1.0 - prod) @ pair.jump_rates
    return float(out[0]) if single else out


def levy_khinchine_radchf(pair: LevyPair, t):
    value = np.exp(-np.asarray(levy_exponent(pair, t)))
    return float(value) if value.ndim == 0 else value


def _kernel_products(order, data: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """``prod_j Lambda_s(t_j x_j)`` for every grid point (rows) and sample (columns)."""
    cache: dict[tuple[int, float], np.ndarray] = {}
    out = np.empty((grid.shape[0], data.shape[0]))
    for g, t in enumerate(grid):
        prod = np.ones(data.shape[0])
        for j, tj in enumerate(t):
            key = (j, float(tj))
            if key not in cache:
                cache[key] = lambda_kernel(order, tj * data[:, j])
            prod *= cache[key]
        out[g] = prod
    return out


def radchf_empirical(batch: SampleBatch, t, return_se: bool = False):
    """Empirical radial ch.f. ``mean_rows prod_j Lambda_s(t_j x_j)``.

    With ``return_se`` also returns the standard error of each estimate.
    """
    grid, single = _as_grid(t, batch.dim)
    if np.any(grid < 0):
        raise ValueError("radial ch.f. arguments must be nonnegative")
    vals = _kernel_products(batch.order, batch.data, grid)
    mean = vals.mean(axis=1)
    if single:
        mean = float(mean[0])
    if not return_se:
        return mean
    se = vals.std(axis=1) / math.sqrt(batch.n)
    return mean, (float(se[0]) if single else se)


def embed_fsk(batch: SampleBatch, rng=None) -> np.ndarray:
    """Sample of ``F_{s,k}(G)``: each coordinate times an independent ``theta_s``."""
    rng = as_generator(rng)
    return batch.data * sample_theta(batch.order, rng, size=batch.data.shape)


def chf_empirical(x, t, return_se: bool = False):
    """Empirical Fourier ch.f. ``mean exp(i <t, row>)`` of signed samples ``x``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    grid, single = _as_grid(t, x.shape[1])
    mean = np.empty(grid.shape[0], dtype=complex)
    se = np.empty(grid.shape[0])
    for g, tv in enumerate(grid):
        phase = x @ tv
        c, s = np.cos(phase), np.sin(phase)
        mean[g] = complex(c.mean(), s.mean())
        se[g] = math.sqrt((c.var() + s.var()) / x.shape[0])
    if single:
        mean, se = complex(mean[0]), float(se[0])
    return (mean, se) if return_se else mean


def gaussian_image_variance(order) -> float:
    """Variance of each coordinate of ``F_{s,k}(sigma_s x ... x sigma_s)``.

    Read off the radial ch.f. ``exp(-t^2 / (4(s+1)))``: the image is
    ``N(0, 1/(2(s+1)) I)``.
    """
    return 1.0 / (2.0 * (as_order(order).s + 1.0))


@dataclass
class StabilityReport:
    c: float
    residual: float
    tol: float
    stable: bool
    grid: np.ndarray


def is_stable_check(order, batch: SampleBatch, a: float, b: float, tol: float = 0.01,
                    rng=None, grid=None) -> StabilityReport:
    """Look for ``c`` with ``T_a G o T_b G = T_c G`` in radial ch.f. sup-norm.

    The two factors are built from disjoint halves of ``batch`` so that they
    are independent.  Unless a grid is given, the default grid is divided by
    the root-mean-square norm of the convolved sample so that it probes the
    bulk of the law.
    """
    order = as_order(order)
    if batch.order != order:
        raise ValueError("batch was sampled for a different order")
    if a < 0 or b < 0:
        raise ValueError("scale factors must be nonnegative")
    rng = as_generator(rng)
    half = batch.n // 2
    if half < 1:
        raise ValueError("stability check needs at least two rows")
    first = SampleBatch(order, batch.data[:half])
    second = SampleBatch(order, batch.data[half: 2 * half])
    conv = convolve_batches(first.scaled(a), second.scaled(b), rng)
    if grid is None:
        rms = math.sqrt(float(np.mean(np.sum(conv.data**2, axis=1))))
        grid = default_grid(batch.dim) / (rms if rms > 0 else 1.0)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    target = radchf_empirical(conv, grid)

    def distance(c):
        return float(np.max(np.abs(radchf_empirical(batch.scaled(c), grid) - target)))

    hi = 2.0 * (a + b) + 1e-12
    # coarse scan first: the objective need not be unimodal for lattice-like laws
    cs = np.linspace(0.0, hi, 41)
    ds = [distance(c) for c in cs]
    i = int(np.argmin(ds))
    lo_c, hi_c = cs[max(i - 1, 0)], cs[min(i + 1, len(cs) - 1)]
    res = minimize_scalar(distance, bounds=(lo_c, hi_c), method="bounded",
                          options={"xatol": 1e-4 * max(hi, 1.0)})
    c, resid = (float(res.x), float(res.fun)) if res.fun <= ds[i] else (float(cs[i]), ds[i])
    return StabilityReport(c, resid, tol, resid <= tol, grid)

"""Path simulation on time grids: Brownian motion, Bessel processes,
Kingman-Levy processes and one-dimensional symmetric Levy processes.

All simulators work on a batch of independent paths at once.  ``times`` lists
the recording times; with ``dt`` given, each recording interval is cut into
equal substeps no longer than ``dt`` and only the recording times are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kingman.convolution import combine
from kingman.distributions import RayleighianLaw, sample_rayleighian
from kingman.kernel import KingmanOrder, as_order
from kingman.radchf import LevyPair, _require_valid, chf_empirical
from kingman.rng import as_generator


@dataclass
class PathGrid:
    """States of ``n_paths`` paths at common times; ``states`` is ``(n_paths, T, k)``."""

    times: np.ndarray
    states: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = _check_times(self.times)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 2:
            states = states[None]
        if states.ndim != 3 or states.shape[1] != self.times.size:
            raise ValueError("states must have shape (n_paths, len(times), k)")
        self.states = states

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    def at(self, t: float) -> np.ndarray:
        """States at grid time ``t`` as an ``(n_paths, k)`` array."""
        return self.states[:, _grid_index(self.times, t)]

    def path(self, i: int) -> "PathGrid":
        return PathGrid(self.times, self.states[i: i + 1], self.seed, dict(self.meta))


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).ravel()
    if times.size < 1 or times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if not np.all(np.isfinite(times)) or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _grid_index(times: np.ndarray, t: float) -> int:
    hits = np.flatnonzero(np.abs(times - t) <= 1e-12 * max(1.0, abs(t)))
    if hits.size == 0:
        raise ValueError(f"time {t} is not on the grid")
    return int(hits[0])


def _substeps(times: np.ndarray, dt: float | None) -> list[np.ndarray]:
    """Step lengths inside each recording interval."""
    steps = []
    for h in np.diff(times):
        m = 1 if dt is None else max(1, math.ceil(h / dt - 1e-9))
        steps.append(np.full(m, h / m))
    return steps


def simulate_brownian(d: int, times, component_variance: float = 1.0, rng=None,
                      n_paths: int = 1, dt: float | None = None) -> PathGrid:
    """``d``-dimensional Brownian motion with ``Var W_t^j = component_variance * t``."""
    if int(d) != d or d < 1:
        raise ValueError("dimension must be a positive integer")
    if component_variance <= 0:
        raise ValueError("component variance must be positive")
    times = _check_times(times)
    rng = as_generator(rng)
    states = np.zeros((n_paths, times.size, int(d)))
    w = np.zeros((n_paths, int(d)))
    for i, steps in enumerate(_substeps(times, dt), start=1):
        # the sum of Gaussian substeps is one Gaussian step
        w = w + rng.normal(0.0, math.sqrt(component_variance * steps.sum()), size=w.shape)
        states[:, i] = w
    return PathGrid(times, states, meta={"process": "brownian", "d": int(d),
                                         "component_variance": component_variance})


def _bessel_dimension(order: KingmanOrder) -> int:
    d = order.integer_dimension
    if d is None:
        raise ValueError(f"Bessel paths need an integer dimension 2(s+1); got {order.delta}")
    return d


def bessel_path(order, times, rng=None, n_paths: int = 1, standard: bool = False,
                return_brownian: bool = False):
    """Euclidean norm of a ``2(s+1)``-dimensional Brownian motion.

    Components have variance ``1/(2(s+1))`` per unit time, so that ``B_1`` has
    the Rayleigh law sigma_s and the radial ch.f. of ``B_t`` is
    ``exp(-t x^2 / (4(s+1)))``.  ``standard=True`` uses unit-variance components
    instead.  With ``return_brownian`` the underlying Brownian paths are
    returned too, as ``(bessel, brownian)``.
    """
    order = as_order(order)
    d = _bessel_dimension(order)
    var = 1.0 if standard else 1.0 / order.delta
    w = simulate_brownian(d, times, var, rng, n_paths)
    b = PathGrid(w.times, np.linalg.norm(w.states, axis=2, keepdims=True),
                 meta={"process": "bessel", "s": order.s, "d": d, "standard": standard})
    return (b, w) if return_brownian else b


def bessel_increment(path: PathGrid, u: float, s: float) -> np.ndarray:
    """``|W_s - W_u|`` for each Brownian path in ``path``; needs ``u < s`` on the grid."""
    if not u < s:
        raise ValueError("increment needs u < s")
    iu, is_ = _grid_index(path.times, u), _grid_index(path.times, s)
    return np.linalg.norm(path.states[:, is_] - path.states[:, iu], axis=1)


def sample_mu(pair: LevyPair, t: float, rng=None, n: int = 1) -> np.ndarray:
    """``n`` draws from ``mu_t``, the time-``t`` law of the KL semigroup of ``pair``.

    Rayleighian part with scales ``lam sqrt(t)``, convolved with a compound
    Poisson part: ``Poisson(t * sum rates)`` jumps picked from the atoms in
    proportion to the reweighted rates, folded in one at a time.
    """
    _require_valid(pair)
    rng = as_generator(rng)
    out = np.zeros((n, pair.dim))
    if np.any(pair.lam):
        out = sample_rayleighian(RayleighianLaw(pair.order, pair.lam * math.sqrt(t)), rng, n)
    rates = pair.jump_rates
    if rates.size:
        counts = rng.poisson(t * rates.sum(), size=n)
        p = rates / rates.sum()
        for j in range(1, int(counts.max(initial=0)) + 1):
            rows = np.flatnonzero(counts >= j)
            jumps = pair.atoms[rng.choice(rates.size, size=rows.size, p=p)]
            out[rows] = combine(pair.order, out[rows], jumps, rng)
    return out


def simulate_kl_path(pair: LevyPair, times, rng=None, n_paths: int = 1,
                     dt: float | None = None) -> PathGrid:
    """Kingman-Levy paths started at 0: each step combines the state with a ``mu_h`` draw."""
    _require_valid(pair)
    times = _check_times(times)
    rng = as_generator(rng)
    states = np.zeros((n_paths, times.size, pair.dim))
    x = np.zeros((n_paths, pair.dim))
    if not pair.is_trivial:
        for i, steps in enumerate(_substeps(times, dt), start=1):
            for h in steps:
                x = combine(pair.order, x, sample_mu(pair, h, rng, n_paths), rng)
            states[:, i] = x
    return PathGrid(times, states, meta={"process": "kingman-levy", "pair": pair.to_dict()})


def transition_sample(pair: LevyPair, t: float, x, rng=None, n: int | None = None) -> np.ndarray:
    """Draw from ``P(t, ., x) = mu_t o delta_x``.

    ``x`` is a k-vector or an ``(n, k)`` array of starting points (one draw each).
    """
    if t <= 0:
        raise ValueError("transition time must be positive")
    rng = as_generator(rng)
    x = np.asarray(x, dtype=float)
    rows = x.shape[0] if x.ndim == 2 else (1 if n is None else int(n))
    y = sample_mu(pair, t, rng, rows)
    out = combine(pair.order, np.broadcast_to(x, y.shape), y, rng)
    return out[0] if (x.ndim == 1 and n is None) else out


@dataclass
class SymmetricLevySpec:
    """Gaussian coefficient and symmetric atomic jump measure ``(v, rate)`` pairs."""

    sigma: float = 0.0
    jump_atoms: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        self.sigma = float(self.sigma)
        self.jump_atoms = [(float(v), float(r)) for v, r in self.jump_atoms]
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError("sigma must be finite and nonnegative")
        for v, r in self.jump_atoms:
            if not (v > 0 and r > 0 and math.isfinite(v) and math.isfinite(r)):
                raise ValueError(f"jump atom ({v}, {r}) needs positive finite size and rate")
        if not math.isfinite(sum(r * min(1.0, v * v) for v, r in self.jump_atoms)):
            raise ValueError("jump measure must integrate min(1, v^2)")

    def to_dict(self) -> dict:
        return {"sigma": self.sigma, "jump_atoms": [list(a) for a in self.jump_atoms]}

    @classmethod
    def from_dict(cls, d: dict) -> "SymmetricLevySpec":
        return cls(d.get("sigma", 0.0), [tuple(a) for a in d.get("jump_atoms", [])])


def psi(spec: SymmetricLevySpec, x):
    """Characteristic exponent ``1/2 sigma^2 x^2 + sum rate (1 - cos(v x))``."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * spec.sigma**2 * x * x
    for v, r in spec.jump_atoms:
        out = out + r * (1.0 - np.cos(v * x))
    return float(out) if out.ndim == 0 else out


def gaussian_part(spec: SymmetricLevySpec, h, rng) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if spec.sigma == 0:
        return np.zeros(h.shape)
    return spec.sigma * np.sqrt(h) * rng.standard_normal(h.shape)


def jump_part(spec: SymmetricLevySpec, h, rng) -> np.ndarray:
    """Sum over atoms of ``v`` times a sum of ``Poisson(rate h)`` fair signs."""
    h = np.asarray(h, dtype=float)
    out = np.zeros(h.shape)
    for v, r in spec.jump_atoms:
        counts = rng.poisson(r * h)
        ups = rng.binomial(counts, 0.5)
        out += v * (2 * ups - counts)
    return out


def levy_increments(spec: SymmetricLevySpec, h, rng) -> np.ndarray:
    """Independent increments over step lengths ``h`` (any shape)."""
    return gaussian_part(spec, h, rng) + jump_part(spec, h, rng)


def simulate_symmetric_levy_1d(spec: SymmetricLevySpec, times, rng=None, n_paths: int = 1,
                               dt: float | None = None) -> PathGrid:
    times = _check_times(times)
    rng = as_generator(rng)
    states = np.zeros((n_paths, times.size, 1))
    x = np.zeros(n_paths)
    for i, steps in enumerate(_substeps(times, dt), start=1):
        for h in steps:
            x = x + levy_increments(spec, np.full(n_paths, h), rng)
        states[:, i, 0] = x
    return PathGrid(times, states, meta={"process": "symmetric-levy", "spec": spec.to_dict()})


@dataclass
class DecompositionReport:
    t: float
    n: int
    grid: np.ndarray
    max_deviation: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.threshold


def levy_ito_decompose_check(spec: SymmetricLevySpec, t: float, n: int, rng=None,
                             grid=None) -> DecompositionReport:
    """Gaussian part plus independent jump part, compared with ``exp(-t psi)``.

    The maximum deviation of the empirical ch.f. of the sum over ``grid`` is
    reported against the threshold ``4/sqrt(n)``.
    """
    rng = as_generator(rng)
    grid = np.asarray([0.25, 0.5, 1.0, 2.0, math.pi] if grid is None else grid, dtype=float)
    h = np.full(n, float(t))
    x1 = gaussian_part(spec, h, rng)
    x2 = jump_part(spec, h, rng)
    emp = chf_empirical(x1 + x2, grid[:, None])
    dev = float(np.max(np.abs(emp - np.exp(-t * psi(spec, grid)))))
    return DecompositionReport(float(t), n, grid, dev, 4.0 / math.sqrt(n))

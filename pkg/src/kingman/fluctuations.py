"""Fluctuation functionals at an independent exponential time and an
empirical check of the Wiener-Hopf factorization

    p / (p - i nu + psi(theta)) = Psi+(nu, theta) * Psi-(nu, theta),

with ``Psi+ = E exp(i nu G + i theta S)`` over (last time at the maximum,
maximum) and ``Psi- = E exp(i nu (e_p - G) - i theta (S - X))`` over the
complementary pair.  The sign on ``theta`` in ``Psi-`` is the one that makes
the product the ch.f. of ``(e_p, X_{e_p})``: ``X_{e_p} = S - (S - X_{e_p})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kingman.processes import PathGrid, SymmetricLevySpec, levy_increments, psi
from kingman.rng import as_generator

TIE_TOL = 1e-12
BLOCK_STEPS = 64


def running_sup(path, values=None) -> tuple[float, float]:
    """Maximum of a scalar path and the last grid time attaining it.

    Accepts a single-path :class:`PathGrid`, or ``(times, values)`` arrays.
    """
    if isinstance(path, PathGrid):
        if path.n_paths != 1 or path.dim != 1:
            raise ValueError("running_sup needs a single scalar path")
        times, values = path.times, path.states[0, :, 0]
    else:
        times, values = np.asarray(path, dtype=float), np.asarray(values, dtype=float)
    if times.size == 0 or times.size != values.size:
        raise ValueError("path is empty or times and values differ in length")
    top = float(values.max())
    last = int(np.flatnonzero(values >= top - TIE_TOL)[-1])
    return top, float(times[last])


def sample_exponential_time(p: float, rng=None, size=None):
    """Exponential draw(s) with rate ``p`` (mean ``1/p``)."""
    if not p > 0:
        raise ValueError("killing rate must be positive")
    return as_generator(rng).exponential(1.0 / p, size=size)


@dataclass
class WhSamplePairs:
    p: float
    g_bar: np.ndarray
    x_bar: np.ndarray
    g_comp: np.ndarray
    x_comp: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.g_bar.size

    @property
    def e_p(self) -> np.ndarray:
        return self.g_bar + self.g_comp

    def columns(self) -> np.ndarray:
        return np.column_stack([self.g_bar, self.x_bar, self.g_comp, self.x_comp])


def harvest_wh_pairs(spec: SymmetricLevySpec, p: float, n_paths: int, dt: float = 1e-3,
                     rng=None) -> WhSamplePairs:
    """Simulate ``n_paths`` paths up to independent ``e_p`` and record the pairs.

    Paths run on the grid ``0, dt, 2dt, ...`` up to the last grid time before
    ``e_p``, then take a final partial step to ``e_p`` itself.  The grid is
    extended block by block until every path is killed.  The killing times
    come from their own child stream.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    rng = as_generator(rng)
    time_rng, path_rng = rng.spawn(2)
    e = sample_exponential_time(p, time_rng, size=n_paths)
    n_full = np.floor(e / dt).astype(np.int64)
    # a step of length ~0 at the end is merged into the last full step
    n_full = np.where(e - n_full * dt <= 1e-12 * dt, np.maximum(n_full - 1, 0), n_full)
    tail = e - n_full * dt

    x = np.zeros(n_paths)
    top = np.zeros(n_paths)
    g = np.zeros(n_paths)
    done = 0
    alive = np.flatnonzero(n_full > 0)
    while alive.size:
        steps = np.minimum(n_full[alive] - done, BLOCK_STEPS)
        m = int(steps.max())
        h = np.where(np.arange(m) < steps[:, None], dt, 0.0)
        vals = x[alive, None] + np.cumsum(levy_increments(spec, h, path_rng), axis=1)
        vals_masked = np.where(h > 0, vals, -np.inf)
        new_top = np.maximum(top[alive], vals_masked.max(axis=1))
        hit = vals_masked >= new_top[:, None] - TIE_TOL
        any_hit = hit.any(axis=1)
        last = m - 1 - np.argmax(hit[:, ::-1], axis=1)
        g[alive] = np.where(any_hit, (done + last + 1) * dt, g[alive])
        top[alive] = new_top
        x[alive] = vals[np.arange(alive.size), steps - 1]
        done += BLOCK_STEPS
        alive = alive[n_full[alive] > done]

    x_end = x + levy_increments(spec, tail, path_rng)
    end_top = x_end >= top - TIE_TOL
    g = np.where(end_top, e, g)
    top = np.maximum(top, x_end)
    return WhSamplePairs(float(p), g, top, e - g, top - x_end,
                         meta={"spec": spec.to_dict(), "p": float(p), "dt": float(dt), "n": int(n_paths)})


def _factor_terms(pairs: WhSamplePairs, which: str, nu: float, theta: float) -> np.ndarray:
    if pairs.n == 0:
        raise ValueError("no sample pairs")
    if which == "ascending":
        return np.exp(1j * (nu * pairs.g_bar + theta * pairs.x_bar))
    if which == "descending":
        return np.exp(1j * (nu * pairs.g_comp - theta * pairs.x_comp))
    raise ValueError(f"which must be 'ascending' or 'descending', got {which!r}")


def wh_factor(pairs: WhSamplePairs, which: str, nu: float, theta: float) -> complex:
    """Empirical Wiener-Hopf factor ``Psi+`` (ascending) or ``Psi-`` (descending)."""
    return complex(_factor_terms(pairs, which, nu, theta).mean())


def wh_target(spec: SymmetricLevySpec, p: float, nu: float, theta: float) -> complex:
    return p / (p - 1j * nu + psi(spec, theta))


def wh_identity_residual(spec: SymmetricLevySpec, p: float, nu: float, theta: float,
                         pairs: WhSamplePairs) -> float:
    prod = wh_factor(pairs, "ascending", nu, theta) * wh_factor(pairs, "descending", nu, theta)
    return abs(prod - wh_target(spec, p, nu, theta))


INDEPENDENCE_GRID = ((0.0, 0.5), (0.0, 1.0), (0.5, 0.0), (0.5, 1.0))


@dataclass
class IndependenceReport:
    max_deviation: float
    max_z: float
    worst_point: tuple
    n_points: int

    @property
    def passed(self) -> bool:
        return self.max_z <= 4.0


def independence_check(pairs: WhSamplePairs, grid=INDEPENDENCE_GRID) -> IndependenceReport:
    """Joint ch.f. of the two pairs against the product of their marginals.

    For each ``(nu, theta)`` on the ascending side and ``(nu', theta')`` on the
    descending side, ``D = mean(U V) - mean(U) mean(V)``.  Its standard error
    under independence is ``sqrt(var(U) var(V) / n)``; the check passes when
    every ``|D|`` is within 4 standard errors.
    """
    worst = (0.0, 0.0, None)
    max_dev = 0.0
    n = pairs.n
    for nu, th in grid:
        u = np.exp(1j * (nu * pairs.g_bar + th * pairs.x_bar))
        uc = u - u.mean()
        for nu2, th2 in grid:
            v = np.exp(1j * (nu2 * pairs.g_comp + th2 * pairs.x_comp))
            vc = v - v.mean()
            dev = abs(np.mean(uc * vc))
            se = math.sqrt(np.mean(np.abs(uc) ** 2) * np.mean(np.abs(vc) ** 2) / n)
            z = dev / se if se > 0 else (0.0 if dev == 0 else math.inf)
            max_dev = max(max_dev, dev)
            if z > worst[0] or worst[2] is None:
                worst = (z, dev, (nu, th, nu2, th2))
    return IndependenceReport(max_dev, worst[0], worst[2], len(grid) ** 2)


def duplicated_pairs(pairs: WhSamplePairs) -> WhSamplePairs:
    """Negative control: complementary columns replaced by copies of the ascending ones."""
    return WhSamplePairs(pairs.p, pairs.g_bar, pairs.x_bar, pairs.g_bar.copy(), pairs.x_bar.copy(),
                         dict(pairs.meta, control="duplicated"))


def shuffled_pairs(pairs: WhSamplePairs, rng=None) -> WhSamplePairs:
    """Positive control: complementary rows permuted, breaking any dependence."""
    perm = as_generator(rng).permutation(pairs.n)
    return WhSamplePairs(pairs.p, pairs.g_bar, pairs.x_bar, pairs.g_comp[perm], pairs.x_comp[perm],
                         dict(pairs.meta, control="shuffled"))

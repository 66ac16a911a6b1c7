"""Kingman convolution of point masses, its k-fold Cartesian product on sample
batches, and k-symmetrization.

``delta_x o_s delta_y`` is the law of ``sqrt(x^2 + 2 u x y + y^2)`` with
``u ~ F_s``.  Laws on the orthant are carried as :class:`SampleBatch` rows;
exact expectations against a point convolution use Gauss-Jacobi quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from kingman.kernel import KingmanOrder, QuadratureRule, as_order, sample_theta
from kingman.rng import as_generator


@dataclass
class SampleBatch:
    """``n x k`` matrix of nonnegative sample rows for one Kingman order."""

    order: KingmanOrder
    data: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.order = as_order(self.order)
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("sample batch needs at least one row and one column")
        if not np.all(np.isfinite(data)) or np.any(data < 0):
            raise ValueError("sample batch entries must be finite and nonnegative")
        self.data = data

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def scaled(self, c: float) -> "SampleBatch":
        """Image under ``T_c``, ``x -> c x``."""
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        return SampleBatch(self.order, c * self.data, self.seed, dict(self.meta, scale=c))

    @classmethod
    def point_mass(cls, order, x, n: int) -> "SampleBatch":
        row = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(order, np.tile(row, (int(n), 1)), meta={"law": "point", "x": row.tolist()})


def combine(order, x, y, rng=None):
    """One draw from ``delta_x o_s delta_y`` per element of ``broadcast(x, y)``.

    Each element gets its own cosine variable.  A zero argument returns the
    other one exactly.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("Kingman convolution is defined on nonnegative arguments")
    x, y = np.broadcast_arrays(x, y)
    u = sample_theta(order, as_generator(rng), size=x.shape)
    z = np.sqrt(np.maximum(x * x + 2.0 * u * x * y + y * y, 0.0))
    # clip round-off back onto the support [|x - y|, x + y]
    z = np.clip(z, np.abs(x - y), x + y)
    z = np.where(y == 0, x, np.where(x == 0, y, z))
    return float(z) if z.ndim == 0 else z


def combine_scalar(order, x: float, y: float, rng=None) -> float:
    return float(combine(order, float(x), float(y), rng))


def point_convolution_expectation(order, x: float, y: float, f, rule: QuadratureRule) -> float:
    """``integral f d(delta_x o_s delta_y)`` by quadrature in the cosine variable."""
    order = as_order(order)
    if rule.order != order:
        raise ValueError("quadrature rule was built for a different order")
    return rule.expect(lambda u: f(np.sqrt(np.maximum(x * x + 2.0 * u * x * y + y * y, 0.0))))


def _match_rows(a: SampleBatch, b: SampleBatch, rng) -> tuple[np.ndarray, np.ndarray, dict]:
    if a.n == b.n:
        return a.data, b.data, {}
    if a.n < b.n:
        idx = rng.integers(0, a.n, size=b.n)
        return a.data[idx], b.data, {"resampled": "a", "resampled_from": a.n}
    idx = rng.integers(0, b.n, size=a.n)
    return a.data, b.data[idx], {"resampled": "b", "resampled_from": b.n}


def convolve_batches(a: SampleBatch, b: SampleBatch, rng=None) -> SampleBatch:
    """Sample of ``a o_{s,k} b``: rows are paired and combined coordinate-wise.

    When the sizes differ the smaller batch is resampled with replacement up to
    the larger size; the output metadata records which one.
    """
    if a.order != b.order:
        raise ValueError(f"order mismatch: s={a.order.s} vs s={b.order.s}")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    rng = as_generator(rng)
    xa, xb, info = _match_rows(a, b, rng)
    out = combine(a.order, xa, xb, rng)
    return SampleBatch(a.order, out, meta={"law": "convolution", **info})


def k_symmetrize(batch: SampleBatch, rng=None) -> np.ndarray:
    """Sample of the k-symmetrization: each coordinate gets an independent fair sign."""
    rng = as_generator(rng)
    data = batch.data if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    signs = 2.0 * rng.integers(0, 2, size=data.shape) - 1.0
    return signs * data

"""Acceptance checks run by ``kingman verify`` and the test suite.

Each check draws from its own substream ``substream(seed, number, ...)`` and
returns the measured statistics with their thresholds.  Reports contain no
timings, so a fixed seed gives a byte-identical report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kingman.convolution import SampleBatch, convolve_batches
from kingman.distributions import rayleigh_radchf, sample_rayleigh
from kingman.fluctuations import duplicated_pairs, harvest_wh_pairs, independence_check, wh_identity_residual
from kingman.kernel import lambda_kernel, sample_theta
from kingman.processes import SymmetricLevySpec, bessel_path, simulate_kl_path, transition_sample
from kingman.radchf import (LevyPair, chf_empirical, default_grid, embed_fsk, is_stable_check,
                            levy_khinchine_radchf, radchf_empirical)
from kingman.rng import substream

KS_C_1PCT = math.sqrt(-math.log(0.005) / 2.0)


@dataclass
class Measure:
    label: str
    value: float
    lo: float | None = None
    hi: float | None = None

    @property
    def passed(self) -> bool:
        return (self.lo is None or self.value >= self.lo) and (self.hi is None or self.value <= self.hi)

    def __str__(self):
        if self.lo is not None and self.hi is not None:
            bound = f"in [{self.lo:.6g}, {self.hi:.6g}]"
        elif self.hi is not None:
            bound = f"<= {self.hi:.6g}"
        else:
            bound = f">= {self.lo:.6g}"
        return f"{self.label}={self.value:.6e} ({bound})"


@dataclass
class CheckResult:
    number: int
    name: str
    measures: list[Measure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.measures)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} [{self.number:2d}] {self.name}: " + "; ".join(str(m) for m in self.measures)


@dataclass(frozen=True)
class Sizes:
    theta_draws: int = 10**6
    rayleigh_draws: int = 10**6
    batch: int = 10**5
    stability_batch: int = 2 * 10**5
    kl_paths: int = 10**5
    kl_dt: float = 1e-2
    bessel_draws: int = 10**5
    transition_draws: int = 10**5
    wh_paths: int = 10**5
    wh_dt: float = 1e-3


FULL = Sizes()
QUICK = Sizes(theta_draws=10**5, rayleigh_draws=10**5, batch=2 * 10**4, stability_batch=10**5,
              kl_paths=2 * 10**4, kl_dt=2.5e-2, bessel_draws=2 * 10**4, transition_draws=2 * 10**4,
              wh_paths=2 * 10**4, wh_dt=1e-2)

# Finite Levy pairs used by the simulation checks: no jumps, one atom, atom plus Gaussian part.
TEST_PAIRS = {
    "rayleighian": LevyPair(0.5, [1.0, 0.5]),
    "single-atom": LevyPair(0.0, [0.0], [[1.0]], [1.0]),
    "atom+lambda": LevyPair(1.0, [0.6, 0.0], [[0.8, 1.5]], [0.7]),
}


def check_kernel_closed_form(seed: int, sizes: Sizes) -> CheckResult:
    x = 0.01 * np.arange(1, 5001)
    err = float(np.max(np.abs(lambda_kernel(0.5, x) - np.sin(x) / x)))
    return CheckResult(1, "kernel closed form Lambda_1/2(x) = sin(x)/x",
                       [Measure("max_abs_err", err, hi=1e-10)])


def check_kernel_as_chf(seed: int, sizes: Sizes) -> CheckResult:
    worst = 0.0
    for i, s in enumerate((0.0, 0.5, 1.0, 2.0)):
        theta = sample_theta(s, substream(seed, 2, i), size=sizes.theta_draws)
        for t in (0.5, 1.0, 2.5):
            worst = max(worst, abs(float(np.cos(t * theta).mean()) - lambda_kernel(s, t)))
    return CheckResult(2, "kernel is the ch.f. of theta_s",
                       [Measure(f"max_abs_dev(N={sizes.theta_draws})", worst, hi=4e-3)])


def check_rayleigh_radchf(seed: int, sizes: Sizes) -> CheckResult:
    n = sizes.rayleigh_draws
    t = np.array([0.5, 1.0, 2.0, 4.0])[:, None]
    worst = 0.0
    for i, s in enumerate((0.0, 0.5, 1.0)):
        batch = SampleBatch(s, sample_rayleigh(s, substream(seed, 3, i), size=n))
        worst = max(worst, float(np.max(np.abs(radchf_empirical(batch, t) - rayleigh_radchf(s, t[:, 0])))))
    return CheckResult(3, "Rayleigh radial ch.f. exp(-t^2/(4(s+1)))",
                       [Measure(f"max_abs_dev(N={n})", worst, hi=4 / math.sqrt(n))])


def check_convolution_homomorphism(seed: int, sizes: Sizes) -> CheckResult:
    n = sizes.batch
    worst = 0.0
    for i, (s, k) in enumerate(((0.0, 1), (1.0, 2))):
        rng = substream(seed, 4, i)
        a = SampleBatch(s, sample_rayleigh(s, rng, size=(n, k)))
        b = SampleBatch(s, sample_rayleigh(s, rng, size=(n, k)))
        grid = default_grid(k)
        ab, se_ab = radchf_empirical(convolve_batches(a, b, rng), grid, return_se=True)
        ra, se_a = radchf_empirical(a, grid, return_se=True)
        rb, se_b = radchf_empirical(b, grid, return_se=True)
        se = np.sqrt(se_ab**2 + (rb * se_a) ** 2 + (ra * se_b) ** 2)
        z = np.abs(ab - ra * rb) / np.maximum(se, 1e-300)
        worst = max(worst, float(np.max(z)))
    return CheckResult(4, "radial ch.f. multiplicative under convolution",
                       [Measure("max_dev_over_combined_se", worst, hi=4.0)])


def _signed_grid(k: int) -> np.ndarray:
    grid = default_grid(k)
    flip = np.ones(k)
    flip[0] = -1.0
    return np.vstack([grid, grid * flip])


def check_embedding(seed: int, sizes: Sizes) -> CheckResult:
    n = sizes.batch
    s = 0.5
    worst = 0.0
    worst_hom = 0.0
    j = 0
    for k in (1, 2):
        grid = _signed_grid(k)
        point = np.array([1.5, 0.7][:k])
        for label in ("rayleigh", "rayleigh*2", "point"):
            rng = substream(seed, 5, j)
            j += 1
            if label == "point":
                g = SampleBatch.point_mass(s, point, n)
            else:
                g = SampleBatch(s, sample_rayleigh(s, rng, size=(n, k)))
                if label == "rayleigh*2":
                    g = g.scaled(2.0)
            emb = chf_empirical(embed_fsk(g, rng), grid)
            rad = radchf_empirical(g, np.abs(grid))
            worst = max(worst, float(np.max(np.abs(emb - rad))))
        # homomorphism: embedding of a convolution vs independent sum of embeddings
        a = SampleBatch(s, sample_rayleigh(s, rng, size=(n, k)))
        b = SampleBatch(s, sample_rayleigh(s, rng, size=(n, k))).scaled(2.0)
        lhs = chf_empirical(embed_fsk(convolve_batches(a, b, rng), rng), grid)
        b2 = SampleBatch(s, sample_rayleigh(s, rng, size=(n, k))).scaled(2.0)
        rhs = chf_empirical(embed_fsk(a, rng) + embed_fsk(b2, rng), grid)
        worst_hom = max(worst_hom, float(np.max(np.abs(lhs - rhs))))
    return CheckResult(5, "embedding: Fourier ch.f. of F_sk(G) = radial ch.f. of G", [
        Measure(f"max_abs_dev(N={n})", worst, hi=4 / math.sqrt(n)),
        Measure("homomorphism_max_abs_dev", worst_hom, hi=4 * math.sqrt(2) / math.sqrt(n)),
    ])


def check_stability(seed: int, sizes: Sizes) -> CheckResult:
    measures = []
    for i, s in enumerate((0.0, 1.0)):
        rng = substream(seed, 6, i)
        batch = SampleBatch(s, sample_rayleigh(s, rng, size=sizes.stability_batch))
        rep = is_stable_check(s, batch, 3.0, 4.0, tol=0.01, rng=rng)
        measures += [Measure(f"c(s={s:g})", rep.c, lo=4.95, hi=5.05),
                     Measure(f"residual(s={s:g})", rep.residual, hi=0.01)]
    return CheckResult(6, "stability exponent 2: T_3 o T_4 = T_5", measures)


def check_kl_consistency(seed: int, sizes: Sizes) -> CheckResult:
    n = sizes.kl_paths
    worst = 0.0
    for i, pair in enumerate(TEST_PAIRS.values()):
        paths = simulate_kl_path(pair, [0.0, 0.5, 1.0], substream(seed, 7, i), n_paths=n, dt=sizes.kl_dt)
        grid = default_grid(pair.dim)
        for t in (0.5, 1.0):
            emp = radchf_empirical(SampleBatch(pair.order, paths.at(t)), grid)
            worst = max(worst, float(np.max(np.abs(emp - levy_khinchine_radchf(pair.scaled(t), grid)))))
    return CheckResult(7, "Levy-Khinchine formula vs simulated KL marginals",
                       [Measure(f"max_abs_dev(N={n},dt={sizes.kl_dt:g})", worst, hi=4 / math.sqrt(n))])


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.sort(a), np.sort(b)
    pts = np.concatenate([a, b])
    return float(np.max(np.abs(np.searchsorted(a, pts, side="right") / a.size
                               - np.searchsorted(b, pts, side="right") / b.size)))


def ks_critical_1pct(n: int, m: int) -> float:
    return KS_C_1PCT * math.sqrt((n + m) / (n * m))


def check_bessel_marginal(seed: int, sizes: Sizes) -> CheckResult:
    n = sizes.bessel_draws
    crit = ks_critical_1pct(n, n)
    measures = []
    for d in (2, 3, 4):
        s = d / 2 - 1
        rng = substream(seed, 8, d)
        b1 = bessel_path(s, [0.0, 1.0], rng, n_paths=n).at(1.0)[:, 0]
        ref = sample_rayleigh(s, rng, size=n)
        measures.append(Measure(f"ks(d={d})", ks_two_sample(b1, ref), hi=crit))
    return CheckResult(8, "Bessel marginal B_1 ~ sigma_s", measures)


def check_chapman_kolmogorov(seed: int, sizes: Sizes) -> CheckResult:
    n = sizes.transition_draws
    worst = 0.0
    for i, pair in enumerate(TEST_PAIRS.values()):
        rng = substream(seed, 9, i)
        x0 = np.array([0.7, 1.2][: pair.dim])
        mid = transition_sample(pair, 0.4, x0, rng, n=n)
        two = transition_sample(pair, 0.6, mid, rng)
        one = transition_sample(pair, 1.0, x0, rng, n=n)
        grid = default_grid(pair.dim)
        r2, se2 = radchf_empirical(SampleBatch(pair.order, two), grid, return_se=True)
        r1, se1 = radchf_empirical(SampleBatch(pair.order, one), grid, return_se=True)
        z = np.abs(r2 - r1) / np.maximum(np.sqrt(se1**2 + se2**2), 1e-300)
        worst = max(worst, float(np.max(z)))
    return CheckResult(9, "Chapman-Kolmogorov for KL transitions",
                       [Measure("max_dev_over_combined_se", worst, hi=4.0)])


def check_wiener_hopf(seed: int, sizes: Sizes) -> CheckResult:
    brownian = SymmetricLevySpec(1.0)
    poisson = SymmetricLevySpec(0.0, [(1.0, 1.0)])
    pb = harvest_wh_pairs(brownian, 1.0, sizes.wh_paths, sizes.wh_dt, substream(seed, 10, 0))
    pc = harvest_wh_pairs(poisson, 1.0, sizes.wh_paths, sizes.wh_dt, substream(seed, 10, 1))
    indep = independence_check(pb)
    control = independence_check(duplicated_pairs(pb))
    return CheckResult(10, "Wiener-Hopf factorization at an exponential time", [
        Measure("residual_brownian(nu=0,theta=1)", wh_identity_residual(brownian, 1.0, 0.0, 1.0, pb), hi=0.02),
        Measure("residual_poisson(nu=0,theta=pi)", wh_identity_residual(poisson, 1.0, 0.0, math.pi, pc), hi=0.03),
        Measure("independence_max_z", indep.max_z, hi=4.0),
        Measure("dependent_control_max_z", control.max_z, lo=4.0),
    ])


CHECKS = (
    check_kernel_closed_form,
    check_kernel_as_chf,
    check_rayleigh_radchf,
    check_convolution_homomorphism,
    check_embedding,
    check_stability,
    check_kl_consistency,
    check_bessel_marginal,
    check_chapman_kolmogorov,
    check_wiener_hopf,
)


def run_checks(seed: int = 0, quick: bool = False, only=None) -> list[CheckResult]:
    sizes = QUICK if quick else FULL
    return [check(seed, sizes) for i, check in enumerate(CHECKS, start=1) if only is None or i in only]


def format_report(results: list[CheckResult], seed: int, quick: bool) -> str:
    lines = [f"kingman verification report (seed={seed}, mode={'quick' if quick else 'full'})"]
    lines += [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"

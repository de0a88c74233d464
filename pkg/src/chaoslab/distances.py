"""Monte Carlo distance estimators with bootstrap confidence intervals.

Scheffe's identity (total variation = half the L1 gap between densities)
drives the TV estimators: against a known normal target a binned
Gaussian KDE is integrated on a fixed grid; between two sample sets a
common histogram is used instead, since two KDEs would double the
smoothing bias.  Histogram TV is upward-biased at finite N and the bias
shrinks as N grows; acceptance gates carry explicit slack for it.

The Fortet-Mourier estimator maximizes sum phi_j (p_j - q_j) over grid
functions bounded by 1 whose increments respect the 1-Lipschitz
constraint, via dynamic programming over discretized levels; level
discretization can cost at most 2/(levels-1).

Every estimator is a pure function of (inputs, seed): bootstrap
resampling happens on histogram counts (multinomially), which is
distribution-identical to resampling the underlying observations for
these statistics, and much cheaper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.special import ndtr
from scipy.stats import beta as beta_dist

from . import rng
from .chaos import SampleBatch


class DegenerateSampleError(ValueError):
    """The empirical law is (nearly) atomic; a density comparison is invalid."""


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    ci_low: float
    ci_high: float
    method: str
    n_samples: tuple[int, ...]

    def ci_width(self) -> float:
        return self.ci_high - self.ci_low

    def to_dict(self) -> dict:
        return {"method": self.method, "value": self.value,
                "ci": [self.ci_low, self.ci_high], "n": list(self.n_samples)}


def _values(batch) -> np.ndarray:
    if isinstance(batch, SampleBatch):
        return np.asarray(batch.values)
    return np.asarray(batch, dtype=float)


def _scalar_values(batch) -> np.ndarray:
    vals = _values(batch)
    if vals.ndim != 1:
        raise ValueError(f"expected scalar samples, got shape {vals.shape}")
    return vals


def _finish(point: float, boots: np.ndarray, method: str,
            counts: tuple[int, ...]) -> DistanceEstimate:
    if boots.size:
        lo, hi = np.percentile(boots, [2.5, 97.5])
    else:
        lo = hi = point
    # percentile CIs occasionally miss the point estimate; widen so the
    # invariant ci_low <= value <= ci_high always holds
    return DistanceEstimate(float(point), float(min(lo, point)),
                            float(max(hi, point)), method, counts)


def normal_cdf(x, mean: float = 0.0, var: float = 1.0):
    return ndtr((x - mean) / math.sqrt(var))


def normal_pdf(x, mean: float = 0.0, var: float = 1.0):
    return np.exp(-(x - mean) ** 2 / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def tv_vs_density(batch, mean: float = 0.0, var: float = 1.0,
                  grid_points: int = 2048, n_boot: int = 200,
                  seed: int = 0) -> DistanceEstimate:
    """TV between the sample law and a normal(mean, var) target.

    Gaussian KDE with Silverman bandwidth h = 1.06 sigma N^(-1/5),
    evaluated by binned convolution on grid_points points spanning the
    data range +- 4h; the estimate is half the trapezoid integral of
    |kde - target| plus the target mass beyond the grid.  Bootstrap
    resamples the bin counts with the bandwidth held fixed.
    """
    x = _scalar_values(batch)
    n = x.size
    if n < 1000:
        raise ValueError(f"need at least 1000 samples, got {n}")
    sigma = float(np.std(x, ddof=1))
    if sigma == 0.0:
        raise DegenerateSampleError("sample standard deviation is zero")
    h = 1.06 * sigma * n ** (-0.2)
    lo, hi = float(x.min()) - 4.0 * h, float(x.max()) + 4.0 * h
    edges = np.linspace(lo, hi, grid_points + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    dx = edges[1] - edges[0]
    counts = np.histogram(x, edges)[0]

    # clamp so the kernel never outgrows the grid (np.convolve 'same'
    # would change the output length); a kernel that wide is flat anyway
    radius = min(int(math.ceil(5.0 * h / dx)), grid_points // 2 - 1)
    offs = np.arange(-radius, radius + 1) * dx
    kernel = np.exp(-offs ** 2 / (2.0 * h * h))
    kernel /= kernel.sum()

    target = normal_pdf(centers, mean, var)
    tail = float(normal_cdf(lo, mean, var) + (1.0 - normal_cdf(hi, mean, var)))

    def stat(c: np.ndarray) -> float:
        dens = np.convolve(c, kernel, mode="same") / (n * dx)
        return 0.5 * (float(np.trapezoid(np.abs(dens - target), dx=dx)) + tail)

    point = stat(counts)
    gen = np.random.default_rng(rng.derive(seed, 0x7D1))
    probs = counts / n
    boots = np.array([stat(gen.multinomial(n, probs)) for _ in range(n_boot)])
    est = _finish(point, boots, "tv-kde", (n,))
    return DistanceEstimate(min(est.value, 1.0), min(est.ci_low, 1.0),
                            min(est.ci_high, 1.0), est.method, est.n_samples)


def tv_two_samples(s1, s2, bins: int | None = None, n_boot: int = 200,
                   seed: int = 0) -> DistanceEstimate:
    """TV between two sample laws from a common histogram (Scheffe).

    Default bin count max(20, floor(min(N)^(1/3))) over the pooled range.
    Upward-biased at finite N; identical inputs give exactly 0.
    """
    x1, x2 = _scalar_values(s1), _scalar_values(s2)
    n1, n2 = x1.size, x2.size
    if min(n1, n2) < 1000:
        raise ValueError(f"need at least 1000 samples per set, got {n1}, {n2}")
    if bins is None:
        bins = max(20, int(min(n1, n2) ** (1.0 / 3.0)))
    lo = min(float(x1.min()), float(x2.min()))
    hi = max(float(x1.max()), float(x2.max()))
    if lo == hi:
        return DistanceEstimate(0.0, 0.0, 0.0, "tv-hist", (n1, n2))
    edges = np.linspace(lo, hi, bins + 1)
    c1 = np.histogram(x1, edges)[0]
    c2 = np.histogram(x2, edges)[0]

    def stat(a, b) -> float:
        return 0.5 * float(np.abs(a / n1 - b / n2).sum())

    point = stat(c1, c2)
    gen = np.random.default_rng(rng.derive(seed, 0x7D2))
    p1, p2 = c1 / n1, c2 / n2
    boots = np.array([stat(gen.multinomial(n1, p1), gen.multinomial(n2, p2))
                      for _ in range(n_boot)])
    return _finish(point, boots, "tv-hist", (n1, n2))


def tv_multivariate(batch, cov, grid_cells: int = 40, n_boot: int = 200,
                    seed: int = 0) -> DistanceEstimate:
    """TV between a 2d sample law and N(0, C) on a grid of cells.

    Cells span +-4 sqrt(max C_ii) per axis; the Gaussian cell mass is
    density at the center times cell area, and mass escaping the grid is
    counted once from each side.
    """
    x = _values(batch)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("tv_multivariate supports exactly d = 2")
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2):
        raise ValueError("covariance must be 2x2")
    eigvals = np.linalg.eigvalsh(0.5 * (cov + cov.T))
    if eigvals.min() <= 0.0:
        raise ValueError("covariance must be positive definite")
    n = x.shape[0]
    if n < 10_000:
        raise ValueError(f"need at least 10000 samples, got {n}")

    half = 4.0 * math.sqrt(float(cov.diagonal().max()))
    edges = np.linspace(-half, half, grid_cells + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    area = (edges[1] - edges[0]) ** 2

    cinv = np.linalg.inv(cov)
    cx, cy = np.meshgrid(centers, centers, indexing="ij")
    quad = cinv[0, 0] * cx ** 2 + 2.0 * cinv[0, 1] * cx * cy + cinv[1, 1] * cy ** 2
    gauss = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(np.linalg.det(cov)))
    gmass = gauss.ravel() * area
    gout = max(0.0, 1.0 - float(gmass.sum()))

    counts = np.histogram2d(x[:, 0], x[:, 1], bins=(edges, edges))[0].ravel()
    cells = np.append(counts, n - counts.sum())  # last slot = escaped mass

    def stat(c: np.ndarray) -> float:
        emp = c[:-1] / n
        return 0.5 * (float(np.abs(emp - gmass).sum()) + c[-1] / n + gout)

    point = stat(cells)
    gen = np.random.default_rng(rng.derive(seed, 0x7D3))
    probs = cells / n
    boots = np.array([stat(gen.multinomial(n, probs)) for _ in range(n_boot)])
    est = _finish(point, boots, "tv-grid2d", (n,))
    return DistanceEstimate(min(est.value, 1.0), min(est.ci_low, 1.0),
                            min(est.ci_high, 1.0), est.method, est.n_samples)


def _fm_lattice(dx: float, levels: int, cells: int) -> tuple[np.ndarray, int | None]:
    """Level lattice for the chain DP, plus the window in level steps.

    The step is dx / m with integer m, so the Lipschitz bound between
    adjacent cells is exactly m lattice steps and slope-1 functions are
    representable whatever (cells, levels) the caller picked.  m is the
    smallest integer keeping the step at or below the nominal 2/(levels-1),
    so the snapping error stays bounded by roughly 2/(levels-1).

    Since both histograms carry total mass one, the objective is shift
    invariant and any feasible function can be slid down to touch -1;
    the lattice therefore only spans min(2, cells * dx), which keeps it
    small when the pooled range is tiny.
    """
    if dx >= 2.0:
        # cells wider than the whole value range: chain constraint is void
        return np.linspace(-1.0, 1.0, levels), None
    m = max(1, math.ceil(dx * (levels - 1) / 2.0 - 1e-12))
    step = dx / m
    count = int(min(2.0, dx * cells) / step + 1e-9) + 1
    return -1.0 + step * np.arange(count), m


def _fm_stat(diff: np.ndarray, lv: np.ndarray, window: int | None) -> float:
    """Chain-constrained maximization of sum phi_j diff_j by DP over levels."""
    best = lv * diff[0]
    if window is None or window >= lv.size - 1:
        for d in diff[1:]:
            best = lv * d + best.max()
    else:
        size = 2 * window + 1
        for d in diff[1:]:
            best = lv * d + maximum_filter1d(best, size=size, mode="nearest")
    return float(best.max())


def fm_two_samples(s1, s2, cells: int = 512, levels: int = 201,
                   n_boot: int = 200, seed: int = 0) -> DistanceEstimate:
    """Fortet-Mourier distance between two sample laws.

    Maximizes the mean difference of a 1-Lipschitz function bounded by 1
    over a grid of cells spanning the pooled range, with function values
    discretized to a lattice of roughly the given level count.  Returns
    the attained maximum: a lower bound of the supremum over the
    discretized class that converges as cells and levels grow.
    """
    x1, x2 = _scalar_values(s1), _scalar_values(s2)
    n1, n2 = x1.size, x2.size
    if min(n1, n2) < 1000:
        raise ValueError(f"need at least 1000 samples per set, got {n1}, {n2}")
    lo = min(float(x1.min()), float(x2.min()))
    hi = max(float(x1.max()), float(x2.max()))
    if lo == hi:
        return DistanceEstimate(0.0, 0.0, 0.0, "fm-dp", (n1, n2))
    edges = np.linspace(lo, hi, cells + 1)
    lv, window = _fm_lattice(edges[1] - edges[0], levels, cells)
    c1 = np.histogram(x1, edges)[0]
    c2 = np.histogram(x2, edges)[0]

    point = _fm_stat(c1 / n1 - c2 / n2, lv, window)
    gen = np.random.default_rng(rng.derive(seed, 0x7D4))
    p1, p2 = c1 / n1, c2 / n2
    boots = np.array([
        _fm_stat(gen.multinomial(n1, p1) / n1 - gen.multinomial(n2, p2) / n2,
                 lv, window)
        for _ in range(n_boot)])
    return _finish(point, boots, "fm-dp", (n1, n2))


def wasserstein1(s1, s2, n_boot: int = 200, seed: int = 0) -> DistanceEstimate:
    """Exact empirical W1 between equal-size sample sets: mean sorted gap."""
    x1, x2 = _scalar_values(s1), _scalar_values(s2)
    if x1.size != x2.size:
        raise ValueError(f"sample sizes differ: {x1.size} vs {x2.size}")
    n = x1.size
    a = np.sort(x1)
    b = np.sort(x2)
    point = float(np.abs(a - b).mean())
    gen = np.random.default_rng(rng.derive(seed, 0x7D5))
    boots = np.empty(n_boot)
    for i in range(n_boot):
        ra = np.sort(gen.choice(a, size=n, replace=True))
        rb = np.sort(gen.choice(b, size=n, replace=True))
        boots[i] = np.abs(ra - rb).mean()
    return _finish(point, boots, "w1-sorted", (n, n))


def small_ball(batch, alpha: float) -> DistanceEstimate:
    """P(|value| <= alpha) with an exact Clopper-Pearson 95% interval."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    x = _scalar_values(batch)
    n = x.size
    if n < 10_000:
        raise ValueError(f"need at least 10000 samples, got {n}")
    k = int(np.count_nonzero(np.abs(x) <= alpha))
    p = k / n
    lo = 0.0 if k == 0 else float(beta_dist.ppf(0.025, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(0.975, k + 1, n - k))
    return DistanceEstimate(p, lo, hi, "smallball", (n,))

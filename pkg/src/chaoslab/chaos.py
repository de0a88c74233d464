"""Finite chaos expansions as first-class values.

A ChaosElement is E[F] plus one symmetric kernel per active order,
realizing F = c + sum_k I_k(f_k) over n iid standard Gaussians.  The
product formula turns multiplication into contractions, which makes
every moment a finite exact computation; the Malliavin derivative,
carre du champ and Ornstein-Uhlenbeck generator are kernel surgery.

Multiplication is capped at total order ORDER_CAP to bound the
combinatorial blowup; the cap covers fourth moments of order-2 elements
and squares of order-4 elements, which is everything the experiments
need.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import rng
from .kernels import (Index, SymmetricKernel, hermite_table, inner,
                      perm_count, slice_label, sym_contract, zero_kernel)

ORDER_CAP = 8

_SAMPLE_CHUNK = 1 << 16


class OrderCapError(ValueError):
    """Raised when a product would exceed ORDER_CAP; lower the moment order."""


@dataclass(frozen=True)
class ChaosElement:
    """c + sum_k I_k(f_k) over basis labels 1..dim."""

    dim: int
    constant: float = 0.0
    kernels: Mapping[int, SymmetricKernel] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        clean = {}
        for k, f in self.kernels.items():
            if f.order != k:
                raise ValueError(f"kernel in slot {k} has order {f.order}")
            if f.dim != self.dim:
                raise ValueError(f"kernel in slot {k} has dim {f.dim}, element has {self.dim}")
            if not f.is_zero():
                clean[k] = f
        object.__setattr__(self, "kernels", clean)

    @property
    def max_order(self) -> int:
        return max(self.kernels) if self.kernels else 0

    def kernel(self, k: int) -> SymmetricKernel:
        return self.kernels.get(k, zero_kernel(k, self.dim))

    def is_constant(self) -> bool:
        return not self.kernels


@dataclass(frozen=True)
class ChaosVector:
    """Tuple of chaos elements over a common basis."""

    components: tuple[ChaosElement, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("vector needs at least one component")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValueError(f"components disagree on dim: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class SampleBatch:
    """Monte Carlo draws plus the seed and generator tag that produced them."""

    values: np.ndarray
    seed: int
    tag: str

    @property
    def n(self) -> int:
        return self.values.shape[0]


def constant_element(dim: int, c: float) -> ChaosElement:
    return ChaosElement(dim, float(c), {})


def single_integral(f: SymmetricKernel, scale: float = 1.0) -> ChaosElement:
    """The multiple integral I_k(scale * f) as a chaos element."""
    return ChaosElement(f.dim, 0.0, {f.order: f.scale(scale)})


def basis_element(dim: int, i: int) -> ChaosElement:
    """I_1(e_i): the coordinate Gaussian X_i."""
    if not (1 <= i <= dim):
        raise ValueError(f"label {i} outside 1..{dim}")
    return ChaosElement(dim, 0.0, {1: SymmetricKernel(1, dim, {(i,): 1.0})})


def linear_combine(terms: Sequence[tuple[float, ChaosElement]]) -> ChaosElement:
    """Coefficientwise linear combination; exact zeros dropped."""
    if not terms:
        raise ValueError("empty combination")
    dims = {fel.dim for _, fel in terms}
    if len(dims) != 1:
        raise ValueError(f"dim mismatch in combination: {sorted(dims)}")
    dim = dims.pop()
    const = 0.0
    acc: dict[int, dict[Index, float]] = {}
    for a, fel in terms:
        a = float(a)
        if a == 0.0:
            continue
        const += a * fel.constant
        for k, ker in fel.kernels.items():
            slot = acc.setdefault(k, {})
            for idx, c in ker.entries.items():
                s = slot.get(idx, 0.0) + a * c
                if s == 0.0:
                    slot.pop(idx, None)
                else:
                    slot[idx] = s
    kernels = {k: SymmetricKernel(k, dim, {i: v for i, v in slot.items() if v != 0.0})
               for k, slot in acc.items()}
    return ChaosElement(dim, const, kernels)


def project(fel: ChaosElement, k: int) -> ChaosElement:
    """Orthogonal projection on the kth chaos (k = 0 gives the mean)."""
    if k < 0:
        raise ValueError("projection order must be >= 0")
    if k == 0:
        return constant_element(fel.dim, fel.constant)
    ker = fel.kernels.get(k)
    if ker is None:
        return constant_element(fel.dim, 0.0)
    return ChaosElement(fel.dim, 0.0, {k: ker})


def _add_scaled(slot: dict[Index, float], ker: SymmetricKernel, w: float) -> None:
    if w == 0.0:
        return
    for idx, c in ker.entries.items():
        s = slot.get(idx, 0.0) + w * c
        if s == 0.0:
            slot.pop(idx, None)
        else:
            slot[idx] = s


def multiply(f_el: ChaosElement, g_el: ChaosElement) -> ChaosElement:
    """Exact chaos expansion of the pointwise product.

    Each kernel pair (order k, order l) expands through the product
    formula  I_k(f) I_l(g) = sum_r r! C(k,r) C(l,r) I_{k+l-2r}(sym contraction),
    with the full contraction feeding the constant.
    """
    if f_el.dim != g_el.dim:
        raise ValueError(f"dim mismatch: {f_el.dim} vs {g_el.dim}")
    if f_el.max_order + g_el.max_order > ORDER_CAP:
        raise OrderCapError(
            f"product order {f_el.max_order + g_el.max_order} exceeds cap {ORDER_CAP}")
    dim = f_el.dim
    const = f_el.constant * g_el.constant
    acc: dict[int, dict[Index, float]] = {}
    for k, ker in f_el.kernels.items():
        _add_scaled(acc.setdefault(k, {}), ker, g_el.constant)
    for l, ker in g_el.kernels.items():
        _add_scaled(acc.setdefault(l, {}), ker, f_el.constant)
    for k, f in f_el.kernels.items():
        for l, g in g_el.kernels.items():
            for r in range(min(k, l) + 1):
                w = math.factorial(r) * math.comb(k, r) * math.comb(l, r)
                if k + l - 2 * r == 0:
                    const += w * inner(f, g)
                else:
                    h = sym_contract(f, g, r)
                    _add_scaled(acc.setdefault(k + l - 2 * r, {}), h, w)
    kernels = {k: SymmetricKernel(k, dim, dict(slot)) for k, slot in acc.items() if slot}
    return ChaosElement(dim, const, kernels)


def expectation(fel: ChaosElement) -> float:
    return fel.constant


def covariance(f_el: ChaosElement, g_el: ChaosElement) -> float:
    """Exact covariance: orders pair off by isometry, sum_k k! <f_k, g_k>."""
    if f_el.dim != g_el.dim:
        raise ValueError(f"dim mismatch: {f_el.dim} vs {g_el.dim}")
    total = 0.0
    for k, f in f_el.kernels.items():
        g = g_el.kernels.get(k)
        if g is not None:
            total += math.factorial(k) * inner(f, g)
    return total


def variance(fel: ChaosElement) -> float:
    return covariance(fel, fel)


def moment(fel: ChaosElement, m: int) -> float:
    """Exact E[F^m] via repeated products and the orthogonality pairing.

    The power is split as F^a * F^(m-a) with a = m // 2 so only orders up
    to ceil(m/2) * max_order are ever materialized; the expectation of
    the final product is read off through the isometry.
    """
    if m < 1:
        raise ValueError("moment order must be >= 1")
    if m * fel.max_order > ORDER_CAP:
        raise OrderCapError(
            f"moment {m} of an order-{fel.max_order} element exceeds cap {ORDER_CAP}")
    if m == 1:
        return fel.constant
    a = m // 2
    b = m - a
    powers = {1: fel}
    for j in range(2, b + 1):
        powers[j] = multiply(powers[j - 1], fel)
    fa, fb = powers[a], powers[b]
    return fa.constant * fb.constant + covariance(fa, fb)


def _runs(alpha: Index) -> list[tuple[int, int]]:
    out = []
    for v in alpha:
        if out and out[-1][0] == v:
            out[-1] = (v, out[-1][1] + 1)
        else:
            out.append((v, 1))
    return out


def evaluate_batch(fel: ChaosElement, x: np.ndarray) -> np.ndarray:
    """Evaluate at each row of x (shape (N, dim)); returns shape (N,).

    Each sorted multi-index contributes perm_count * coefficient times a
    product of per-label Hermite factors, which is Ito's identity for
    multiple integrals of basis tensors.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != fel.dim:
        raise ValueError(f"points must have shape (N, {fel.dim})")
    out = np.full(x.shape[0], fel.constant)
    tables: dict[int, np.ndarray] = {}

    def factor(v: int, m: int) -> np.ndarray:
        if m == 1:
            return x[:, v - 1]
        tab = tables.get(v)
        if tab is None or tab.shape[0] <= m:
            tab = hermite_table(m, x[:, v - 1])
            tables[v] = tab
        return tab[m]

    for ker in fel.kernels.values():
        for alpha, c in ker.entries.items():
            runs = _runs(alpha)
            term = factor(*runs[0]) * (perm_count(alpha) * c)
            for v, m in runs[1:]:
                term *= factor(v, m)
            out += term
    return out


def evaluate(fel: ChaosElement, x: Sequence[float]) -> float:
    """Evaluate the polynomial at a single point of length dim."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != fel.dim:
        raise ValueError(f"point must have length {fel.dim}")
    return float(evaluate_batch(fel, x[None, :])[0])


def gaussian_matrix(dim: int, n_samples: int, seed: int, start: int = 0,
                    workers: int = 1) -> np.ndarray:
    """Rows are iid N(0, I_dim); row i depends only on (seed, i)."""
    out = np.empty((n_samples, dim))
    spans = [(i, min(i + _SAMPLE_CHUNK, n_samples)) for i in range(0, n_samples, _SAMPLE_CHUNK)]

    def fill(span):
        lo, hi = span
        out[lo:hi] = rng.gaussians(seed, (start + lo) * dim,
                                   (hi - lo) * dim).reshape(hi - lo, dim)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, spans))
    else:
        for span in spans:
            fill(span)
    return out


def sample(target: ChaosElement | ChaosVector, n_samples: int, seed: int,
           workers: int = 1) -> SampleBatch:
    """Draw n_samples evaluations under iid standard Gaussian coordinates.

    Deterministic per (seed, n_samples); the worker count only partitions
    the counter stream and cannot change any value.
    """
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    if isinstance(target, ChaosVector):
        x = gaussian_matrix(target.dim, n_samples, seed, workers=workers)
        vals = np.column_stack([evaluate_batch(c, x) for c in target.components])
        return SampleBatch(vals, seed, f"gauss-bm:dim={target.dim}:d={len(target)}")
    x = gaussian_matrix(target.dim, n_samples, seed, workers=workers)
    return SampleBatch(evaluate_batch(target, x), seed, f"gauss-bm:dim={target.dim}")


def mderiv(fel: ChaosElement, i: int) -> ChaosElement:
    """Malliavin derivative in direction e_i: each order drops by one.

    D_i F = sum_k k I_{k-1}(f_k(., i)); the first-order slot lands in the
    constant.
    """
    if not (1 <= i <= fel.dim):
        raise ValueError(f"label {i} outside 1..{fel.dim}")
    const = 0.0
    kernels: dict[int, SymmetricKernel] = {}
    for k, ker in fel.kernels.items():
        sliced = slice_label(ker, i)
        if k == 1:
            const += sliced
        else:
            kernels[k - 1] = sliced.scale(float(k))
    return ChaosElement(fel.dim, const, kernels)


def carre_du_champ(f_el: ChaosElement, g_el: ChaosElement) -> ChaosElement:
    """Chaos expansion of <DF, DG> via the closed contraction formula.

    <DF, DG> = sum_{k,l} k l sum_{r=1}^{k^l} (r-1)! C(k-1,r-1) C(l-1,r-1)
               I_{k+l-2r}(f_k sym-contract_r g_l);
    the result lives in orders <= max_order(F) + max_order(G) - 2.
    """
    if f_el.dim != g_el.dim:
        raise ValueError(f"dim mismatch: {f_el.dim} vs {g_el.dim}")
    dim = f_el.dim
    const = 0.0
    acc: dict[int, dict[Index, float]] = {}
    for k, f in f_el.kernels.items():
        for l, g in g_el.kernels.items():
            for r in range(1, min(k, l) + 1):
                w = k * l * math.factorial(r - 1) * math.comb(k - 1, r - 1) \
                    * math.comb(l - 1, r - 1)
                if k + l - 2 * r == 0:
                    const += w * inner(f, g)
                else:
                    h = sym_contract(f, g, r)
                    _add_scaled(acc.setdefault(k + l - 2 * r, {}), h, w)
    kernels = {k: SymmetricKernel(k, dim, dict(slot)) for k, slot in acc.items() if slot}
    return ChaosElement(dim, const, kernels)


def ou_generator(fel: ChaosElement) -> ChaosElement:
    """Ornstein-Uhlenbeck generator: multiply the kth chaos by -k."""
    kernels = {k: ker.scale(-float(k)) for k, ker in fel.kernels.items()}
    return ChaosElement(fel.dim, 0.0, kernels)


def check_ibp(f_el: ChaosElement, g_el: ChaosElement,
              h_el: ChaosElement) -> tuple[float, float]:
    """Both sides of the integration-by-parts identity.

    lhs = -E[H G LF],  rhs = E[H <DG, DF>] + E[G <DH, DF>]; both exact,
    equal up to roundoff.  With H = 1 this is the duality delta D = -L.
    """
    lhs = -expectation_of_product(multiply(h_el, g_el), ou_generator(f_el))
    rhs = expectation_of_product(h_el, carre_du_champ(g_el, f_el)) \
        + expectation_of_product(g_el, carre_du_champ(h_el, f_el))
    return lhs, rhs


def expectation_of_product(f_el: ChaosElement, g_el: ChaosElement) -> float:
    """E[F G] through the isometry, without materializing the product."""
    if f_el.dim != g_el.dim:
        raise ValueError(f"dim mismatch: {f_el.dim} vs {g_el.dim}")
    return f_el.constant * g_el.constant + covariance(f_el, g_el)


def malliavin_matrix(vec: ChaosVector) -> list[list[ChaosElement]]:
    """Matrix of pairwise carres du champ <DV_i, DV_j>, as chaos elements."""
    d = len(vec)
    mat: list[list[ChaosElement]] = [[None] * d for _ in range(d)]  # type: ignore
    for i in range(d):
        for j in range(i, d):
            g = carre_du_champ(vec.components[i], vec.components[j])
            mat[i][j] = g
            mat[j][i] = g
    return mat


def det_chaos(mat: Sequence[Sequence[ChaosElement]]) -> ChaosElement:
    """Leibniz determinant of a small matrix of chaos elements (d <= 3)."""
    d = len(mat)
    if any(len(row) != d for row in mat):
        raise ValueError("matrix must be square")
    if d > 3:
        raise ValueError("determinant supported only for d <= 3")
    if d == 1:
        return mat[0][0]
    if d == 2:
        return linear_combine([(1.0, multiply(mat[0][0], mat[1][1])),
                               (-1.0, multiply(mat[0][1], mat[1][0]))])
    terms = []
    for sign, (a, b, c) in (
            (1.0, (0, 1, 2)), (1.0, (1, 2, 0)), (1.0, (2, 0, 1)),
            (-1.0, (0, 2, 1)), (-1.0, (2, 1, 0)), (-1.0, (1, 0, 2))):
        terms.append((sign, multiply(multiply(mat[0][a], mat[1][b]), mat[2][c])))
    return linear_combine(terms)

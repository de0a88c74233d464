"""Seeded random inputs shared across test modules."""

import numpy as np

from chaoslab import ChaosElement, SymmetricKernel, make_kernel


def random_kernel(gen: np.random.Generator, order: int, dim: int,
                  terms: int = 4) -> SymmetricKernel:
    raw = []
    for _ in range(int(gen.integers(1, terms + 1))):
        idx = tuple(sorted(gen.integers(1, dim + 1, size=order).tolist()))
        raw.append((idx, float(gen.uniform(-1.0, 1.0))))
    return make_kernel(order, dim, raw)


def nonzero_kernel(gen: np.random.Generator, order: int, dim: int,
                   terms: int = 4) -> SymmetricKernel:
    while True:
        ker = random_kernel(gen, order, dim, terms)
        if not ker.is_zero():
            return ker


def random_element(gen: np.random.Generator, dim: int, max_order: int,
                   terms: int = 3, with_constant: bool = True) -> ChaosElement:
    kernels = {}
    for k in range(1, max_order + 1):
        if gen.random() < 0.85:
            ker = random_kernel(gen, k, dim, terms)
            if not ker.is_zero():
                kernels[k] = ker
    const = float(gen.uniform(-1.0, 1.0)) if with_constant else 0.0
    return ChaosElement(dim, const, kernels)

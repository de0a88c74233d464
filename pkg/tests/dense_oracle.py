"""Dense brute-force oracle for the sparse kernel algebra.

Everything here materializes full (dim,)*order arrays and enumerates
tuples and permutations directly, so it is independent of the sparse
multiset combinatorics it is used to check.  Desk-scale only.
"""

from itertools import permutations, product

import numpy as np

from chaoslab import BipartiteKernel, SymmetricKernel


def dense_from_kernel(ker: SymmetricKernel) -> np.ndarray:
    arr = np.zeros((ker.dim,) * ker.order)
    for alpha, c in ker.entries.items():
        for perm in set(permutations(alpha)):
            arr[tuple(i - 1 for i in perm)] = c
    return arr


def kernel_from_dense(arr: np.ndarray, dim: int) -> SymmetricKernel:
    order = arr.ndim
    entries = {}
    for alpha in product(range(1, dim + 1), repeat=order):
        if tuple(sorted(alpha)) == alpha:
            v = float(arr[tuple(i - 1 for i in alpha)])
            if v != 0.0:
                entries[alpha] = v
    return SymmetricKernel(order, dim, entries)


def dense_inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.tensordot(a, b, axes=a.ndim))


def dense_contract(a: np.ndarray, b: np.ndarray, r: int) -> np.ndarray:
    if r == 0:
        return np.multiply.outer(a, b)
    ax_a = list(range(a.ndim - r, a.ndim))
    ax_b = list(range(b.ndim - r, b.ndim))
    return np.tensordot(a, b, axes=(ax_a, ax_b))


def dense_symmetrize(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    perms = list(permutations(range(arr.ndim)))
    for perm in perms:
        out += np.transpose(arr, perm)
    return out / len(perms)


def dense_sym_contract(f: SymmetricKernel, g: SymmetricKernel, r: int):
    """Reference value of the symmetrized contraction, fully dense."""
    a = dense_from_kernel(f)
    b = dense_from_kernel(g)
    raw = dense_contract(a, b, r)
    if raw.ndim == 0:
        return float(raw)
    return dense_symmetrize(raw)


def dense_from_bipartite(t: BipartiteKernel) -> np.ndarray:
    arr = np.zeros((t.dim,) * (t.left + t.right))
    for (xi, eta), v in t.entries.items():
        for p1 in set(permutations(xi)):
            for p2 in set(permutations(eta)):
                arr[tuple(i - 1 for i in p1 + p2)] = v
    return arr

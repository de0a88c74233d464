"""Symmetric kernels: storage convention, inner products, contractions.

A kernel of order k over basis labels 1..n is a symmetric function on
index tuples; we store one coefficient per sorted multi-index and count
permutations in every sum.
"""

from chaoslab import contract, inner, make_kernel, sym_contract, symmetrize

# the coefficient at (1,2) is the value on BOTH tuples (1,2) and (2,1)
f = make_kernel(2, 3, [((1, 2), 1.0)])
print("entries of f:", dict(f.entries))
print("||f||^2 =", inner(f, f), " (two tuples, each contributing 1)")

# contracting one argument pairs f against itself over a shared label
t = contract(f, f, 1)
print("\nraw contraction f x_1 f:", dict(t.entries))
print("it is already symmetric here; symmetrized:", dict(symmetrize(t).entries))

# full contraction collapses to the inner product
print("\nfull contraction f x_2 f =", sym_contract(f, f, 2))

# the zero-contraction is the (symmetrized) tensor product; weights are
# the fraction of argument orderings realizing each sorted index
g = make_kernel(2, 3, [((3, 3), 1.0)])
prod = sym_contract(f, g, 0)
print("\nsymmetrized tensor product entries:")
for idx, c in sorted(prod.entries.items()):
    print("  ", idx, "->", round(c, 6))

# norms contract: ||f ~x_r g|| <= ||f x_r g|| <= ||f|| ||g||
h = make_kernel(2, 3, [((2, 3), 1.0), ((1, 1), -0.5)])
raw = contract(f, h, 1)
print("\nnorm chain at r=1:",
      round(symmetrize(raw).norm(), 6), "<=", round(raw.norm(), 6),
      "<=", round(f.norm() * h.norm(), 6))

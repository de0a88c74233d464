"""Invariance under coordinate laws, and anti-concentration probes.

A multilinear polynomial with small per-variable influence has nearly
the same law under Rademacher coordinates as under Gaussians.  The
anti-concentration probe checks the normalized small-ball ratio of a
Gaussian polynomial, including the cubic whose alpha^(1/3) scaling is
sharp.
"""

from chaoslab import (basis_element, carbery_wright_probe, df_small_ball_probe,
                      linear_combine, make_kernel, moo_invariance,
                      rademacher_average, single_integral)

specs = [rademacher_average(n) for n in (25, 100, 400)]
rep = moo_invariance(specs, n_samples=100_000, seed=31)
print("invariance experiment:", rep.verdict)
print(f"{'vars':>6} {'max influence':>14} {'fm to gaussian':>15}")
for row in rep.rows:
    print(f"{row['dim']:6d} {row['max_influence']:14.5f} {row['fm']['value']:15.4f}")

cubic = linear_combine([
    (1.0, single_integral(make_kernel(3, 1, [((1, 1, 1), 1.0)]))),
    (3.0, basis_element(1, 1))])  # X^3 in the Hermite basis
rep = carbery_wright_probe(cubic, [1.0, 0.1, 1e-3], n_samples=500_000, seed=32)
print("\nanti-concentration of X^3:", rep.verdict)
for row in rep.rows:
    print(f"  alpha={row['alpha']:<7g} P(|Q|<=alpha)={row['prob']['value']:.5f} "
          f"normalized ratio={row['ratio']:.4f}")
print("  (as alpha -> 0 the probability behaves like sqrt(2/pi) alpha^(1/3))")

f = single_integral(make_kernel(2, 2, [((1, 2), 1.0)]))
rep = df_small_ball_probe(f, [1.0, 0.5, 0.25], n_samples=100_000, seed=33)
print("\ngradient-norm small balls for I_2 on two labels:", rep.verdict)
for row in rep.rows:
    print(f"  lambda={row['lambda']:<5g} P(||DF||<=lambda)={row['prob']['value']:.5f} "
          f"ratio={row['ratio']:.4f}")

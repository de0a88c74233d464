"""Malliavin derivative, carre du champ, generator, integration by parts.

All four operators act on kernels directly, so identities that hold in
L2 hold here coefficient by coefficient.
"""

from chaoslab import (ChaosVector, basis_element, carre_du_champ, check_ibp,
                      constant_element, det_chaos, evaluate, expectation,
                      make_kernel, malliavin_matrix, mderiv, ou_generator,
                      single_integral)

h2 = single_integral(make_kernel(2, 2, [((1, 1), 1.0)]))  # H_2(X_1)

d1 = mderiv(h2, 1)
print("D_1 H_2(X_1) =", dict(d1.kernels[1].entries), " (i.e. 2 X_1)")
print("D_2 H_2(X_1) =", mderiv(h2, 2).constant, "(no dependence)")

# carre du champ: ||D H_2||^2 = 4 X_1^2, as a chaos expansion
grad = carre_du_champ(h2, h2)
print("\n<D H_2, D H_2> constant:", grad.constant,
      "kernels:", {k: dict(v.entries) for k, v in grad.kernels.items()})
print("value at x=1.5:", evaluate(grad, [1.5, 0.0]), "= 4 * 1.5^2")

# the generator multiplies the kth chaos by -k
print("\nL H_2 kernels:", dict(ou_generator(h2).kernels[2].entries))

# integration by parts: -E[HG LF] = E[H <DG,DF>] + E[G <DH,DF>]
f = h2
g = basis_element(2, 1)
h = constant_element(2, 1.0)
lhs, rhs = check_ibp(f, g, h)
print("\nintegration by parts (H=1): lhs =", lhs, " rhs =", rhs)

# the Malliavin matrix of an independent pair is diagonal
vec = ChaosVector((basis_element(2, 1),
                   single_integral(make_kernel(2, 2, [((2, 2), 1.0)]))))
gamma = malliavin_matrix(vec)
print("\nGamma[0][1] is the zero element:", gamma[0][1].constant,
      gamma[0][1].kernels)
print("E[det Gamma] =", expectation(det_chaos(gamma)))

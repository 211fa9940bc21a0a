"""A first look at the spectral objects: eigenvalues, eigenfunctions and the rescaling constants."""

import numpy as np

from mdspde import ModelParams, eigenfunction_matrix, eigenvalue, rescaling_constant_K, upsilon
from mdspde.model import multi_indices
from mdspde.simulate import discrete_inner_product, grid_points

p = ModelParams(d=2, theta0=0.0, nu=(6.0, 0.0), eta=1.0, sigma=1.0, alpha_prime=0.4)
print("kappa =", p.kappa, " sigma0^2 =", p.sigma0_sq, " alpha =", p.alpha)

# lowest few eigenvalues; the drift nu shifts all of them by |nu|^2 / (4 eta)
for k in [(1, 1), (2, 1), (1, 2), (3, 3)]:
    print(k, round(eigenvalue(p, k), 4))

# the sine basis is orthonormal on the grid j/M under the weight exp(kappa.y)
M = 10
ks = multi_indices(M - 1, 2)
E = eigenfunction_matrix(p, ks, grid_points(M, 2))
G = np.array([[discrete_inner_product(p, M, E[:, a], E[:, b]) for b in range(len(ks))] for a in range(len(ks))])
print("max |G - I| on the grid:", np.abs(G - np.eye(len(ks))).max())

for a in (0.2, 0.4, 0.6, 0.8):
    print(f"alpha'={a}: K={rescaling_constant_K(d=2, eta=1.0, alpha_prime=a):.6f}  Upsilon={upsilon(a):.6f}")

"""
Eigenvalues near zero from a small effective matrix
===================================================

If the complement block of a symmetric matrix is far from zero, the
eigenvalues in ``|lambda| < sigma_min(PcMPc)/2`` are exactly the roots of
``det H(lambda)`` with ``H`` the Schur complement on the P block.
"""

import numpy as np
import scipy.linalg as la

from hyperwave.operator import analyticity_window, schur_eigenvalues, schur_reduce

# The two-by-two toy: 0.1 - 0.05^2 / 0.1
M = np.array([[0.1, 0.05], [0.05, 0.1]])
print("H(0) =", schur_reduce(M, 0.0, [True, False]))

rng = np.random.default_rng(1)
n = 12
G = 0.3 * rng.standard_normal((n, n))
P = np.zeros(n, dtype=bool)
P[:4] = True
diag = np.where(P, rng.uniform(-0.5, 0.5, n), rng.choice([-1, 1], n) * rng.uniform(3, 6, n))
M = G + G.T + np.diag(diag)

w = analyticity_window(M, P)
roots = schur_eigenvalues(M, P)
direct = la.eigvalsh(M)
print(f"window |lambda| < {w:.3f}")
print("from H(lambda):", np.round(roots, 12))
print("eigvalsh      :", np.round(direct[np.abs(direct) < w], 12))

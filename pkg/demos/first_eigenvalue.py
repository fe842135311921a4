"""
First Dirichlet eigenvalue of the p-Laplacian
=============================================

lambda_1p is the minimum of int |grad w|^p / int |w|^p. For p = 2 on the unit
interval it is pi^2, and on the unit square 2 pi^2. For other p on an interval
there is a closed form, which makes a good check of the discretization.
"""
import numpy as np

import nehari_nodal as nn

est = nn.lambda_1p(nn.build_interval_mesh(256), 2.0)
print(f"p=2, (0,1):      {est.lam:.6f}   (pi^2 = {np.pi ** 2:.6f})")

est = nn.lambda_1p(nn.build_rect_mesh(48, 48), 2.0)
print(f"p=2, unit square: {est.lam:.6f}   (2 pi^2 = {2 * np.pi ** 2:.6f})")

# On (0, 1): lambda_1p = (p - 1) (2 pi / (p sin(pi/p)))^p
for p in (2.5, 3.0, 4.0):
    exact = (p - 1) * (2 * np.pi / (p * np.sin(np.pi / p))) ** p
    est = nn.lambda_1p(nn.build_interval_mesh(256), p)
    print(f"p={p}: {est.lam:.5f} vs {exact:.5f} after {est.iterations} iterations")

# Stretching the domain by a factor L scales the eigenvalue by L^-p.
p = 3.0
a = nn.lambda_1p(nn.build_interval_mesh(128), p).lam
b = nn.lambda_1p(nn.build_interval_mesh(128, 0.0, 2.0), p).lam
print(f"ratio on (0,2) vs (0,1): {b / a:.6f}  (2^-p = {2 ** -p:.6f})")

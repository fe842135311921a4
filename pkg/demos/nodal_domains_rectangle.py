"""
Nodal solution on a rectangle
=============================

On the 2 x 1 rectangle the least-energy nodal solution splits the long side,
like the second Dirichlet eigenfunction. Nodal domains are counted as
connected components of the strictly positive and strictly negative vertex
sets.
"""
import numpy as np

import nehari_nodal as nn

mesh = nn.build_rect_mesh(24, 12, 2.0, 1.0)
fn = nn.EnergyFunctional(mesh, nn.Nonlinearity(p=3, q=4))
sol = nn.multi_start(fn, eps=0.1, opts=nn.SolveOptions(n_starts=3))
rep = nn.full_report(fn, 0.1, sol.u)
print(f"energy {sol.energy:.6g}, residual {sol.residual:.1e}")
print(f"Morse index {rep.morse_index}, nodal domains {rep.nodal_domains}")

# Sign pattern on the vertex grid, top row first
c = sol.u.coeffs.reshape(13, 25)
for row in c[::-1]:
    print("".join("+" if x > 1e-8 else "-" if x < -1e-8 else "." for x in row))
print("mean x of the positive part:", np.round(mesh.vertices[sol.u.coeffs > 0, 0].mean(), 3))

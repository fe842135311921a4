"""
``nehari_nodal`` computes least-energy sign-changing solutions of

    -eps^2 Lap u - Lap_p u = f(u)  in Omega,   u = 0 on the boundary,

for p > 2 by descent on the nodal Nehari set, on P1 finite elements over
intervals and rectangles. It also measures the Morse index and the number
of nodal domains of the computed solutions and tracks the least nodal energy
as eps -> 0.

    >>> import nehari_nodal as nn
    >>> mesh = nn.build_interval_mesh(128)
    >>> fn = nn.EnergyFunctional(mesh, nn.Nonlinearity(p=3, q=4))
    >>> sol = nn.multi_start(fn, eps=0.0)

Set the environment variable NODAL_LOG to error, info or debug to control
logging from the package.
"""
import logging as _logging
import os as _os

__version__ = "0.1.0"

from .diagnostics import (IndexReport, full_report, index_nodal_consistency, inertia,
                          morse_index, nodal_domains)
from .errors import NodalError
from .functional import (DiscreteFunction, EnergyFunctional, EnergyParts, SpectralEstimate,
                         diffusion_flux, diffusion_jacobian, diffusion_jacobian_eigs,
                         ellipticity_bounds_check, lambda_1p)
from .harness import (MeshSpec, ProblemSpec, RunRecord, SweepReport, export_csv, parse_csv,
                      read_record, revalidate, solve_once, sweep_epsilon, write_record)
from .mesh import Mesh, build_interval_mesh, build_rect_mesh, vertex_adjacency
from .nehari import (negative_part, positive_part, project_nodal, project_ray,
                     tangency_defect)
from .nonlinearity import HypothesisReport, Nonlinearity, validate_hypotheses
from .solver import SolveOptions, Solution, minimize_nodal, minmax_energy, multi_start

_level = _os.environ.get("NODAL_LOG")
if _level:
    _logging.getLogger(__name__).setLevel(_level.upper())

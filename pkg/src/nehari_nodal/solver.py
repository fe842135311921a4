"""
Least-energy nodal solutions by descent on the nodal Nehari set.

Each iterate is first projected onto the nodal Nehari set (both signed parts
rescaled to their fibering maxima), then moved along a Laplace-preconditioned
descent direction built from the gradient at the projected point. Step sizes
are accepted by an Armijo test on the projected energy, so the sequence of
projected energies never increases.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from ._descent import QuasiNewton
from .errors import (AllStartsFailedError, DegenerateIterateError, InvalidInitError,
                     NodalError, NotSignChangingError)
from .functional import DiscreteFunction
from .nehari import negative_part, positive_part, project_nodal

log = logging.getLogger(__name__)

COLLAPSE_FLOOR = 1e-14


@dataclass
class SolveOptions:
    tol_grad: float = 1e-8
    tol_proj: float = 1e-10
    max_iter: int = 10_000
    step0: float = 1.0
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    n_starts: int = 8
    seed: int = 0
    # quasi-Newton memory in the Laplace metric; 0 is plain preconditioned steepest descent
    memory: int = 8
    # stop after this many iterations without halving the best residual
    stall_window: int = 200

    def __post_init__(self):
        for name in ("tol_grad", "tol_proj", "max_iter", "step0", "armijo_c", "n_starts", "stall_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if self.memory < 0:
            raise ValueError("memory must be nonnegative")


@dataclass
class Solution:
    u: DiscreteFunction
    energy: float
    residual: float
    proj_defects: tuple
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)
    min_part_norm: float = np.inf
    coercivity_margin: float = np.inf
    starts: list = field(default_factory=list, repr=False)


def _part_norms(fn, w):
    p = fn.nl.p
    return (fn.gradient_integrals(positive_part(w))[1] ** (1 / p),
            fn.gradient_integrals(negative_part(w))[1] ** (1 / p))


def _is_sign_changing(fn, c):
    inner = c[fn.mesh.interior]
    return bool(np.any(inner > 0) and np.any(inner < 0))


def minimize_nodal(fn, eps, init, opts=None):
    """Minimize J_eps over the discrete nodal Nehari set starting from ``init``."""
    opts = opts or SolveOptions()
    c = fn.coeffs(init)
    if not _is_sign_changing(fn, c):
        raise InvalidInitError("initial guess must change sign")
    nl, inner = fn.nl, fn.mesh.interior
    floor_c = nl.coercivity_constant(fn.mesh.measure)
    floor_k = 1.0 / nl.p - 1.0 / nl.m

    proj = project_nodal(fn, eps, c, opts.tol_proj)
    w, E = proj.projected, proj.energy
    r = fn.gradient(eps, w)
    res = fn.dual_norm(r)
    history = [E]
    min_part = min(_part_norms(fn, w))
    margin = E - (floor_k * fn.gradient_integrals(w)[1] + floor_c)
    qn = QuasiNewton(fn.solve_stiffness, opts.memory)
    # energies closer than this are indistinguishable in floating point
    noise = 64 * np.finfo(float).eps

    converged = res <= opts.tol_grad
    it = 0
    best_res, best_it = res, 0
    while not converged and it < opts.max_iter:
        if it - best_it >= opts.stall_window:
            log.info("no residual progress in %d iterations (residual %.3e)", opts.stall_window, res)
            break
        it += 1
        d = qn.direction(r)
        slope = float(r @ d)
        eta = opts.step0
        accepted = None
        while eta * np.linalg.norm(d, np.inf) > 1e-16 * max(np.linalg.norm(w, np.inf), 1.0):
            cand = w.copy()
            cand[inner] += eta * d
            if _is_sign_changing(fn, cand):
                try:
                    trial = project_nodal(fn, eps, cand, opts.tol_proj)
                except NodalError:
                    trial = None
                if trial is not None and trial.energy <= E + opts.armijo_c * eta * slope + noise * abs(E):
                    accepted = trial
                    break
            eta *= opts.backtrack
        if accepted is None:
            if qn.pairs:
                qn.reset()
                continue
            log.info("line search stalled at iteration %d (residual %.3e)", it, res)
            break
        w_new = accepted.projected
        parts = _part_norms(fn, w_new)
        if min(parts) < COLLAPSE_FLOOR:
            raise DegenerateIterateError(f"a signed part collapsed at iteration {it}: norms {parts}")
        min_part = min(min_part, *parts)
        r_new = fn.gradient(eps, w_new)
        qn.update((w_new - w)[inner], r_new - r)
        w, r, E, proj = w_new, r_new, accepted.energy, accepted
        margin = min(margin, E - (floor_k * fn.gradient_integrals(w)[1] + floor_c))
        history.append(E)
        res = fn.dual_norm(r)
        converged = res <= opts.tol_grad
        if res < 0.5 * best_res:
            best_res, best_it = res, it
        if it % 200 == 0:
            log.debug("iter %d  J=%.12g  residual=%.3e", it, E, res)

    converged = converged and max(proj.defects) <= opts.tol_proj
    return Solution(DiscreteFunction(fn.mesh, w), float(E), float(res), proj.defects, it,
                    bool(converged), history, float(min_part), float(margin))


def initial_guesses(mesh, n_starts, seed=0):
    """Deterministic two-lobe seed followed by seeded random low-frequency combinations."""
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    x = (mesh.vertices - lo) / (hi - lo)          # unit box coordinates
    rng = np.random.default_rng(seed)
    inner = mesh.interior

    def modes(k):
        s = np.sin(np.pi * k[0] * x[:, 0])
        for d in range(1, mesh.dim):
            s = s * np.sin(np.pi * k[d] * x[:, d])
        return s

    if mesh.dim == 1:
        first = modes((2,))
        ks = [(k,) for k in range(1, 5)]
    else:
        long_axis = int(np.argmax(hi - lo))
        first = modes((2, 1) if long_axis == 0 else (1, 2))
        ks = [(i, j) for i in range(1, 4) for j in range(1, 4)]
    guesses = [first]
    while len(guesses) < n_starts:
        coef = rng.standard_normal(len(ks)) / np.array([sum(k) for k in ks])
        g = sum(a * modes(k) for a, k in zip(coef, ks))
        g = np.where(mesh.boundary_mask, 0.0, g)
        if np.any(g[inner] > 0) and np.any(g[inner] < 0):
            guesses.append(g)
    return [np.where(mesh.boundary_mask, 0.0, g) for g in guesses[:n_starts]]


def multi_start(fn, eps, opts=None):
    """Run minimize_nodal from several sign-changing seeds; keep the lowest converged energy."""
    opts = opts or SolveOptions()
    best, best_partial, starts = None, None, []
    for k, g in enumerate(initial_guesses(fn.mesh, opts.n_starts, opts.seed)):
        try:
            sol = minimize_nodal(fn, eps, g, opts)
        except NodalError as exc:
            log.info("start %d failed: %s", k, exc)
            starts.append({"start": k, "status": "failed", "error": str(exc)})
            continue
        starts.append({"start": k, "status": "converged" if sol.converged else "unconverged",
                       "energy": sol.energy, "residual": sol.residual, "iterations": sol.iterations})
        if sol.converged and (best is None or sol.energy < best.energy):
            best = sol
        if best_partial is None or sol.energy < best_partial.energy:
            best_partial = sol
    if best is None:
        raise AllStartsFailedError("no start converged", best=best_partial)
    best.starts = starts
    return best


def minmax_energy(fn, eps, v, tol_proj=1e-10):
    """max over a, b >= 0 of J_eps(a v+ + b v-)."""
    c = fn.coeffs(v)
    if not _is_sign_changing(fn, c):
        raise NotSignChangingError("minmax energy needs a sign-changing function")
    return project_nodal(fn, eps, c, tol_proj).energy

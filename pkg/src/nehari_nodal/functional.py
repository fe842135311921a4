"""
Energy functional J_eps(v) = int (eps^2/2 |grad v|^2 + 1/p |grad v|^p - F(v)) dx
on P1 finite elements, with its first and second variations.

Gradient terms are exact per element (|grad v| is constant there); terms in
F, f and f' use a fixed per-element quadrature so that gradient() is the
exact derivative of energy() and hessian() the exact derivative of gradient().
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._descent import QuasiNewton
from .errors import ConvergenceError, IncompatibleFunctionError

log = logging.getLogger(__name__)

_G = np.sqrt(15.0) / 10.0
# Gauss-Legendre, 3 points on [0, 1] (barycentric coordinates of the segment)
QUAD_1D = (np.array([[0.5 + _G, 0.5 - _G], [0.5, 0.5], [0.5 - _G, 0.5 + _G]]),
           np.array([5.0, 8.0, 5.0]) / 18.0)
# degree-2 rule with interior barycentric points
QUAD_2D = (np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
           np.full(3, 1 / 3))


def quadrature_rule(dim):
    return QUAD_1D if dim == 1 else QUAD_2D


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Vertex coefficients of a P1 function vanishing on the boundary."""
    mesh: object
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.mesh.n_vertices,):
            raise IncompatibleFunctionError(
                f"expected {self.mesh.n_vertices} coefficients, got shape {c.shape}")
        if np.any(c[self.mesh.boundary_mask] != 0.0):
            raise IncompatibleFunctionError("boundary coefficients must vanish")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_interior(cls, mesh, values):
        c = np.zeros(mesh.n_vertices)
        c[mesh.interior] = values
        return cls(mesh, c)

    @classmethod
    def interpolate(cls, mesh, func):
        """Nodal interpolant of ``func(x)`` (x has shape (nv, dim)), zeroed on the boundary."""
        c = np.asarray(func(mesh.vertices), dtype=float).reshape(-1)
        c = np.where(mesh.boundary_mask, 0.0, c)
        return cls(mesh, c)

    @property
    def interior_values(self):
        return self.coeffs[self.mesh.interior]

    def __neg__(self):
        return DiscreteFunction(self.mesh, -self.coeffs)

    def __mul__(self, c):
        return DiscreteFunction(self.mesh, c * self.coeffs)

    __rmul__ = __mul__

    def __add__(self, other):
        return DiscreteFunction(self.mesh, self.coeffs + _coeffs_on(self.mesh, other))

    def __sub__(self, other):
        return DiscreteFunction(self.mesh, self.coeffs - _coeffs_on(self.mesh, other))


def _coeffs_on(mesh, v):
    if isinstance(v, DiscreteFunction):
        if v.mesh is not mesh:
            raise IncompatibleFunctionError("function lives on a different mesh")
        return v.coeffs
    c = np.asarray(v, dtype=float)
    if c.shape != (mesh.n_vertices,):
        raise IncompatibleFunctionError(
            f"expected {mesh.n_vertices} vertex coefficients, got shape {c.shape}")
    return c


@dataclass(frozen=True)
class EnergyParts:
    dirichlet2: float
    dirichletp: float
    potential: float
    eps: float
    p: float

    @property
    def J(self):
        return 0.5 * self.eps ** 2 * self.dirichlet2 + self.dirichletp / self.p - self.potential


class EnergyFunctional:
    """J_eps and its derivatives for a fixed mesh and nonlinearity.

    Methods accept either a DiscreteFunction on ``mesh`` or a raw array of
    vertex coefficients. Derivatives are returned over interior vertices only.
    """

    def __init__(self, mesh, nl):
        self.mesh = mesh
        self.nl = nl
        bary, w = quadrature_rule(mesh.dim)
        self.qbary = bary                                    # (nq, k)
        self.qweight = mesh.element_volume[:, None] * w      # (ne, nq)
        self._interior = mesh.interior
        self._stiffness = None
        self._stiffness_lu = None

    # -- helpers -------------------------------------------------------------
    def coeffs(self, v):
        return _coeffs_on(self.mesh, v)

    def full(self, interior_values):
        c = np.zeros(self.mesh.n_vertices)
        c[self._interior] = interior_values
        return c

    def at_quadrature(self, v):
        """Values of v at quadrature points, shape (ne, nq)."""
        c = self.coeffs(v)
        return c[self.mesh.elements] @ self.qbary.T

    def gradient_integrals(self, v):
        """(int |grad v|^2, int |grad v|^p)."""
        g = self.mesh.element_gradients(self.coeffs(v))
        a = np.sqrt(np.einsum("ed,ed->e", g, g))
        vol = self.mesh.element_volume
        return float(vol @ a ** 2), float(vol @ a ** self.nl.p)

    def _scatter(self, local):
        """Sum element-local vertex contributions (ne, k) into a full vertex vector."""
        return np.bincount(self.mesh.elements.ravel(), weights=local.ravel(),
                           minlength=self.mesh.n_vertices)

    # -- J, DJ, D^2 J --------------------------------------------------------
    def energy(self, eps, v):
        c = self.coeffs(v)
        d2, dp = self.gradient_integrals(c)
        pot = float(np.sum(self.qweight * self.nl.F(self.at_quadrature(c))))
        return EnergyParts(d2, dp, pot, float(eps), self.nl.p)

    def J(self, eps, v):
        return self.energy(eps, v).J

    def gradient_full(self, eps, v):
        c = self.coeffs(v)
        mesh = self.mesh
        g = mesh.element_gradients(c)
        a = np.sqrt(np.einsum("ed,ed->e", g, g))
        coef = (eps ** 2 + a ** (self.nl.p - 2)) * mesh.element_volume
        stiff = np.einsum("ed,edk->ek", coef[:, None] * g, mesh.grad_op)
        fq = self.nl.f(self.at_quadrature(c)) * self.qweight      # (ne, nq)
        load = fq @ self.qbary                                     # (ne, k)
        return self._scatter(stiff - load)

    def gradient(self, eps, v):
        """DJ_eps(v) tested against each interior hat function."""
        return self.gradient_full(eps, v)[self._interior]

    def gamma(self, eps, v):
        """Nehari defect DJ_eps(v)(v)."""
        c = self.coeffs(v)
        d2, dp = self.gradient_integrals(c)
        vq = self.at_quadrature(c)
        return float(eps ** 2 * d2 + dp - np.sum(self.qweight * self.nl.f(vq) * vq))

    def hessian(self, eps, v):
        """Sparse symmetric matrix of D^2 J_eps(v) over interior vertices."""
        c = self.coeffs(v)
        mesh, p = self.mesh, self.nl.p
        g = mesh.element_gradients(c)
        a = np.sqrt(np.einsum("ed,ed->e", g, g))
        vol = mesh.element_volume
        B = mesh.grad_op                                          # (ne, d, k)
        iso = (eps ** 2 + a ** (p - 2)) * vol
        # (p-2)|g|^(p-4) is singular at g = 0; its limit contribution is 0 for p > 2
        aniso = np.zeros_like(a)
        nz = a > 0
        aniso[nz] = (p - 2) * a[nz] ** (p - 4) * vol[nz]
        BtB = np.einsum("edk,edl->ekl", B, B)
        Btg = np.einsum("edk,ed->ek", B, g)
        local = iso[:, None, None] * BtB + aniso[:, None, None] * Btg[:, :, None] * Btg[:, None, :]
        fpq = self.nl.fprime(self.at_quadrature(c)) * self.qweight  # (ne, nq)
        local -= np.einsum("eq,qk,ql->ekl", fpq, self.qbary, self.qbary)
        H = self._assemble(local)
        return _restrict(H, self._interior)

    def second_variation(self, eps, v, phi, psi):
        """D^2 J_eps(v)(phi, psi) for full vertex vectors phi, psi, without assembling."""
        c = self.coeffs(v)
        mesh, p = self.mesh, self.nl.p
        g = mesh.element_gradients(c)
        gphi = mesh.element_gradients(self.coeffs(phi))
        gpsi = mesh.element_gradients(self.coeffs(psi))
        a = np.sqrt(np.einsum("ed,ed->e", g, g))
        vol = mesh.element_volume
        aniso = np.zeros_like(a)
        nz = a > 0
        aniso[nz] = (p - 2) * a[nz] ** (p - 4)
        val = vol @ ((eps ** 2 + a ** (p - 2)) * np.einsum("ed,ed->e", gphi, gpsi)
                     + aniso * np.einsum("ed,ed->e", g, gphi) * np.einsum("ed,ed->e", g, gpsi))
        mass = np.sum(self.qweight * self.nl.fprime(self.at_quadrature(c))
                      * self.at_quadrature(phi) * self.at_quadrature(psi))
        return float(val - mass)

    def _assemble(self, local):
        el = self.mesh.elements
        k = el.shape[1]
        rows = np.repeat(el, k, axis=1).ravel()
        cols = np.tile(el, (1, k)).ravel()
        n = self.mesh.n_vertices
        return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    # -- Laplace metric ------------------------------------------------------
    @property
    def stiffness(self):
        """Laplace stiffness matrix on interior vertices (the descent metric)."""
        if self._stiffness is None:
            self._stiffness = laplace_stiffness(self.mesh)
        return self._stiffness

    def solve_stiffness(self, r):
        if self._stiffness_lu is None:
            self._stiffness_lu = splu(self.stiffness.tocsc())
        return self._stiffness_lu.solve(np.asarray(r, dtype=float))

    def dual_norm(self, r):
        """sqrt(r^T G^{-1} r) for the Laplace stiffness G."""
        return float(np.sqrt(max(r @ self.solve_stiffness(r), 0.0)))


def _restrict(H, idx):
    return H[idx][:, idx].tocsr()


def laplace_stiffness(mesh):
    B = mesh.grad_op
    local = mesh.element_volume[:, None, None] * np.einsum("edk,edl->ekl", B, B)
    el = mesh.elements
    k = el.shape[1]
    n = mesh.n_vertices
    G = sp.coo_matrix((local.ravel(), (np.repeat(el, k, axis=1).ravel(), np.tile(el, (1, k)).ravel())),
                      shape=(n, n)).tocsr()
    return _restrict(G, mesh.interior)


def write_coordinate_text(H):
    """Coordinate-format dump: one ``row col value`` line per stored entry."""
    C = sp.coo_matrix(H)
    order = np.lexsort((C.col, C.row))
    return "".join(f"{C.row[i]} {C.col[i]} {C.data[i]:.17g}\n" for i in order)


def read_coordinate_text(text, shape):
    rows, cols, vals = [], [], []
    for line in text.splitlines():
        if line.strip():
            i, j, x = line.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(float(x))
    return sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()


# -- diffusion operator A_eps(z) = (eps^2 + |z|^(p-2)) z -----------------------

def diffusion_flux(eps, z, p):
    z = np.asarray(z, dtype=float)
    return (eps ** 2 + np.linalg.norm(z) ** (p - 2)) * z


def diffusion_jacobian(eps, z, p):
    z = np.asarray(z, dtype=float)
    n = z.size
    r = np.linalg.norm(z)
    if r == 0.0:
        return eps ** 2 * np.eye(n)
    return (eps ** 2 + r ** (p - 2)) * np.eye(n) + (p - 2) * r ** (p - 4) * np.outer(z, z)


def diffusion_jacobian_eigs(eps, z, p):
    """Closed-form spectrum: eps^2 + |z|^(p-2) (N-1 times) and eps^2 + (p-1)|z|^(p-2)."""
    z = np.asarray(z, dtype=float)
    n = z.size
    r = np.linalg.norm(z)
    if r == 0.0:
        return np.full(n, float(eps ** 2))
    base = eps ** 2 + r ** (p - 2)
    top = eps ** 2 + (p - 1) * r ** (p - 2)
    return np.sort(np.append(np.full(n - 1, base), top))


def c_beta(beta):
    """Constant with c_beta (a+b)^beta <= a^beta + b^beta for a, b >= 0."""
    return 1.0 if beta < 1 else 2.0 ** (1.0 - beta)


def ellipticity_bounds_check(eps, z, zeta, p, gamma=None, Gamma=2.0, rtol=1e-12):
    """Whether gamma (k+|z|)^(p-2)|zeta|^2 <= DA(z)zeta.zeta <= Gamma (k+|z|)^(p-2)|zeta|^2, k = |eps|^(2/(p-2))."""
    gamma = c_beta(p - 2) if gamma is None else gamma
    z = np.asarray(z, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    kappa = abs(eps) ** (2.0 / (p - 2))
    scale = (kappa + np.linalg.norm(z)) ** (p - 2) * (zeta @ zeta)
    form = zeta @ diffusion_jacobian(eps, z, p) @ zeta
    slack = rtol * max(abs(form), scale)
    return bool(gamma * scale <= form + slack and form <= Gamma * scale + slack)


# -- first eigenvalue of the p-Laplacian ---------------------------------------

@dataclass
class SpectralEstimate:
    lam: float
    minimizer: DiscreteFunction
    residual: float
    iterations: int


def _bump(mesh):
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    s = np.prod(np.sin(np.pi * (mesh.vertices - lo) / (hi - lo)), axis=1)
    return np.where(mesh.boundary_mask, 0.0, np.abs(s))


def lambda_1p(mesh, p, tol=1e-8, max_iter=5000, armijo_c=1e-4, memory=8):
    """Minimize int |grad w|^p / int |w|^p by L^p-normalized preconditioned descent.

    Directions are quasi-Newton updates in the Laplace metric (``memory=0``
    gives plain preconditioned steepest descent); steps are halved until the
    Armijo condition holds and iterates are renormalized in L^p.
    """
    if p < 2:
        raise ValueError(f"lambda_1p needs p >= 2, got {p}")
    bary, qw = quadrature_rule(mesh.dim)
    weight = mesh.element_volume[:, None] * qw
    interior = mesh.interior
    G = laplace_stiffness(mesh)
    lu = splu(G.tocsc())
    el = mesh.elements
    nv = mesh.n_vertices

    def parts(c):
        g = mesh.element_gradients(c)
        a = np.sqrt(np.einsum("ed,ed->e", g, g))
        wq = c[el] @ bary.T
        num = float(mesh.element_volume @ a ** p)
        den = float(np.sum(weight * np.abs(wq) ** p))
        return g, a, wq, num, den

    def quotient_and_grad(c):
        g, a, wq, num, den = parts(c)
        R = num / den
        dnum = np.einsum("ed,edk->ek", (p * a ** (p - 2) * mesh.element_volume)[:, None] * g, mesh.grad_op)
        dden = (p * np.abs(wq) ** (p - 2) * wq * weight) @ bary
        local = (dnum - R * dden) / den
        grad = np.bincount(el.ravel(), weights=local.ravel(), minlength=nv)[interior]
        return R, grad

    def normalize(c):
        return c / parts(c)[4] ** (1.0 / p)

    c = normalize(_bump(mesh))
    R, grad = quotient_and_grad(c)
    qn = QuasiNewton(lu.solve, memory)
    # quotients closer than this are indistinguishable in floating point
    noise = 64 * np.finfo(float).eps
    res = np.inf
    for it in range(1, max_iter + 1):
        res = np.sqrt(max(grad @ lu.solve(grad), 0.0)) / R
        if res <= tol:
            break
        d = qn.direction(grad)
        slope = grad @ d
        step = 1.0
        while True:
            trial = c.copy()
            trial[interior] += step * d
            R_new = quotient_and_grad(trial)[0]
            if R_new <= R + armijo_c * step * slope + noise * R:
                break
            step *= 0.5
            if step < 1e-16:
                raise ConvergenceError("lambda_1p line search stalled",
                                       best=SpectralEstimate(R, DiscreteFunction(mesh, c), res, it))
        trial = normalize(trial)
        R_new, grad_new = quotient_and_grad(trial)
        qn.update((trial - c)[interior], grad_new - grad)
        c, R, grad = trial, R_new, grad_new
    else:
        raise ConvergenceError(f"lambda_1p did not converge in {max_iter} iterations",
                               best=SpectralEstimate(R, DiscreteFunction(mesh, c), res, max_iter))
    log.debug("lambda_1p(p=%g) = %.10g after %d iterations", p, R, it)
    return SpectralEstimate(float(R), DiscreteFunction(mesh, c), float(res), it)

"""
Morse index, nodal domains and the index/nodal-domain inequality.

The Morse index is the number of negative eigenvalues of the coefficient
Hessian. Inertia is invariant under congruence, so this equals the maximal
dimension of a subspace of P1 functions on which D^2 J is negative definite.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DiagnosticError, PreconditionError, ZeroFunctionError
from .functional import quadrature_rule
from .mesh import vertex_adjacency
from .nehari import negative_part, positive_part

TOL_EIG = 1e-9


@dataclass
class IndexReport:
    morse_index: int
    nullity: int
    dimension: int
    nodal_domains: int = 0
    neg_directions_check: tuple = (None, None)
    eigenvalues: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {"morse_index": self.morse_index, "nullity": self.nullity,
                "nodal_domains": self.nodal_domains,
                "neg_directions_check": list(self.neg_directions_check)}


def inertia(H, tol_eig=TOL_EIG):
    """(negative, zero, positive) eigenvalue counts of a symmetric matrix.

    Eigenvalues with |lambda| <= tol_eig * max|lambda| count as zero.
    """
    A = H.toarray() if hasattr(H, "toarray") else np.asarray(H, dtype=float)
    try:
        ev = sla.eigvalsh(A)
    except (sla.LinAlgError, ValueError) as exc:
        raise DiagnosticError(f"eigensolver failed: {exc}", partial=np.diag(A).copy()) from exc
    if ev.size == 0:
        return 0, 0, 0, ev
    cut = tol_eig * np.max(np.abs(ev))
    neg = int(np.sum(ev < -cut))
    zero = int(np.sum(np.abs(ev) <= cut))
    return neg, zero, ev.size - neg - zero, ev


def morse_index(fn, eps, u, tol_eig=TOL_EIG):
    c = fn.coeffs(u)
    neg, zero, _, ev = inertia(fn.hessian(eps, c), tol_eig)
    up, um = positive_part(c), negative_part(c)
    checks = (fn.second_variation(eps, c, up, up) < 0, fn.second_variation(eps, c, um, um) < 0)
    return IndexReport(neg, zero, len(ev), neg_directions_check=tuple(bool(x) for x in checks),
                       eigenvalues=ev)


def nodal_labels(u, mesh, threshold=0.0, graph=None):
    """Component label per vertex of {u > threshold} and {u < -threshold}; -1 elsewhere."""
    graph = graph or vertex_adjacency(mesh)
    c = np.asarray(u.coeffs if hasattr(u, "coeffs") else u, dtype=float)
    pos, npos = graph.components(c > threshold)
    neg, nneg = graph.components(c < -threshold)
    labels = np.where(pos >= 0, pos, np.where(neg >= 0, neg + npos, -1))
    return labels, npos + nneg


def nodal_domains(u, mesh=None, threshold=0.0, graph=None):
    """Number of connected components of {u > threshold} plus those of {u < -threshold}."""
    mesh = mesh or u.mesh
    c = np.asarray(u.coeffs if hasattr(u, "coeffs") else u, dtype=float)
    if not np.any(np.abs(c) > threshold):
        raise ZeroFunctionError("all coefficients lie within the nodal threshold")
    return nodal_labels(c, mesh, threshold, graph)[1]


def full_report(fn, eps, u, tol_eig=TOL_EIG, threshold=None):
    c = fn.coeffs(u)
    rep = morse_index(fn, eps, c, tol_eig)
    if threshold is None:
        threshold = 1e-8 * np.max(np.abs(c))
    rep.nodal_domains = nodal_domains(c, fn.mesh, threshold)
    return rep


# -- restrictions of u to its nodal regions -------------------------------------

def _sub_simplices(dim, vals):
    """Split one element by the zero level of the linear function with vertex values ``vals``.

    Returns barycentric vertex lists (rows = sub-simplex vertices) of the pieces.
    """
    k = dim + 1
    eye = np.eye(k)
    s = vals > 0
    if s.all() or (~s).all():
        return [eye]
    if dim == 1:
        theta = vals[0] / (vals[0] - vals[1])
        x = (1 - theta) * eye[0] + theta * eye[1]
        return [np.array([eye[0], x]), np.array([x, eye[1]])]
    lone = int(np.flatnonzero(s)[0]) if s.sum() == 1 else int(np.flatnonzero(~s)[0])
    i, j = [m for m in range(3) if m != lone]

    def cut(a, b):
        th = vals[a] / (vals[a] - vals[b])
        return (1 - th) * eye[a] + th * eye[b]

    pi, pj = cut(lone, i), cut(lone, j)
    return [np.array([eye[lone], pi, pj]), np.array([pi, eye[i], eye[j]]), np.array([pi, eye[j], pj])]


def region_pieces(fn, u, labels):
    """Sub-element pieces on which u has one sign, tagged with the nodal component they belong to.

    Returns (element index, component label, quadrature barycentrics (nq, k), quadrature weights).
    """
    mesh = fn.mesh
    c = fn.coeffs(u)
    bary, w = quadrature_rule(mesh.dim)
    out = []
    for e, verts in enumerate(mesh.elements):
        vals = c[verts]
        for piece in _sub_simplices(mesh.dim, vals):
            qb = bary @ piece                          # quadrature points of the piece, parent barycentrics
            centre = piece.mean(axis=0) @ vals
            if centre == 0.0:
                continue
            sign_ok = (vals > 0) if centre > 0 else (vals < 0)
            owners = labels[verts][sign_ok & (labels[verts] >= 0)]
            if owners.size == 0:
                continue
            frac = _piece_fraction(piece)
            out.append((e, int(owners[0]), qb, w * frac * mesh.element_volume[e]))
    return out


def _piece_fraction(piece):
    """Volume of a barycentric sub-simplex relative to its parent."""
    return abs(np.linalg.det(piece))


def restricted_form(fn, eps, u, labels, n_labels):
    """Matrix Q[C, D] = D^2 J_eps(u)(1_C u, 1_D u) over nodal components C, D.

    1_C u is u on the (exactly cut) region of component C and zero elsewhere,
    so its gradient on a piece is grad u or 0.
    """
    mesh, nl, p = fn.mesh, fn.nl, fn.nl.p
    c = fn.coeffs(u)
    g = mesh.element_gradients(c)
    a = np.sqrt(np.einsum("ed,ed->e", g, g))
    Q = np.zeros((n_labels, n_labels))
    for e, lab, qb, qw in region_pieces(fn, c, labels):
        uq = qb @ c[mesh.elements[e]]
        area = qw.sum()
        ind = np.zeros(n_labels)
        ind[lab] = 1.0
        # grad(1_C u) = ind[C] * g_e and (1_C u)(x) = ind[C] * u(x) on this piece
        gg = (eps ** 2 + a[e] ** (p - 2)) * a[e] ** 2 + (p - 2) * a[e] ** p
        mass = float(qw @ (nl.fprime(uq) * uq ** 2))
        Q += np.outer(ind, ind) * (gg * area - mass)
    return Q


def index_nodal_consistency(fn, eps, u, tol_eig=TOL_EIG, threshold=None, tol_grad=1e-8,
                            cross_tol=1e-8):
    """Check nodal_domains <= morse_index and the block structure of D^2 J on nodal restrictions.

    Returns (ok, details).
    """
    c = fn.coeffs(u)
    res = fn.dual_norm(fn.gradient(eps, c))
    if res > 10 * tol_grad:
        raise PreconditionError(f"u is not near-critical: residual {res:.3e}")
    if threshold is None:
        threshold = 1e-8 * np.max(np.abs(c))
    labels, n = nodal_labels(c, fn.mesh, threshold)
    Q = restricted_form(fn, eps, c, labels, n)
    scale = np.max(np.abs(np.diag(Q))) if n else 1.0
    off = Q - np.diag(np.diag(Q))
    cross = float(np.max(np.abs(off))) if n > 1 else 0.0
    rep = morse_index(fn, eps, c, tol_eig)
    ok = (n <= rep.morse_index and cross <= cross_tol * scale and bool(np.all(np.diag(Q) < 0)))
    return ok, {"nodal_domains": n, "morse_index": rep.morse_index, "cross_max": cross,
                "scale": float(scale), "diagonal": np.diag(Q).tolist()}

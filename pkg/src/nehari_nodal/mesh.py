"""
Simplicial meshes for intervals and rectangles.

Only P1 (piecewise-linear) functions are used, so each element stores the
constant map from its vertex values to the gradient of the interpolant.
"""
import json
from collections import deque
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import InvalidDomainError, InvalidResolutionError


@dataclass(frozen=True, eq=False)
class Mesh:
    dim: int
    vertices: np.ndarray        # (nv, dim)
    elements: np.ndarray        # (ne, dim + 1) vertex indices
    boundary_mask: np.ndarray   # (nv,) bool
    element_volume: np.ndarray  # (ne,)
    grad_op: np.ndarray         # (ne, dim, dim + 1)
    info: dict = field(default_factory=dict)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def interior(self):
        """Indices of the free (non-boundary) vertices."""
        return np.flatnonzero(~self.boundary_mask)

    @property
    def measure(self):
        return float(self.element_volume.sum())

    def element_gradients(self, coeffs):
        """Constant gradient of the P1 interpolant of ``coeffs`` on every element, shape (ne, dim)."""
        return np.einsum("edk,ek->ed", self.grad_op, np.asarray(coeffs)[self.elements])

    def to_json(self):
        return json.dumps({
            "dim": self.dim,
            "vertices": self.vertices.tolist(),
            "elements": self.elements.tolist(),
            "boundary": self.boundary_mask.tolist(),
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return from_simplices(np.array(d["vertices"], dtype=float),
                              np.array(d["elements"], dtype=np.int64),
                              np.array(d["boundary"], dtype=bool))


def from_simplices(vertices, elements, boundary_mask, info=None):
    """Build a Mesh from raw arrays, computing volumes and gradient operators."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim == 1:
        vertices = vertices[:, None]
    elements = np.asarray(elements, dtype=np.int64)
    dim = vertices.shape[1]
    if elements.shape[1] != dim + 1:
        raise InvalidDomainError("elements must be simplices of the vertex dimension")

    x = vertices[elements]                          # (ne, dim+1, dim)
    jac = np.transpose(x[:, 1:, :] - x[:, :1, :], (0, 2, 1))   # columns are edge vectors
    det = np.linalg.det(jac)
    if np.any(det == 0.0):
        raise InvalidDomainError("degenerate element")
    volume = np.abs(det) / factorial(dim)

    # barycentric gradients: grad(lambda_i) = J^{-T} e_i for i >= 1, grad(lambda_0) = -sum
    ref = np.hstack([-np.ones((dim, 1)), np.eye(dim)])
    grad_op = np.linalg.solve(np.transpose(jac, (0, 2, 1)), np.broadcast_to(ref, (len(elements), dim, dim + 1)))

    for arr in (vertices, elements, volume, grad_op):
        arr.setflags(write=False)
    boundary_mask = np.array(boundary_mask, dtype=bool)
    boundary_mask.setflags(write=False)
    return Mesh(dim, vertices, elements, boundary_mask, volume, grad_op, dict(info or {}))


def build_interval_mesh(n, a=0.0, b=1.0):
    """Uniform partition of (a, b) into ``n`` elements."""
    if int(n) != n or n < 2:
        raise InvalidResolutionError(f"interval mesh needs n >= 2, got {n}")
    if not b > a:
        raise InvalidDomainError(f"need a < b, got ({a}, {b})")
    n = int(n)
    x = np.linspace(a, b, n + 1)
    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    boundary = np.zeros(n + 1, dtype=bool)
    boundary[[0, -1]] = True
    return from_simplices(x[:, None], elements, boundary,
                          info={"kind": "interval", "n": n, "extents": [float(a), float(b)]})


def build_rect_mesh(nx, ny, width=1.0, height=1.0):
    """Structured triangulation of (0, width) x (0, height).

    Each of the nx*ny cells is cut along its lower-left to upper-right diagonal.
    """
    if not (width > 0 and height > 0):
        raise InvalidDomainError(f"rectangle extents must be positive, got {width} x {height}")
    if int(nx) != nx or int(ny) != ny or nx < 2 or ny < 2:
        raise InvalidResolutionError(f"rect mesh needs nx, ny >= 2, got {nx}, {ny}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    ll = idx[:-1, :-1].ravel()
    lr = idx[:-1, 1:].ravel()
    ul = idx[1:, :-1].ravel()
    ur = idx[1:, 1:].ravel()
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    elements = np.empty((2 * nx * ny, 3), dtype=np.int64)
    elements[0::2] = lower
    elements[1::2] = upper

    i, j = np.divmod(np.arange(len(vertices)), nx + 1)
    boundary = (i == 0) | (i == ny) | (j == 0) | (j == nx)
    return from_simplices(vertices, elements, boundary,
                          info={"kind": "rect", "nx": nx, "ny": ny,
                                "extents": [float(width), float(height)]})


@dataclass(frozen=True)
class AdjacencyGraph:
    neighbors: tuple  # tuple of sorted int arrays, one per vertex

    def __len__(self):
        return len(self.neighbors)

    def is_symmetric(self):
        return all(i in set(self.neighbors[j].tolist())
                   for i, nbrs in enumerate(self.neighbors) for j in nbrs)

    def components(self, mask=None):
        """Connected components (BFS) of the subgraph induced by ``mask``.

        Returns an int label per vertex, -1 outside the mask, and the count.
        """
        n = len(self.neighbors)
        mask = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        labels = np.full(n, -1, dtype=np.int64)
        count = 0
        for start in np.flatnonzero(mask):
            if labels[start] >= 0:
                continue
            labels[start] = count
            queue = deque([start])
            while queue:
                i = queue.popleft()
                for j in self.neighbors[i]:
                    if mask[j] and labels[j] < 0:
                        labels[j] = count
                        queue.append(j)
            count += 1
        return labels, count


def vertex_adjacency(mesh):
    """Vertices i != j are adjacent iff some element contains both."""
    k = mesh.elements.shape[1]
    rows = np.repeat(mesh.elements, k, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, k)).ravel()
    keep = rows != cols
    pairs = np.unique(np.column_stack([rows[keep], cols[keep]]), axis=0)
    split = np.searchsorted(pairs[:, 0], np.arange(mesh.n_vertices + 1))
    return AdjacencyGraph(tuple(pairs[split[i]:split[i + 1], 1] for i in range(mesh.n_vertices)))

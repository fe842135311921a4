import numpy as np
import pytest

from nehari_nodal import (EnergyFunctional, MeshSpec, Nonlinearity, ProblemSpec,
                          build_interval_mesh, build_rect_mesh)

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def canonical_nl():
    return Nonlinearity(p=3.0, q=4.0, mu=0.0, kappa=1.0)


@pytest.fixture(scope="session")
def canonical_spec(canonical_nl):
    return ProblemSpec(MeshSpec.parse("interval:128"), canonical_nl, 0.0)


@pytest.fixture(scope="session")
def fn64(canonical_nl):
    return EnergyFunctional(build_interval_mesh(64), canonical_nl)


@pytest.fixture(scope="session")
def fn2d(canonical_nl):
    return EnergyFunctional(build_rect_mesh(16, 16), canonical_nl)


def random_function(fn, rng, scale=1.0):
    return fn.full(scale * rng.standard_normal(len(fn.mesh.interior)))


def smooth_random(mesh, rng, modes=4):
    """Random low-frequency combination of Dirichlet sine modes."""
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    x = (mesh.vertices - lo) / (hi - lo)
    c = np.zeros(mesh.n_vertices)
    ks = range(1, modes + 1)
    for k in ks:
        if mesh.dim == 1:
            c += rng.standard_normal() / k * np.sin(np.pi * k * x[:, 0])
        else:
            for j in ks:
                c += rng.standard_normal() / (k + j) * np.sin(np.pi * k * x[:, 0]) * np.sin(np.pi * j * x[:, 1])
    return np.where(mesh.boundary_mask, 0.0, c)


CANONICAL_EPS = (0.0, 0.1, 0.5)
SWEEP_GRID = (0.0, 0.05, 0.1, 0.2, 0.4)


@pytest.fixture(scope="session")
def canonical_solutions(canonical_nl):
    """multi_start solutions of the canonical problem at n=128 and n=256, keyed by (n, eps)."""
    from nehari_nodal import multi_start
    out = {}
    for n in (128, 256):
        fn = EnergyFunctional(build_interval_mesh(n), canonical_nl)
        for eps in CANONICAL_EPS:
            out[n, eps] = (fn, multi_start(fn, eps))
    return out


@pytest.fixture(scope="session")
def canonical_sweep(canonical_spec):
    from nehari_nodal import sweep_epsilon
    return sweep_epsilon(canonical_spec, SWEEP_GRID)


def sign_changing(mesh, rng):
    while True:
        c = smooth_random(mesh, rng)
        inner = c[mesh.interior]
        if inner.max() > 0.05 * np.abs(inner).max() and inner.min() < -0.05 * np.abs(inner).max():
            return c

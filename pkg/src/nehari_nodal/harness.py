"""
Problem specifications, persisted run records, epsilon sweeps and CSV export.
"""
import csv
import io
import json
import logging
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .diagnostics import full_report
from .errors import EmptyDataError, NodalError
from .functional import EnergyFunctional, lambda_1p
from .mesh import build_interval_mesh, build_rect_mesh
from .nonlinearity import Nonlinearity, validate_hypotheses
from .solver import SolveOptions, minimize_nodal, multi_start

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_FIELDS = ("eps", "energy", "morse_index", "nullity", "nodal_domains", "residual", "iterations")


@dataclass(frozen=True)
class MeshSpec:
    kind: str                      # "interval" or "rect"
    n: int = 0
    nx: int = 0
    ny: int = 0
    extents: tuple = (0.0, 1.0)    # (a, b) for intervals, (width, height) for rectangles

    @classmethod
    def parse(cls, text, extents=None):
        """``interval:N`` or ``rect:NX:NY``."""
        kind, *res = text.split(":")
        if kind == "interval" and len(res) == 1:
            return cls("interval", n=int(res[0]), extents=tuple(extents or (0.0, 1.0)))
        if kind == "rect" and len(res) == 2:
            return cls("rect", nx=int(res[0]), ny=int(res[1]), extents=tuple(extents or (1.0, 1.0)))
        raise ValueError(f"mesh must be interval:N or rect:NX:NY, got {text!r}")

    def build(self):
        if self.kind == "interval":
            return build_interval_mesh(self.n, *self.extents)
        if self.kind == "rect":
            return build_rect_mesh(self.nx, self.ny, *self.extents)
        raise ValueError(f"unknown mesh kind {self.kind!r}")

    def refined(self, factor=2):
        if self.kind == "interval":
            return replace(self, n=self.n * factor)
        return replace(self, nx=self.nx * factor, ny=self.ny * factor)

    def as_dict(self):
        d = {"kind": self.kind, "extents": list(self.extents)}
        if self.kind == "interval":
            d["n"] = self.n
        else:
            d.update(nx=self.nx, ny=self.ny)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], n=d.get("n", 0), nx=d.get("nx", 0), ny=d.get("ny", 0),
                   extents=tuple(d["extents"]))


@dataclass(frozen=True)
class ProblemSpec:
    mesh: MeshSpec
    nl: Nonlinearity
    eps: float = 0.0

    def __post_init__(self):
        # only eps^2 enters the problem
        object.__setattr__(self, "eps", abs(float(self.eps)))

    def with_eps(self, eps):
        return replace(self, eps=eps)

    def functional(self):
        return EnergyFunctional(self.mesh.build(), self.nl)

    def validate(self):
        mesh = self.mesh.build()
        lam = lambda_1p(mesh, self.nl.p).lam
        return validate_hypotheses(self.nl, lam, dim=mesh.dim)

    def as_dict(self):
        return {"mesh": self.mesh.as_dict(), "p": self.nl.p, "q": self.nl.q,
                "mu": self.nl.mu, "kappa": self.nl.kappa, "eps": self.eps}

    @classmethod
    def from_dict(cls, d):
        return cls(MeshSpec.from_dict(d["mesh"]), Nonlinearity(d["p"], d["q"], d["mu"], d["kappa"]), d["eps"])


@dataclass
class RunRecord:
    problem: ProblemSpec
    status: str                    # "ok", "unconverged" or "failed"
    energy: float = None
    residual: float = None
    iterations: int = None
    morse_index: int = None
    nullity: int = None
    nodal_domains: int = None
    solution_coeffs: np.ndarray = field(default=None, repr=False)
    wall_time: float = 0.0
    options: dict = field(default_factory=dict)
    error: str = None
    schema_version: int = SCHEMA_VERSION

    @property
    def eps(self):
        return self.problem.eps

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "status": self.status,
            "problem": self.problem.as_dict(),
            "result": {"energy": self.energy, "residual": self.residual,
                       "iterations": self.iterations, "morse_index": self.morse_index,
                       "nullity": self.nullity, "nodal_domains": self.nodal_domains},
            "solution": {"coeffs": None if self.solution_coeffs is None else self.solution_coeffs.tolist()},
            "meta": {"seed": self.options.get("seed"), "wall_time_s": self.wall_time,
                     "options": self.options, "error": self.error},
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported record schema {d.get('schema_version')}")
        coeffs = d["solution"]["coeffs"]
        meta = d.get("meta", {})
        return cls(ProblemSpec.from_dict(d["problem"]), d["status"],
                   solution_coeffs=None if coeffs is None else np.array(coeffs, dtype=float),
                   wall_time=meta.get("wall_time_s", 0.0), options=meta.get("options") or {},
                   error=meta.get("error"), **d["result"])


def write_record(record, path):
    """Write a record as JSON atomically (temp file in the target directory, then rename)."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(record.to_dict(), fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_record(path):
    with open(path) as fh:
        return RunRecord.from_dict(json.load(fh))


def solve_once(spec, opts=None, init=None):
    """Solve one instance and attach Morse index, nullity and nodal-domain count.

    With ``init`` the solve is a single warm-started descent, otherwise a multi-start.
    Solver and diagnostic errors produce a record with status "failed".
    """
    opts = opts or SolveOptions()
    start = time.perf_counter()
    options = asdict(opts)
    try:
        fn = spec.functional()
        sol = multi_start(fn, spec.eps, opts) if init is None else minimize_nodal(fn, spec.eps, init, opts)
        rep = full_report(fn, spec.eps, sol.u)
    except NodalError as exc:
        log.warning("solve failed at eps=%g: %s", spec.eps, exc)
        return RunRecord(spec, "failed", wall_time=time.perf_counter() - start, options=options,
                         error=f"{type(exc).__name__}: {exc}")
    return RunRecord(spec, "ok" if sol.converged else "unconverged", energy=sol.energy,
                     residual=sol.residual, iterations=sol.iterations, morse_index=rep.morse_index,
                     nullity=rep.nullity, nodal_domains=rep.nodal_domains,
                     solution_coeffs=sol.u.coeffs.copy(), wall_time=time.perf_counter() - start,
                     options=options)


def revalidate(record, tol_eig=None):
    """Recompute energy, residual and index data from the stored coefficients."""
    spec = record.problem
    fn = spec.functional()
    c = record.solution_coeffs
    kwargs = {} if tol_eig is None else {"tol_eig": tol_eig}
    rep = full_report(fn, spec.eps, c, **kwargs)
    return {"energy": fn.J(spec.eps, c),
            "residual": fn.dual_norm(fn.gradient(spec.eps, c)),
            "morse_index": rep.morse_index, "nullity": rep.nullity,
            "nodal_domains": rep.nodal_domains}


def index_refinement_check(spec, opts=None, factor=2):
    """Morse index at the given resolution and after refinement; disagreement is flagged, not raised."""
    coarse = solve_once(spec, opts)
    fine = solve_once(replace(spec, mesh=spec.mesh.refined(factor)), opts)
    return coarse, fine, coarse.morse_index == fine.morse_index


# -- epsilon sweeps -------------------------------------------------------------

@dataclass
class SweepReport:
    eps: list
    records: list = field(repr=False)
    energies: list
    monotone: bool
    slope: float
    fit_residual: float
    C: float
    distances: list       # discrete W^{1,p} distance of u_eps to u_0

    def as_dict(self):
        return {"eps": self.eps, "energies": self.energies, "monotone": self.monotone,
                "slope": self.slope, "fit_residual": self.fit_residual, "C": self.C,
                "distances": self.distances, "status": [r.status for r in self.records]}


def monotonicity_verdict(eps, energies, tol=1e-10):
    """True iff energies increase strictly along the eps grid, up to ``tol`` relative violations."""
    e = np.asarray(energies, dtype=float)
    if np.any(~np.isfinite(e)):
        return False
    scale = max(1.0, np.max(np.abs(e)))
    return bool(np.all(np.diff(e) > -tol * scale) and np.all(np.diff(e) != 0))


def quadratic_gap_fit(eps, energies):
    """Fit log(alpha_eps - alpha_0) = slope*log(eps) + c over eps > 0.

    Returns (slope, rms log residual, C) with C = max (alpha_eps - alpha_0)/eps^2.
    """
    eps = np.asarray(eps, dtype=float)
    e = np.asarray(energies, dtype=float)
    gap = e[1:] - e[0]
    x = eps[1:]
    C = float(np.max(gap / x ** 2)) if len(x) else np.nan
    ok = (gap > 0) & np.isfinite(gap)
    if ok.sum() < 2:
        return np.nan, np.nan, C
    coef = np.polyfit(np.log(x[ok]), np.log(gap[ok]), 1)
    resid = np.log(gap[ok]) - np.polyval(coef, np.log(x[ok]))
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2))), C


def w1p_distance(mesh, p, a, b):
    g = mesh.element_gradients(np.asarray(a) - np.asarray(b))
    return float(mesh.element_volume @ np.sqrt(np.einsum("ed,ed->e", g, g)) ** p) ** (1.0 / p)


def sweep_epsilon(base, eps_grid, opts=None, tol_mono=1e-10):
    """Continuation in eps from the multi-start solution at eps = 0, warm-starting each step."""
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or eps_grid[0] != 0.0:
        raise ValueError("eps grid must start at 0")
    if np.any(np.diff(eps_grid) <= 0):
        raise ValueError("eps grid must be strictly increasing")
    records = []
    prev = None
    for eps in eps_grid:
        rec = solve_once(base.with_eps(eps), opts, init=prev)
        if rec.status == "failed" and prev is not None:
            log.warning("warm start failed at eps=%g, retrying cold", eps)
            rec = solve_once(base.with_eps(eps), opts)
        records.append(rec)
        if rec.solution_coeffs is not None:
            prev = rec.solution_coeffs
    energies = [np.nan if r.energy is None else r.energy for r in records]
    slope, fit_res, C = quadratic_gap_fit(eps_grid, energies)
    mesh = base.mesh.build()
    u0 = records[0].solution_coeffs
    dists = [np.nan if (r.solution_coeffs is None or u0 is None)
             else w1p_distance(mesh, base.nl.p, r.solution_coeffs, u0) for r in records]
    return SweepReport(eps_grid, records, energies, monotonicity_verdict(eps_grid, energies, tol_mono),
                       slope, fit_res, C, dists)


# -- CSV ------------------------------------------------------------------------

def export_csv(records):
    """One row per record ordered by eps; floats written with 17 significant digits."""
    if not records:
        raise EmptyDataError("no records to export")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_FIELDS)
    for r in sorted(records, key=lambda r: r.eps):
        row = []
        for name in CSV_FIELDS:
            x = getattr(r, name)
            if x is None:
                row.append("")
            elif isinstance(x, (int, np.integer)) and not isinstance(x, bool):
                row.append(str(int(x)))
            else:
                row.append(f"{float(x):.17g}")
        writer.writerow(row)
    return buf.getvalue()


def parse_csv(text):
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        out = {}
        for name in CSV_FIELDS:
            v = row[name]
            if v == "":
                out[name] = None
            elif name in ("morse_index", "nullity", "nodal_domains", "iterations"):
                out[name] = int(v)
            else:
                out[name] = float(v)
        rows.append(out)
    return rows

"""
Model nonlinearity f(t) = mu |t|^(p-2) t + kappa |t|^(q-2) t.

The family is odd, C^1 for p, q > 2, and satisfies the growth and
superlinearity hypotheses whenever p < q, kappa > 0 and mu < lambda_{1,p}.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Nonlinearity:
    p: float
    q: float
    mu: float = 0.0
    kappa: float = 1.0

    def __post_init__(self):
        if not self.p > 2:
            raise ValueError(f"quasilinear exponent must satisfy p > 2, got p={self.p}")

    def f(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        return self.mu * a ** (self.p - 2) * t + self.kappa * a ** (self.q - 2) * t

    def F(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return self.mu * a ** self.p / self.p + self.kappa * a ** self.q / self.q

    def fprime(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return (self.mu * (self.p - 1) * a ** (self.p - 2)
                + self.kappa * (self.q - 1) * a ** (self.q - 2))

    @property
    def m(self):
        """Superlinearity exponent used in f(t)t >= m F(t)."""
        if self.mu <= 0:
            return self.q
        return 0.5 * (self.p + self.q)

    @property
    def T(self):
        """Threshold beyond which f(t)t >= m F(t) > 0."""
        p, q, mu, kappa = self.p, self.q, self.mu, self.kappa
        if mu > 0:
            m = self.m
            return (mu * (m / p - 1) / (kappa * (1 - m / q))) ** (1.0 / (q - p))
        if mu < 0:
            # twice the positive root of F in the exponent, so F(T) = -mu T^p / p > 0
            return (2.0 * (-mu) * q / (kappa * p)) ** (1.0 / (q - p))
        return 1.0

    def coercivity_constant(self, measure, n_samples=4001):
        """C in J(w) >= (1/p - 1/m) ||grad w||_p^p + C on the Nehari set.

        Zero when mu <= 0 (m = q and f(t)t - qF(t) >= 0 everywhere).
        """
        if self.mu <= 0:
            return 0.0
        t = np.linspace(0.0, self.T, n_samples)
        excess = np.max(self.F(t) - self.f(t) * t / self.m)
        return -measure * max(excess, 0.0)


@dataclass
class HypothesisReport:
    f1: bool
    f2: bool
    f3: bool
    f4: bool
    m: float
    T: float
    p_star: float
    mu_margin: float  # lambda_{1,p} - mu

    @property
    def passed(self):
        return self.f1 and self.f2 and self.f3 and self.f4

    def as_dict(self):
        return {"f1": self.f1, "f2": self.f2, "f3": self.f3, "f4": self.f4,
                "m": self.m, "T": self.T, "p_star": self.p_star,
                "mu_margin": self.mu_margin, "passed": self.passed}


def critical_exponent(p, dim):
    return dim * p / (dim - p) if p < dim else np.inf


def validate_hypotheses(nl, lambda_1p, dim=1, n_samples=2001):
    """Check the growth/superlinearity hypotheses for ``nl``; failures are reported, not raised."""
    p_star = critical_exponent(nl.p, dim)
    f1 = bool(nl.p < nl.q < p_star)
    f3 = bool(nl.mu < lambda_1p)
    f4 = bool(nl.q > nl.p and nl.kappa > 0)

    m, T = nl.m, nl.T
    f2 = False
    if f4 and nl.p < m <= nl.q:
        t = np.linspace(T, 10 * T, n_samples)
        t = np.concatenate([t, -t])
        F = nl.F(t)
        f2 = bool(np.all(nl.f(t) * t - m * F >= -1e-12 * np.abs(m * F)) and np.all(F > 0))
    return HypothesisReport(f1, f2, f3, f4, float(m), float(T), float(p_star),
                            float(lambda_1p - nl.mu))

"""Limited-memory quasi-Newton directions in a fixed preconditioner metric."""
from collections import deque

import numpy as np


class QuasiNewton:
    """L-BFGS two-loop recursion with initial inverse Hessian ``precond``.

    ``precond(r)`` applies G^{-1}. With ``memory=0`` the direction is plain
    preconditioned steepest descent -G^{-1} grad.
    """

    def __init__(self, precond, memory=8):
        self.precond = precond
        self.memory = memory
        self.pairs = deque(maxlen=max(memory, 1))

    def reset(self):
        self.pairs.clear()

    def update(self, s, y):
        if self.memory == 0:
            return
        sy = float(s @ y)
        if sy <= 1e-14 * np.sqrt(float(s @ s) * float(y @ y)):
            return
        self.pairs.append((s, y, 1.0 / sy))

    def direction(self, grad):
        if not self.pairs:
            return -self.precond(grad)
        q = grad.copy()
        alphas = []
        for s, y, rho in reversed(self.pairs):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        s, y, _ = self.pairs[-1]
        Gy = self.precond(y)
        r = self.precond(q) * (float(s @ y) / float(y @ Gy))
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * (y @ r)
            r += (a - b) * s
        d = -r
        if d @ grad >= 0:
            self.reset()
            return -self.precond(grad)
        return d

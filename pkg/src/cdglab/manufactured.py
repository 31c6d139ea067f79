"""Smooth exact solution ``u = exp(alpha sin(ax+by) + beta cos(cx+dy))``."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ManufacturedSolution:
    alpha: float = 0.1
    beta: float = 0.3
    a: float = 5.1
    b: float = -6.2
    c: float = 4.3
    d: float = 3.4

    def _phase(self, x, y):
        s1 = np.sin(self.a * x + self.b * y)
        c1 = np.cos(self.a * x + self.b * y)
        s2 = np.sin(self.c * x + self.d * y)
        c2 = np.cos(self.c * x + self.d * y)
        return s1, c1, s2, c2

    def eval_u(self, x, y):
        s1, _, _, c2 = self._phase(np.asarray(x, float), np.asarray(y, float))
        return np.exp(self.alpha * s1 + self.beta * c2)

    def eval_grad_u(self, x, y):
        """Gradient stacked on the last axis."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        s1, c1, s2, c2 = self._phase(x, y)
        u = np.exp(self.alpha * s1 + self.beta * c2)
        px = self.alpha * self.a * c1 - self.beta * self.c * s2
        py = self.alpha * self.b * c1 - self.beta * self.d * s2
        return np.stack([u * px, u * py], axis=-1)

    def eval_f(self, x, y):
        """Source ``-laplace(u)``; ``laplace(e^phi) = e^phi (|grad phi|^2 + laplace(phi))``."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        s1, c1, s2, c2 = self._phase(x, y)
        u = np.exp(self.alpha * s1 + self.beta * c2)
        px = self.alpha * self.a * c1 - self.beta * self.c * s2
        py = self.alpha * self.b * c1 - self.beta * self.d * s2
        lap_phi = (-self.alpha * (self.a**2 + self.b**2) * s1
                   - self.beta * (self.c**2 + self.d**2) * c2)
        return -u * (px**2 + py**2 + lap_phi)

    def problem(self):
        from .forms import ProblemSpec
        return ProblemSpec(f=self.eval_f, g_D=self.eval_u, kappa=1.0)

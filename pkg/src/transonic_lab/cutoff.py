"""Compactly supported cut-off functions.

``chi`` equals 1 on ``|x - center| <= radius/2`` and vanishes for
``|x - center| >= radius``.  In between it follows a smoothstep profile: the
regularised incomplete beta function I_tau(k+1, k+1) for finite order k
(a C^k piecewise polynomial, so Gauss-Legendre panels split at the
breakpoints integrate it without loss), or the C-infinity profile
f(tau) / (f(tau) + f(1 - tau)) with f(y) = exp(-1/y) when ``order`` is None.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc


def _f(y):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)


def _df(y):
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        yy = np.where(y > 0, y, 1.0)
        return np.where(y > 0, np.exp(-1.0 / yy) / (yy * yy), 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    center: float
    radius: float
    order: int | None = 8

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("cut-off radius must be positive")
        if self.order is not None and self.order < 1:
            raise ValueError("cut-off order must be >= 1 (or None for C-infinity)")

    @property
    def breakpoints(self) -> tuple[float, ...]:
        c, R = self.center, self.radius
        return (c - R, c - R / 2, c + R / 2, c + R)

    def _tau(self, x):
        s = np.abs(np.asarray(x, dtype=float) - self.center) / self.radius
        return np.clip(2.0 * s - 1.0, 0.0, 1.0)

    def _step(self, tau):
        if self.order is None:
            a, b = _f(tau), _f(1.0 - tau)
            return a / (a + b)
        k = self.order
        return betainc(k + 1, k + 1, tau)

    def _dstep(self, tau):
        if self.order is None:
            a, b = _f(tau), _f(1.0 - tau)
            da, db = _df(tau), -_df(1.0 - tau)
            return (da * (a + b) - a * (da + db)) / (a + b) ** 2
        k = self.order
        return tau**k * (1.0 - tau) ** k / beta_fn(k + 1, k + 1)

    def __call__(self, x):
        return 1.0 - self._step(self._tau(x))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        tau = self._tau(x)
        inside = (tau > 0) & (tau < 1)
        dtau = np.sign(x - self.center) * 2.0 / self.radius
        return np.where(inside, -self._dstep(tau) * dtau, 0.0)

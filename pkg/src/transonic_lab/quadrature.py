"""Composite Gauss-Legendre rules on panels aligned with breakpoints."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

GL_ORDER = 16


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def panel_rule(breaks, h: float, order: int = GL_ORDER):
    """Nodes and weights over [min(breaks), max(breaks)].

    Every interval between consecutive breakpoints is cut into equal panels
    of width at most `h`, each carrying an `order`-point Gauss-Legendre rule.
    """
    b = np.unique(np.asarray(breaks, dtype=float))
    if b.size < 2:
        return np.empty(0), np.empty(0)
    g, w = _leggauss(order)
    lefts, widths = [], []
    for lo, hi in zip(b[:-1], b[1:]):
        n = max(1, math.ceil((hi - lo) / h - 1e-9))
        edges = np.linspace(lo, hi, n + 1)
        lefts.append(edges[:-1])
        widths.append(np.diff(edges))
    lefts = np.concatenate(lefts)
    widths = np.concatenate(widths)
    nodes = lefts[:, None] + 0.5 * widths[:, None] * (g[None, :] + 1.0)
    weights = 0.5 * widths[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def interval_rule(lo: float, hi: float, h: float, order: int = GL_ORDER, extra=()):
    pts = [lo, hi] + [p for p in extra if lo < p < hi]
    return panel_rule(pts, h, order)

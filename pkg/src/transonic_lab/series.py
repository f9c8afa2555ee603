"""Truncated bivariate Taylor series and a Cauchy-Kovalevskaya solver.

A :class:`BivariateSeries` holds complex coefficients ``a[m, n]`` of
``(t - T0)**m (x - x0)**n`` for total degree ``m + n <= N``.  Products are
truncated at degree N.  Coefficients of degree ``d`` of any result depend only
on operand coefficients of degree ``<= d`` and are accumulated in an order
that does not depend on N, so solving at degree N and truncating to N' < N
reproduces the degree-N' solve bit for bit.

The solver builds the analytic solution of

    d/dT u + A(u) d/dx u = 0,      u(T0, x) = data(x)

one time order at a time: the t**m coefficient of -A(u) du/dx only involves
time orders <= m of u, which yields the t**(m+1) coefficient of u.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import binom

from .errors import DegenerateDirectionError, SeriesError, VacuumLimitError
from .gasdyn import DEGENERATE_TOL, GasModel

DEFAULT_DEGREE = 12
GROWTH_WARN = 1e12


@lru_cache(maxsize=None)
def _mask(N: int) -> np.ndarray:
    m, n = np.indices((N + 1, N + 1))
    return (m + n) <= N


class BivariateSeries:
    """Truncated power series in (t - T0, x - x0) with complex coefficients."""

    __array_priority__ = 1000  # make numpy scalars defer to our __r*__ methods

    def __init__(self, coeffs, T0: float = 0.0, x0: float = 0.0):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 1:
            raise ValueError(f"coefficients must be a square 2-d array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise SeriesError("series coefficients must be finite")
        c[~_mask(c.shape[0] - 1)] = 0.0
        self.coeffs = c
        self.T0 = float(T0)
        self.x0 = float(x0)

    # -- construction -----------------------------------------------------
    @property
    def N(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def zeros(cls, N: int, T0: float = 0.0, x0: float = 0.0) -> "BivariateSeries":
        return cls(np.zeros((N + 1, N + 1)), T0, x0)

    @classmethod
    def constant(cls, value, N: int, T0: float = 0.0, x0: float = 0.0) -> "BivariateSeries":
        c = np.zeros((N + 1, N + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, T0, x0)

    @classmethod
    def from_x(cls, coeffs_x, N: int, T0: float = 0.0, x0: float = 0.0) -> "BivariateSeries":
        """Series independent of t with the given coefficients of (x - x0)**n."""
        c = np.zeros((N + 1, N + 1), dtype=complex)
        cx = np.asarray(coeffs_x, dtype=complex).ravel()[: N + 1]
        c[0, : cx.size] = cx
        return cls(c, T0, x0)

    @classmethod
    def t_var(cls, N: int, T0: float = 0.0, x0: float = 0.0) -> "BivariateSeries":
        """The series t (i.e. T0 + (t - T0))."""
        c = np.zeros((N + 1, N + 1), dtype=complex)
        c[0, 0] = T0
        if N >= 1:
            c[1, 0] = 1.0
        return cls(c, T0, x0)

    @classmethod
    def x_var(cls, N: int, T0: float = 0.0, x0: float = 0.0) -> "BivariateSeries":
        c = np.zeros((N + 1, N + 1), dtype=complex)
        c[0, 0] = x0
        if N >= 1:
            c[0, 1] = 1.0
        return cls(c, T0, x0)

    def _like(self, coeffs) -> "BivariateSeries":
        return BivariateSeries(coeffs, self.T0, self.x0)

    def _coerce(self, other) -> "BivariateSeries | None":
        if isinstance(other, BivariateSeries):
            if other.N != self.N or other.T0 != self.T0 or other.x0 != self.x0:
                raise SeriesError("series operands must share degree and expansion point")
            return other
        if np.isscalar(other):
            return None
        return NotImplemented

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        c = self.coeffs.copy()
        if o is None:
            c[0, 0] += other
        else:
            c += o.coeffs
        return self._like(c)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        c = self.coeffs.copy()
        if o is None:
            c[0, 0] -= other
        else:
            c -= o.coeffs
        return self._like(c)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self._like(self.coeffs * other)
        N = self.N
        a, b = self.coeffs, o.coeffs
        out = np.zeros_like(a)
        for i, j in zip(*np.nonzero(a)):
            out[i:, j:] += a[i, j] * b[: N + 1 - i, : N + 1 - j]
        return self._like(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "BivariateSeries":
        g00 = self.coeffs[0, 0]
        if g00 == 0:
            raise SeriesError("cannot invert a series with vanishing constant term")
        h = self * (1.0 / g00)
        h.coeffs[0, 0] = 0.0  # exactly nilpotent even when g00 * (1/g00) != 1
        # 1/(1+h) = sum (-h)^k, evaluated by Horner; h is nilpotent at degree N+1
        r = BivariateSeries.constant(1.0, self.N, self.T0, self.x0)
        for _ in range(self.N):
            r = 1.0 - h * r
        return r * (1.0 / g00)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return self._like(self.coeffs / other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            return NotImplemented
        r = BivariateSeries.constant(1.0, self.N, self.T0, self.x0)
        for _ in range(k):
            r = r * self
        return r

    def sqrt(self, root0: complex | None = None) -> "BivariateSeries":
        """Square root about the constant term; `root0` selects the branch."""
        g00 = self.coeffs[0, 0]
        if g00 == 0:
            raise SeriesError("square root of a series with vanishing constant term")
        s00 = np.sqrt(complex(g00)) if root0 is None else complex(root0)
        if abs(s00 * s00 - g00) > 1e-12 * abs(g00):
            raise ValueError("root0 is not a square root of the constant term")
        h = self * (1.0 / g00)
        h.coeffs[0, 0] = 0.0
        r = BivariateSeries.constant(binom(0.5, self.N), self.N, self.T0, self.x0)
        for k in range(self.N - 1, -1, -1):
            r = binom(0.5, k) + h * r
        return r * s00

    # -- calculus ---------------------------------------------------------
    def d_dt(self) -> "BivariateSeries":
        c = np.zeros_like(self.coeffs)
        m = np.arange(1, self.N + 1)[:, None]
        c[:-1, :] = m * self.coeffs[1:, :]
        return self._like(c)

    def d_dx(self) -> "BivariateSeries":
        c = np.zeros_like(self.coeffs)
        n = np.arange(1, self.N + 1)[None, :]
        c[:, :-1] = n * self.coeffs[:, 1:]
        return self._like(c)

    # -- views ------------------------------------------------------------
    def truncate(self, M: int) -> "BivariateSeries":
        if M > self.N:
            raise ValueError("cannot truncate to a higher degree")
        return self._like(self.coeffs[: M + 1, : M + 1])

    def extend(self, M: int) -> "BivariateSeries":
        c = np.zeros((M + 1, M + 1), dtype=complex)
        c[: self.N + 1, : self.N + 1] = self.coeffs
        return self._like(c)

    def time_row(self, m: int) -> np.ndarray:
        """Coefficients of (x - x0)**n in the t**m part."""
        return self.coeffs[m, : self.N + 1 - m].copy()

    def at_T0(self) -> np.ndarray:
        return self.time_row(0)

    @property
    def real(self) -> "BivariateSeries":
        """Coefficient-wise real part (the real part of the function for real t, x)."""
        return self._like(self.coeffs.real)

    @property
    def imag(self) -> "BivariateSeries":
        return self._like(self.coeffs.imag)

    def conj(self) -> "BivariateSeries":
        return self._like(self.coeffs.conj())

    def degree_max(self, d: int) -> float:
        """Largest coefficient magnitude at total degree d."""
        m, n = np.indices(self.coeffs.shape)
        sel = (m + n) == d
        return float(np.max(np.abs(self.coeffs[sel]))) if np.any(sel) else 0.0

    def max_abs(self, through: int | None = None) -> float:
        """Largest coefficient magnitude over total degrees <= `through`."""
        through = self.N if through is None else through
        m, n = np.indices(self.coeffs.shape)
        sel = (m + n) <= through
        return float(np.max(np.abs(self.coeffs[sel]))) if np.any(sel) else 0.0

    def evaluate(self, t, x):
        """Nested Horner evaluation; broadcasts over array arguments."""
        dt = np.asarray(t, dtype=float) - self.T0
        dx = np.asarray(x, dtype=float) - self.x0
        dt, dx = np.broadcast_arrays(dt, dx)
        N = self.N
        out = np.zeros(dt.shape, dtype=complex)
        for m in range(N, -1, -1):
            row = np.zeros(dt.shape, dtype=complex)
            for n in range(N - m, -1, -1):
                row = row * dx + self.coeffs[m, n]
            out = out * dt + row
        return out[()] if out.ndim == 0 else out

    def __call__(self, t, x):
        return self.evaluate(t, x)

    def __repr__(self):
        return f"BivariateSeries(N={self.N}, T0={self.T0}, x0={self.x0})"

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        coeffs = [[m, n, float(self.coeffs[m, n].real), float(self.coeffs[m, n].imag)]
                  for m in range(self.N + 1) for n in range(self.N + 1 - m)]
        return {"T0": self.T0, "x0": self.x0, "N": self.N, "coeffs": coeffs}

    @classmethod
    def from_dict(cls, d: dict) -> "BivariateSeries":
        N = int(d["N"])
        c = np.zeros((N + 1, N + 1), dtype=complex)
        for m, n, re, im in d["coeffs"]:
            if m + n > N:
                raise SeriesError(f"coefficient ({m},{n}) exceeds degree {N}")
            c[int(m), int(n)] = complex(re, im)
        return cls(c, d["T0"], d["x0"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BivariateSeries":
        return cls.from_dict(json.loads(text))


def check_growth(series: BivariateSeries, name: str = "series", limit: float = GROWTH_WARN) -> None:
    big = series.max_abs()
    if big > limit:
        warnings.warn(f"{name}: coefficient magnitude {big:.3e} exceeds {limit:.0e}; "
                      "the evaluation radius is probably beyond the radius of convergence",
                      RuntimeWarning, stacklevel=2)


# ---------------------------------------------------------------------------
# series-valued 2x2 matrices, stored as nested lists


def mat_mul(A, B):
    return [[A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)] for i in range(2)]


def mat_add(*Ms):
    return [[sum((M[i][j] for M in Ms[1:]), Ms[0][i][j]) for j in range(2)] for i in range(2)]


def mat_scale(M, k):
    return [[M[i][j] * k for j in range(2)] for i in range(2)]


def mat_det(M):
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def mat_inv(M):
    inv_det = mat_det(M).reciprocal()
    return [[M[1][1] * inv_det, -M[0][1] * inv_det],
            [-M[1][0] * inv_det, M[0][0] * inv_det]]


def mat_apply(M, v):
    return [M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1]]


def mat_d_dt(M):
    return [[M[i][j].d_dt() for j in range(2)] for i in range(2)]


def mat_d_dx(M):
    return [[M[i][j].d_dx() for j in range(2)] for i in range(2)]


def mat_eval(M, t, x) -> np.ndarray:
    """Evaluate a series matrix; result has shape broadcast(t, x) + (2, 2)."""
    vals = [[M[i][j].evaluate(t, x) for j in range(2)] for i in range(2)]
    return np.moveaxis(np.array(vals, dtype=complex), (0, 1), (-2, -1))


def mat_max_abs(M, through: int | None = None) -> float:
    return max(M[i][j].max_abs(through) for i in range(2) for j in range(2))


def mat_const(M0, N: int, T0: float = 0.0, x0: float = 0.0):
    return [[BivariateSeries.constant(M0[i][j], N, T0, x0) for j in range(2)] for i in range(2)]


# ---------------------------------------------------------------------------
# the quasilinear system


def sound_speed_sq_series(model: GasModel, u1: BivariateSeries, u2: BivariateSeries) -> BivariateSeries:
    return model.c0**2 - 0.5 * (model.gamma - 1.0) * (u1 * u1 + u2 * u2)


def flux_matrix_series(model: GasModel, u1: BivariateSeries, u2: BivariateSeries):
    """A(u) composed in series arithmetic."""
    c2 = sound_speed_sq_series(model, u1, u2)
    den = c2 - u1 * u1
    if abs(den.coeffs[0, 0]) <= DEGENERATE_TOL * model.c0**2:
        raise DegenerateDirectionError("c^2 - u1^2 vanishes at the expansion point")
    inv = den.reciprocal()
    N, T0, x0 = u1.N, u1.T0, u1.x0
    return [[-2.0 * (u1 * u2) * inv, (c2 - u2 * u2) * inv],
            [BivariateSeries.constant(-1.0, N, T0, x0), BivariateSeries.zeros(N, T0, x0)]]


@dataclass
class SeriesSolution:
    u1: BivariateSeries
    u2: BivariateSeries
    model: GasModel

    @property
    def N(self) -> int:
        return self.u1.N

    @property
    def T0(self) -> float:
        return self.u1.T0

    @property
    def x0(self) -> float:
        return self.u1.x0

    def truncate(self, M: int) -> "SeriesSolution":
        return SeriesSolution(self.u1.truncate(M), self.u2.truncate(M), self.model)

    def evaluate(self, t, x) -> np.ndarray:
        return np.array([self.u1.evaluate(t, x), self.u2.evaluate(t, x)])

    def to_dict(self) -> dict:
        return {"gamma": self.model.gamma, "c0": self.model.c0,
                "u1": self.u1.to_dict(), "u2": self.u2.to_dict()}


def _check_data(model: GasModel, u10: complex, u20: complex) -> None:
    q = abs(complex(u10)) ** 2 + abs(complex(u20)) ** 2
    if q >= model.q_max**2:
        raise VacuumLimitError("initial data at the expansion point reaches the vacuum limit")


def ck_solve(data, model: GasModel, N: int = DEFAULT_DEGREE, T0: float = 0.0, x0: float = 0.0,
             warn_growth: bool = True) -> SeriesSolution:
    """Analytic solution from data (u1(x), u2(x)) given as coefficients of (x - x0)**n."""
    if N < 0:
        raise ValueError("degree must be non-negative")
    d1, d2 = (np.asarray(d, dtype=complex).ravel() for d in data)
    _check_data(model, d1[0] if d1.size else 0.0, d2[0] if d2.size else 0.0)
    u1 = BivariateSeries.from_x(d1, N, T0, x0)
    u2 = BivariateSeries.from_x(d2, N, T0, x0)
    for m in range(N):
        A = flux_matrix_series(model, u1, u2)
        rhs = [-(r) for r in mat_apply(A, [u1.d_dx(), u2.d_dx()])]
        c1, c2 = u1.coeffs.copy(), u2.coeffs.copy()
        width = N - m
        c1[m + 1, :width] = rhs[0].coeffs[m, :width] / (m + 1)
        c2[m + 1, :width] = rhs[1].coeffs[m, :width] / (m + 1)
        u1 = BivariateSeries(c1, T0, x0)
        u2 = BivariateSeries(c2, T0, x0)
    if warn_growth:
        check_growth(u1, "u1")
        check_growth(u2, "u2")
    return SeriesSolution(u1, u2, model)


def residual(solution: SeriesSolution) -> tuple[BivariateSeries, BivariateSeries]:
    """d/dT u + A(u) d/dx u in series arithmetic, truncated to degree N - 1.

    Degree-N coefficients are dropped because both derivatives lose one order.
    """
    u1, u2 = solution.u1, solution.u2
    A = flux_matrix_series(solution.model, u1, u2)
    flux = mat_apply(A, [u1.d_dx(), u2.d_dx()])
    r1, r2 = u1.d_dt() + flux[0], u2.d_dt() + flux[1]
    M = max(solution.N - 1, 0)
    if solution.N == 0:
        return r1, r2
    return r1.truncate(M), r2.truncate(M)

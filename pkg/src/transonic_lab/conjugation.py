"""Diagonalizer, complex characteristics, conjugator and the weighted identities.

Conventions.  ``S`` has the eigenvectors of A(u) as columns, A S = S D, and
``L = S^{-1}``.  The diagonal unknown is w = L u, which obeys

    d_T w + D d_x w = [(d_T L) S] w + [D (d_x L) S] w.

The conjugator B solves

    d_T B + d_x(B D) + B (d_T L) S + B D (d_x L) S = 0,

which is exactly the condition for v = B w to satisfy d_T v + d_x(B D w) = 0.
With e_i = exp(-mu (zeta_i - z)^2) and d_t zeta_i + lambda_i d_x zeta_i = 0,

    d_T (v_i e_i) + d_x (lambda_i v_i e_i) = e_i d_x ([D, B] w)_i.

The right side is a commutator source; it vanishes whenever B is diagonal
(for instance for constant coefficients with B_d = I) and is carried as its
own term in the integrated identities below.

Every field is a truncated series about (T0, x0).  Pointwise defects are
evaluated on a sample grid with each factor taken from its own series, so
they measure truncation error and shrink as the degree grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .cutoff import CutoffSpec
from .eigenstructure import eigen_decompose, quadratic_eigenvalues
from .errors import FrameTooLargeError, QuadratureError
from .gasdyn import GasModel, Regime
from .microlocal import Datum1D, disc_points, weighted_sweep, weighted_transform
from .quadrature import GL_ORDER, panel_rule
from .series import (BivariateSeries, SeriesSolution, flux_matrix_series, mat_add, mat_apply,
                     mat_d_dt, mat_d_dx, mat_eval, mat_inv, mat_max_abs, mat_mul)

EST_BASIC_FLOOR = 0.0092  # twice the worst rate on singular data, see docs/calibration.md
EST_BASIC_MU_MAX = 1024.0
EST_BASIC_MU_POINTS = 24
DEFAULT_QUAD_TOL = 1e-12


def re_square(z, w):
    """Re((z - w)^2) = (Re z - Re w)^2 - (Im z - Im w)^2."""
    d = np.asarray(z) - np.asarray(w)
    return d.real**2 - d.imag**2


@dataclass(frozen=True)
class ProblemFrame:
    """Spacetime box [T0, T1] x [x0 - r0, x0 + r0] and cut-off radius R."""

    T0: float = 0.0
    x0: float = 0.0
    T1: float = 0.04
    r0: float = 1.0
    R: float = 0.25
    model: GasModel = GasModel()
    c_bar_prime: float = 1.0

    def __post_init__(self):
        if not self.T1 > self.T0:
            raise ValueError("T1 must exceed T0")
        if not (self.r0 > 0 and 0 < self.R < self.r0 / 2):
            raise ValueError(f"need 0 < R < r0/2, got R={self.R}, r0={self.r0}")
        if self.T1 - self.T0 > self.c_bar_prime * self.R**2 * (1 + 1e-12):
            raise ValueError(
                f"T1 - T0 = {self.T1 - self.T0} exceeds c_bar_prime R^2 = {self.c_bar_prime * self.R**2}")

    @property
    def cutoff(self) -> CutoffSpec:
        return CutoffSpec(self.x0, self.R)

    def sample_grid(self, nt: int = 9, nx: int = 17, radius: float | None = None):
        """Tensor grid over [T0, T1] x [x0 - radius, x0 + radius] (radius defaults to R)."""
        rad = self.R if radius is None else radius
        t = np.linspace(self.T0, self.T1, nt)
        x = np.linspace(self.x0 - rad, self.x0 + rad, nx)
        return np.meshgrid(t, x, indexing="ij")


# ---------------------------------------------------------------------------
# diagonalizer


@dataclass
class Diagonalizer:
    S: list
    S_inv: list
    D: list
    A: list

    @property
    def lambdas(self) -> tuple[BivariateSeries, BivariateSeries]:
        return self.D[0][0], self.D[1][1]

    def residual(self) -> float:
        """max |coefficient| of A S - S D through degree N - 1."""
        AS = mat_mul(self.A, self.S)
        SD = mat_mul(self.S, self.D)
        N = self.S[0][0].N
        return max((AS[i][j] - SD[i][j]).max_abs(max(N - 1, 0)) for i in range(2) for j in range(2))

    def inverse_residual(self) -> float:
        P = mat_mul(self.S, self.S_inv)
        N = self.S[0][0].N
        return max((P[i][j] - (1.0 if i == j else 0.0)).max_abs(max(N - 1, 0))
                   for i in range(2) for j in range(2))


def _eigvec_series(A, lam, S0col):
    a, b, c, d = A[0][0], A[0][1], A[1][0], A[1][1]
    lam0 = lam.coeffs[0, 0]
    v1 = (b, lam - a)
    v2 = (lam - d, c)
    n1 = abs(v1[0].coeffs[0, 0]) ** 2 + abs(v1[1].coeffs[0, 0]) ** 2
    n2 = abs(v2[0].coeffs[0, 0]) ** 2 + abs(v2[1].coeffs[0, 0]) ** 2
    v = v1 if n1 >= n2 else v2
    v0 = np.array([v[0].coeffs[0, 0], v[1].coeffs[0, 0]])
    nrm = float(np.vdot(v0, v0).real)
    if nrm == 0.0:
        raise FrameTooLargeError(f"eigenvector for {lam0} degenerates at the expansion point")
    # constant rescaling so the column matches the pointwise normalisation at (T0, x0)
    kappa = np.vdot(v0, S0col) / nrm
    return [v[0] * kappa, v[1] * kappa]


def diagonalize(solution: SeriesSolution) -> Diagonalizer:
    """S, S^{-1}, D as series; D[0][0] is the Im-positive (or larger real) branch."""
    A = flux_matrix_series(solution.model, solution.u1, solution.u2)
    A0 = np.array([[A[i][j].coeffs[0, 0] for j in range(2)] for i in range(2)])
    dec = eigen_decompose(A0.real if np.all(A0.imag == 0) else A0)
    tr = A[0][0] + A[1][1]
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    disc = tr * tr - 4.0 * det
    root = disc.sqrt(np.sqrt(complex(disc.coeffs[0, 0])))
    lp = (tr + root) * 0.5
    lm = (tr - root) * 0.5
    c1 = _eigvec_series(A, lp, dec.S[:, 0])
    c2 = _eigvec_series(A, lm, dec.S[:, 1])
    S = [[c1[0], c2[0]], [c1[1], c2[1]]]
    zero = lp * 0.0
    D = [[lp, zero], [zero, lm]]
    return Diagonalizer(S, mat_inv(S), D, A)


def diagonalizer_fields(solution: SeriesSolution, frame: ProblemFrame, nt: int = 9, nx: int = 33,
                        tol: float = 1e-10) -> Diagonalizer:
    """`diagonalize` plus a check that the spectrum stays simple over the frame.

    A(u) is sampled on [T0, T1] x [x0 - r0, x0 + r0]; a discriminant that
    changes sign or comes within ``tol * |A|^2`` of zero raises
    FrameTooLargeError.
    """
    if solution.T0 != frame.T0 or solution.x0 != frame.x0:
        raise ValueError("solution and frame have different expansion points")
    tt, xx = frame.sample_grid(nt, nx, frame.r0)
    Avals = mat_eval(flux_matrix_series(solution.model, solution.u1, solution.u2), tt, xx)
    tr = Avals[..., 0, 0] + Avals[..., 1, 1]
    det = Avals[..., 0, 0] * Avals[..., 1, 1] - Avals[..., 0, 1] * Avals[..., 1, 0]
    disc = tr * tr - 4.0 * det
    scale = np.max(np.abs(Avals), axis=(-2, -1)) ** 2
    centre = quadratic_eigenvalues(Avals[0, nx // 2])[2].real
    bad = (np.abs(disc) <= tol * scale) | (np.sign(disc.real) != np.sign(centre))
    if np.any(bad):
        k = np.argwhere(bad)[0]
        raise FrameTooLargeError(
            f"eigenvalues collide or change type at (T, x) = ({tt[tuple(k)]:.6g}, {xx[tuple(k)]:.6g}); "
            "shrink r0 or T1")
    return diagonalize(solution)


def frame_regime(solution: SeriesSolution) -> Regime:
    A = flux_matrix_series(solution.model, solution.u1, solution.u2)
    A0 = np.array([[A[i][j].coeffs[0, 0] for j in range(2)] for i in range(2)])
    disc = quadratic_eigenvalues(A0)[2]
    if disc.real < 0:
        return Regime.ELLIPTIC
    return Regime.HYPERBOLIC if disc.real > 0 else Regime.SONIC


# ---------------------------------------------------------------------------
# complex characteristics


def _transport_solve(speed: BivariateSeries, init_x) -> BivariateSeries:
    """d_t f + speed d_x f = 0 with f(T0, x) given by coefficients `init_x`."""
    N, T0, x0 = speed.N, speed.T0, speed.x0
    f = BivariateSeries.from_x(init_x, N, T0, x0)
    for m in range(N):
        rhs = -(speed * f.d_dx())
        c = f.coeffs.copy()
        width = N - m
        c[m + 1, :width] = rhs.coeffs[m, :width] / (m + 1)
        f = BivariateSeries(c, T0, x0)
    return f


@dataclass
class CharacteristicPair:
    zeta1: BivariateSeries
    zeta2: BivariateSeries
    lambdas: tuple[BivariateSeries, BivariateSeries]

    def __getitem__(self, i):
        return (self.zeta1, self.zeta2)[i]

    def residual(self) -> float:
        N = self.zeta1.N
        return max((z.d_dt() + lam * z.d_dx()).max_abs(max(N - 1, 0))
                   for z, lam in zip((self.zeta1, self.zeta2), self.lambdas))

    def initial_defect(self) -> float:
        """max |coefficient| of zeta_i(T0, x) - x."""
        out = 0.0
        for z in (self.zeta1, self.zeta2):
            row = z.at_T0()
            row[0] -= z.x0
            if row.size > 1:
                row[1] -= 1.0
            out = max(out, float(np.max(np.abs(row))))
        return out

    def first_order_defect(self) -> float:
        """max |coefficient| of (t-coefficient of zeta_i) + lambda_i(T0, .)."""
        out = 0.0
        for z, lam in zip((self.zeta1, self.zeta2), self.lambdas):
            if z.N < 1:
                continue
            n = z.N
            out = max(out, float(np.max(np.abs(z.time_row(1) + lam.time_row(0)[:n]))))
        return out

    def remainder(self, i: int) -> BivariateSeries:
        """r = (Im zeta_i + (t - T0) Im lambda_i(T0, x)) / (t - T0), Im taken coefficient-wise."""
        z = (self.zeta1, self.zeta2)[i]
        lam = self.lambdas[i]
        N = z.N
        num = z.imag.coeffs.copy()
        num[1, :N] += lam.imag.coeffs[0, :N]
        if np.any(num[0] != 0):
            raise ArithmeticError("Im zeta does not vanish on the initial line")
        c = np.zeros_like(num)
        c[:-1, :] = num[1:, :]
        return BivariateSeries(c, z.T0, z.x0)


def solve_zeta(D) -> CharacteristicPair:
    lam1, lam2 = D[0][0], D[1][1]
    init = [lam1.x0, 1.0]
    return CharacteristicPair(_transport_solve(lam1, init), _transport_solve(lam2, init), (lam1, lam2))


# ---------------------------------------------------------------------------
# conjugator


def _B_rhs(B, D, dTL_S, D_dxL_S):
    BD = mat_mul(B, D)
    return mat_add(mat_d_dx(BD), mat_mul(B, dTL_S), mat_mul(B, D_dxL_S))


@dataclass
class ConjugatorField:
    B: list
    B_d: list

    def residual(self, diag: Diagonalizer) -> float:
        """Coefficient residual of the conjugator equation through degree N - 1."""
        dTL_S, D_dxL_S = _frame_terms(diag)
        R = mat_add(mat_d_dt(self.B), _B_rhs(self.B, diag.D, dTL_S, D_dxL_S))
        N = self.B[0][0].N
        return mat_max_abs(R, max(N - 1, 0))


def _frame_terms(diag: Diagonalizer):
    L, S = diag.S_inv, diag.S
    return mat_mul(mat_d_dt(L), S), mat_mul(diag.D, mat_mul(mat_d_dx(L), S))


def _as_x_data(B_d, like: BivariateSeries):
    out = []
    for i in range(2):
        row = []
        for j in range(2):
            entry = B_d[i][j]
            if isinstance(entry, BivariateSeries):
                row.append(entry.at_T0())
            else:
                row.append(np.atleast_1d(np.asarray(entry, dtype=complex)))
        out.append(row)
    return out


def solve_B(S, S_inv, D, B_d=None) -> ConjugatorField:
    """Conjugator from data on {T = T0}; B_d is a 2x2 of constants or x-coefficient arrays."""
    like = S[0][0]
    N, T0, x0 = like.N, like.T0, like.x0
    if B_d is None:
        B_d = [[1.0, 0.0], [0.0, 1.0]]
    data = _as_x_data(B_d, like)
    B = [[BivariateSeries.from_x(data[i][j], N, T0, x0) for j in range(2)] for i in range(2)]
    diag = Diagonalizer(S, S_inv, D, A=None)
    dTL_S, D_dxL_S = _frame_terms(diag)
    for m in range(N):
        rhs = _B_rhs(B, D, dTL_S, D_dxL_S)
        width = N - m
        newB = []
        for i in range(2):
            row = []
            for j in range(2):
                c = B[i][j].coeffs.copy()
                c[m + 1, :width] = -rhs[i][j].coeffs[m, :width] / (m + 1)
                row.append(BivariateSeries(c, T0, x0))
            newB.append(row)
        B = newB
    return ConjugatorField(B, data)


# ---------------------------------------------------------------------------
# assembled fields


@dataclass
class ConjugationFields:
    """Series for u, S, S^{-1}, D, zeta and B about (T0, x0).

    `v` = B S^{-1} u is kept as a series for the initial-line FBI data; the
    identity checks use :meth:`at`, which evaluates every factor from its own
    series and combines them pointwise.
    """

    solution: SeriesSolution
    diag: Diagonalizer
    zeta: CharacteristicPair
    conj: ConjugatorField

    def __post_init__(self):
        u = [self.solution.u1, self.solution.u2]
        self.w = mat_apply(self.diag.S_inv, u)
        self.v = mat_apply(self.conj.B, self.w)

    @property
    def N(self) -> int:
        return self.solution.N

    def at(self, t, x, B=None) -> "PointValues":
        return PointValues.evaluate(self, t, x, B)


def _vec_eval(pair, t, x):
    return np.stack([pair[0].evaluate(t, x), pair[1].evaluate(t, x)], axis=-1)


def _mv(M, v):
    return np.einsum("...ij,...j->...i", M, v)


@dataclass
class PointValues:
    """Fields and first derivatives at sample points (trailing axes: vector / matrix)."""

    u: np.ndarray
    dt_u: np.ndarray
    dx_u: np.ndarray
    S: np.ndarray
    dx_S: np.ndarray
    L: np.ndarray
    dt_L: np.ndarray
    dx_L: np.ndarray
    D: np.ndarray
    dx_D: np.ndarray
    B: np.ndarray
    dt_B: np.ndarray
    dx_B: np.ndarray
    zeta: np.ndarray
    dt_zeta: np.ndarray
    dx_zeta: np.ndarray

    @classmethod
    def evaluate(cls, fields: ConjugationFields, t, x, B=None) -> "PointValues":
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        u = [fields.solution.u1, fields.solution.u2]
        d = fields.diag
        B = fields.conj.B if B is None else B
        zeta = [fields.zeta.zeta1, fields.zeta.zeta2]
        return cls(
            _vec_eval(u, t, x), _vec_eval([c.d_dt() for c in u], t, x), _vec_eval([c.d_dx() for c in u], t, x),
            mat_eval(d.S, t, x), mat_eval(mat_d_dx(d.S), t, x),
            mat_eval(d.S_inv, t, x), mat_eval(mat_d_dt(d.S_inv), t, x), mat_eval(mat_d_dx(d.S_inv), t, x),
            mat_eval(d.D, t, x), mat_eval(mat_d_dx(d.D), t, x),
            mat_eval(B, t, x), mat_eval(mat_d_dt(B), t, x), mat_eval(mat_d_dx(B), t, x),
            _vec_eval(zeta, t, x), _vec_eval([c.d_dt() for c in zeta], t, x),
            _vec_eval([c.d_dx() for c in zeta], t, x))

    @property
    def lam(self):
        return np.stack([self.D[..., 0, 0], self.D[..., 1, 1]], axis=-1)

    @property
    def dx_lam(self):
        return np.stack([self.dx_D[..., 0, 0], self.dx_D[..., 1, 1]], axis=-1)

    @property
    def w(self):
        return _mv(self.L, self.u)

    @property
    def dt_w(self):
        return _mv(self.dt_L, self.u) + _mv(self.L, self.dt_u)

    @property
    def dx_w(self):
        return _mv(self.dx_L, self.u) + _mv(self.L, self.dx_u)

    @property
    def v(self):
        return _mv(self.B, self.w)

    @property
    def dt_v(self):
        return _mv(self.dt_B, self.w) + _mv(self.B, self.dt_w)

    @property
    def dx_v(self):
        return _mv(self.dx_B, self.w) + _mv(self.B, self.dx_w)

    @property
    def dx_commutator(self):
        """d_x([D, B] w)."""
        C = self.D @ self.B - self.B @ self.D
        dC = self.dx_D @ self.B + self.D @ self.dx_B - self.dx_B @ self.D - self.B @ self.dx_D
        return _mv(dC, self.w) + _mv(C, self.dx_w)

    def weight(self, mu, z):
        """e_i = exp(-mu (zeta_i - z)^2)."""
        return np.exp(-mu * (self.zeta - z) ** 2)

    @property
    def SD(self):
        return self.S @ self.D

    @property
    def Au(self):
        return _mv(self.SD, self.w)

    @property
    def P(self):
        """d_x(S D) + S D (d_x L) S."""
        return self.dx_S @ self.D + self.S @ self.dx_D + self.SD @ self.dx_L @ self.S


def build_fields(solution: SeriesSolution, frame: ProblemFrame, B_d=None) -> ConjugationFields:
    diag = diagonalizer_fields(solution, frame)
    zeta = solve_zeta(diag.D)
    conj = solve_B(diag.S, diag.S_inv, diag.D, B_d)
    return ConjugationFields(solution, diag, zeta, conj)


# ---------------------------------------------------------------------------
# pointwise identities


def conjugator_pointwise_residual(fields: ConjugationFields, frame: ProblemFrame, nt: int = 9,
                                  nx: int = 17) -> float:
    """max over the sample grid of |d_T B + d_x(B D) + B (d_T L) S + B D (d_x L) S|.

    Each factor is evaluated from its own series and multiplied pointwise.
    """
    tt, xx = frame.sample_grid(nt, nx)
    diag, B = fields.diag, fields.conj.B
    Bv = mat_eval(B, tt, xx)
    dTB = mat_eval(mat_d_dt(B), tt, xx)
    dxB = mat_eval(mat_d_dx(B), tt, xx)
    Dv = mat_eval(diag.D, tt, xx)
    dxD = mat_eval(mat_d_dx(diag.D), tt, xx)
    Sv = mat_eval(diag.S, tt, xx)
    dTL = mat_eval(mat_d_dt(diag.S_inv), tt, xx)
    dxL = mat_eval(mat_d_dx(diag.S_inv), tt, xx)
    R = dTB + dxB @ Dv + Bv @ dxD + Bv @ dTL @ Sv + Bv @ Dv @ dxL @ Sv
    return float(np.max(np.abs(R)))


@dataclass
class ConservationResult:
    defect: float
    source: float
    scale: float
    per_component: tuple[float, float]

    def to_dict(self) -> dict:
        return {"defect": self.defect, "commutator_source": self.source, "field_scale": self.scale,
                "per_component": list(self.per_component)}


def conservation_residual(fields: ConjugationFields, frame: ProblemFrame, mu: float, z: complex,
                          nt: int = 9, nx: int = 17, B_override=None) -> ConservationResult:
    """Defect of d_T(v_i e_i) + d_x(lambda_i v_i e_i) = e_i d_x([D, B] w)_i on the sample grid.

    ``B_override`` substitutes a different conjugator (used to check that a
    corrupted B is detected); the other fields are kept.
    """
    tt, xx = frame.sample_grid(nt, nx)
    pv = fields.at(tt, xx, B_override)
    e = pv.weight(mu, z)
    lam, v = pv.lam, pv.v
    transport = pv.dt_zeta + lam * pv.dx_zeta
    lhs = e * (pv.dt_v + lam * pv.dx_v + pv.dx_lam * v) + v * e * (-2.0 * mu * (pv.zeta - z)) * transport
    src = e * pv.dx_commutator
    axes = tuple(range(lhs.ndim - 1))
    defects = np.max(np.abs(lhs - src), axis=axes)
    sources = np.max(np.abs(src), axis=axes)
    scale = float(np.max(np.abs(v * e)))
    return ConservationResult(float(defects.max()), float(sources.max()), scale,
                              (float(defects[0]), float(defects[1])))


# ---------------------------------------------------------------------------
# integrated identities


def _x_rule(lo, hi, breaks, h):
    pts = [lo, hi] + [b for b in breaks if lo < b < hi]
    return panel_rule(pts, h, GL_ORDER)


def _rules(frame: ProblemFrame, mu: float, refine: int):
    chi = frame.cutoff
    c, R = frame.x0, frame.R
    hx = min(R / 4.0, 0.5 / math.sqrt(mu)) / 2**refine
    ht = min(frame.T1 - frame.T0, 0.05) / 2**refine
    xs, wx = _x_rule(c - R, c + R, chi.breakpoints, hx)
    # supp chi' only
    xl, wl = _x_rule(c - R, c - R / 2, (), hx)
    xr, wr = _x_rule(c + R / 2, c + R, (), hx)
    xp, wp = np.concatenate([xl, xr]), np.concatenate([wl, wr])
    ts, wt = panel_rule([frame.T0, frame.T1], ht, GL_ORDER)
    return chi, (xs, wx), (xp, wp), (ts, wt)


def _space_time(ts, xs):
    return np.meshgrid(ts, xs, indexing="ij")


@dataclass
class BoundaryIntegralReport:
    mu: float
    z: complex
    lhs: np.ndarray
    I: np.ndarray
    II: np.ndarray
    IV: np.ndarray
    III: dict
    defect: float
    literal_defect: float
    quad_error: float

    def to_dict(self) -> dict:
        def cx(a):
            return [[float(v.real), float(v.imag)] for v in a]
        return {"mu": self.mu, "z": [self.z.real, self.z.imag], "T0_integral": cx(self.lhs),
                "I": cx(self.I), "II": cx(self.II), "commutator_term": cx(self.IV),
                "III": {f"{s:.17g}": cx(v) for s, v in self.III.items()},
                "defect": self.defect, "defect_without_commutator": self.literal_defect,
                "quadrature_error": self.quad_error}


def _boundary_terms(fields, frame, mu, z, refine, s_values):
    chi, (xs, wx), (xp, wp), (ts, wt) = _rules(frame, mu, refine)
    T0, T1 = frame.T0, frame.T1
    out = {}
    p0 = fields.at(np.full_like(xs, T0), xs)
    p1 = fields.at(np.full_like(xs, T1), xs)
    cw = (wx * chi(xs))[:, None]
    out["lhs"] = np.sum(cw * p0.v * p0.weight(mu, z), axis=0)
    out["I"] = np.sum(cw * p1.v * p1.weight(mu, z), axis=0)
    # flux lambda_i Phi_i against chi', on supp chi' only
    tp, xpg = _space_time(ts, xp)
    pp = fields.at(tp, xpg)
    flux = pp.lam * pp.v * pp.weight(mu, z) * chi.derivative(xpg)[..., None]
    out["II"] = -np.einsum("t,x,txi->i", wt, wp, flux)
    tg, xg = _space_time(ts, xs)
    pg = fields.at(tg, xg)
    src = pg.weight(mu, z) * pg.dx_commutator * chi(xg)[..., None]
    out["IV"] = -np.einsum("t,x,txi->i", wt, wx, src)
    III = {}
    for s in s_values:
        if s <= 0:
            III[s] = np.zeros(2, dtype=complex)
            continue
        tsub, wsub = panel_rule([T0, T0 + s], min(s, 0.05) / 2**refine, GL_ORDER)
        ts2, xs2 = _space_time(tsub, xp)
        ps = fields.at(ts2, xs2)
        fl = ps.lam * ps.v * ps.weight(mu, z) * chi.derivative(xs2)[..., None]
        III[s] = -np.einsum("t,x,txi->i", wsub, wp, fl)
    return out, III


def boundary_integrals(fields: ConjugationFields, frame: ProblemFrame, mu: float, z: complex,
                       s_values=(), quad_tol: float = DEFAULT_QUAD_TOL) -> BoundaryIntegralReport:
    """The T0 integral and the terms I, II (flux over supp chi'), commutator term and III(s).

    The exact identity is  T0 integral = I + II + commutator term.  The
    quadrature is repeated with halved panels; a change above `quad_tol`
    raises QuadratureError.
    """
    s_values = tuple(float(s) for s in s_values)
    for s in s_values:
        if not 0 <= s <= frame.T1 - frame.T0:
            raise ValueError(f"III(s) needs 0 <= s <= T1 - T0, got {s}")
    a, III = _boundary_terms(fields, frame, mu, z, 0, s_values)
    b, _ = _boundary_terms(fields, frame, mu, z, 1, ())
    qerr = max(float(np.max(np.abs(a[k] - b[k]))) for k in a)
    if qerr > quad_tol:
        raise QuadratureError(f"boundary integrals changed by {qerr:.3e} under refinement (tol {quad_tol})")
    defect = float(np.max(np.abs(b["lhs"] - (b["I"] + b["II"] + b["IV"]))))
    literal = float(np.max(np.abs(b["lhs"] - (b["I"] + b["II"]))))
    return BoundaryIntegralReport(float(mu), complex(z), b["lhs"], b["I"], b["II"], b["IV"], III,
                                  defect, literal, qerr)


@dataclass
class URecoveryReport:
    mu: float
    z: complex
    lhs: np.ndarray
    i: np.ndarray
    ii: np.ndarray
    iii: np.ndarray
    defect: float
    bound_factor: float
    quad_error: float

    def to_dict(self) -> dict:
        def cx(a):
            return [[float(v.real), float(v.imag)] for v in a]
        return {"mu": self.mu, "z": [self.z.real, self.z.imag], "T0_integral": cx(self.lhs),
                "i": cx(self.i), "ii": cx(self.ii), "iii": cx(self.iii), "defect": self.defect,
                "iii_bound_factor": self.bound_factor, "quadrature_error": self.quad_error}


def _u_terms(fields, frame, mu, z, refine):
    chi, (xs, wx), (xp, wp), (ts, wt) = _rules(frame, mu, refine)
    T0, T1 = frame.T0, frame.T1
    g0 = np.exp(-mu * (xs - z) ** 2)
    cw = (wx * chi(xs) * g0)[:, None]
    out = {}
    out["lhs"] = np.sum(cw * fields.at(np.full_like(xs, T0), xs).u, axis=0)
    out["i"] = np.sum(cw * fields.at(np.full_like(xs, T1), xs).u, axis=0)
    tp, xpg = _space_time(ts, xp)
    pp = fields.at(tp, xpg)
    gp = np.exp(-mu * (xpg - z) ** 2) * chi.derivative(xpg)
    out["ii"] = -np.einsum("t,x,txi->i", wt, wp, pp.Au * gp[..., None])
    tg, xg = _space_time(ts, xs)
    pg = fields.at(tg, xg)
    g = (np.exp(-mu * (xg - z) ** 2) * chi(xg))[..., None]
    src = _mv(pg.P, pg.w) - 2.0 * mu * (xg - z)[..., None] * pg.Au
    out["iii"] = -np.einsum("t,x,txi->i", wt, wx, src * g)
    return out


def iii_bound_factor(fields: ConjugationFields, frame: ProblemFrame, mu: float, z: complex,
                     nt: int = 17, nx: int = 65) -> float:
    """int_{T0}^{T1} sup_{supp chi} [|d_x(S D)| + |S D (d_x L) S| + 2 mu |x - z| |S D|] dT.

    Matrix magnitudes are entry sums.  The factor is affine in mu.
    """
    diag = fields.diag
    SD = mat_mul(diag.S, diag.D)
    t = np.linspace(frame.T0, frame.T1, nt)
    x = np.linspace(frame.x0 - frame.R, frame.x0 + frame.R, nx)
    tt, xx = _space_time(t, x)
    a = np.abs(mat_eval(mat_d_dx(SD), tt, xx)).sum(axis=(-2, -1))
    b = np.abs(mat_eval(mat_mul(SD, mat_mul(mat_d_dx(diag.S_inv), diag.S)), tt, xx)).sum(axis=(-2, -1))
    c = np.abs(mat_eval(SD, tt, xx)).sum(axis=(-2, -1))
    sup = np.max(a + b + 2.0 * mu * np.abs(xx - z) * c, axis=1)
    return float(trapezoid(sup, t))


def u_recovery_integrals(fields: ConjugationFields, frame: ProblemFrame, mu: float, z: complex,
                         quad_tol: float = DEFAULT_QUAD_TOL) -> URecoveryReport:
    """Integrated identity for u with weight g = exp(-mu (x - z)^2):

        int_{T0} u g chi = int_{T1} u g chi - int int A u g chi'
                           - int int [d_x(S D) + S D (d_x L) S - 2 mu (x - z) S D] w g chi
                         = i + ii + iii.
    """
    a = _u_terms(fields, frame, mu, z, 0)
    b = _u_terms(fields, frame, mu, z, 1)
    qerr = max(float(np.max(np.abs(a[k] - b[k]))) for k in a)
    if qerr > quad_tol:
        raise QuadratureError(f"u-recovery integrals changed by {qerr:.3e} under refinement (tol {quad_tol})")
    defect = float(np.max(np.abs(b["lhs"] - (b["i"] + b["ii"] + b["iii"]))))
    return URecoveryReport(float(mu), complex(z), b["lhs"], b["i"], b["ii"], b["iii"], defect,
                           iii_bound_factor(fields, frame, mu, z), qerr)


# ---------------------------------------------------------------------------
# FBI decay of (B S u)_i on the initial line


def initial_line_data(fields: ConjugationFields, frame: ProblemFrame) -> list[Datum1D]:
    """chi(x) v_i(T0, x) for i = 1, 2, as compactly supported data."""
    chi = frame.cutoff
    out = []
    for i in range(2):
        s = fields.v[i]

        def f(x, s=s):
            return chi(x) * s.evaluate(np.full_like(x, frame.T0), x)
        out.append(Datum1D(f, (frame.x0 - frame.R, frame.x0 + frame.R), chi.breakpoints, f"(BSu)_{i + 1}"))
    return out


def est_basic_centers(fields: ConjugationFields, frame: ProblemFrame, t0: float | None = None):
    """z_i = x0 - i (t0 - T0) Im lambda_i(T0, x0)."""
    t0 = frame.T1 if t0 is None else t0
    if not frame.T0 < t0 <= frame.T1:
        raise ValueError("t0 must lie in (T0, T1]")
    return [complex(frame.x0, -(t0 - frame.T0) * lam.coeffs[0, 0].imag) for lam in fields.diag.lambdas]


def est_basic_mu_grid(n: int = EST_BASIC_MU_POINTS, mu_max: float = EST_BASIC_MU_MAX) -> np.ndarray:
    return np.geomspace(1.0, mu_max, n)


def _exp_power_design(mu):
    mu = np.asarray(mu, dtype=float)
    return np.column_stack([mu, np.log(mu), np.ones_like(mu)])


def fit_exp_power(mu, mags, floors):
    """Fit log m = -eps mu - p log mu + c over the samples above their noise floor.

    The log mu column absorbs the algebraic decay that every compactly
    supported datum shows, so eps measures only the exponential part.
    Returns (eps, p, rms, logs, mask, flags).
    """
    mu = np.asarray(mu, dtype=float)
    mags = np.asarray(mags, dtype=float)
    flags: list[str] = []
    clamped = mags <= floors
    logs = np.log(np.maximum(np.where(clamped, floors, mags), 1e-300))
    mask = ~clamped
    if np.all(mags == 0):
        return math.nan, math.nan, math.nan, logs, mask, ["zero-transform"]
    if clamped.any():
        flags.append("clamped")
    if mask.sum() < 4:
        flags.append("fit-degenerate")
        return math.nan, math.nan, math.nan, logs, mask, flags
    A = _exp_power_design(mu[mask])
    coef, *_ = np.linalg.lstsq(A, logs[mask], rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - logs[mask]) ** 2)))
    return float(-coef[0]), float(-coef[1]), rms, logs, mask, flags


@dataclass
class ComponentDecay:
    component: int
    center: complex
    eps_hat: float
    power: float
    fit_residual: float
    positive: bool
    flags: list[str]
    mu: np.ndarray
    log_abs: np.ndarray
    weighted_log_abs: np.ndarray

    def to_dict(self) -> dict:
        return {"component": self.component, "center": [self.center.real, self.center.imag],
                "eps_hat": self.eps_hat, "power": self.power, "fit_residual": self.fit_residual,
                "above_floor": self.positive, "flags": list(self.flags)}


@dataclass
class EstBasicReport:
    components: list[ComponentDecay]
    floor: float
    disc_radius: float

    @property
    def eps_hat(self) -> list[float]:
        return [c.eps_hat for c in self.components]

    def to_dict(self) -> dict:
        return {"floor": self.floor, "disc_radius": self.disc_radius,
                "components": [c.to_dict() for c in self.components]}

    def sweep_rows(self):
        for c in self.components:
            for m, la, wl in zip(c.mu, c.log_abs, c.weighted_log_abs):
                yield m, c.component, la, wl


def est_basic_check(data: list[Datum1D], centers, mu_grid=None, disc_radius: float = 0.02,
                    floor: float = EST_BASIC_FLOOR) -> EstBasicReport:
    """Exponential decay rate of exp(-mu (Im z)^2 / 2) |T f_i|(z, mu) near each center.

    The magnitude is maximised over a disc around the center and its log is
    fitted by -eps mu - p log mu + c (see fit_exp_power).
    """
    mu = est_basic_mu_grid() if mu_grid is None else np.asarray(mu_grid, dtype=float)
    if mu.size < 6 or np.any(mu <= 0):
        raise ValueError("mu grid needs at least 6 positive values")
    comps = []
    for k, (f, zc) in enumerate(zip(data, centers)):
        zc = complex(zc)
        mags, floors = weighted_sweep(f, disc_points(zc, disc_radius), mu)
        eps, p, rms, logs, _, flags = fit_exp_power(mu, mags, floors)
        # log |T f| at the center itself, for the sweep table
        centre = np.array([abs(weighted_transform(f, [zc], m)[0]) for m in mu])
        log_abs = np.log(np.maximum(centre, 1e-300)) + 0.5 * mu * zc.imag ** 2
        ok = bool(math.isfinite(eps) and eps > floor)
        comps.append(ComponentDecay(k + 1, zc, eps, p, rms, ok, flags, mu, log_abs, logs))
    return EstBasicReport(comps, floor, disc_radius)


def gaussian_decay_exponent(z: complex, mu_fit) -> float:
    """eps from fit_exp_power applied to the weighted closed-form Gaussian transform."""
    mu = np.asarray(mu_fit, dtype=float)
    z = complex(z)
    L = (0.5 * np.log(2 * np.pi / (mu + 1)) - mu * (z * z).real / (2 * (mu + 1)) - 0.5 * mu * z.imag**2)
    coef, *_ = np.linalg.lstsq(_exp_power_design(mu), L, rcond=None)
    return float(-coef[0])

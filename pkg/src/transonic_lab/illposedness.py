"""Norm-ratio growth for the frozen-coefficient elliptic Cauchy problem.

For a base state u* where A(u*) has eigenvalues lambda_+- with Im lambda_+ > 0,

    v(t, x) = a exp(i k (x - lambda_+ t)) w_+

solves d_t v + A(u*) d_x v = 0 exactly and its modulus grows like
exp(k Im(lambda_+) t).  The experiment compares the L^2 norm of v over

    Omega_r = {(t, x): |x - x0|^2 + delta (t - T0) < r^2,  T0 <= t <= T0 + horizon}

with a power alpha of a norm of the data restricted near x0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from ._parallel import parallel_map
from .cutoff import CutoffSpec
from .eigenstructure import eigen_decompose
from .gasdyn import FlowState, GasModel, flux_matrix
from .quadrature import GL_ORDER, panel_rule
from .series import BivariateSeries

DEFAULT_WINDOW_POINTS = 2048
DEFAULT_BETA_MAX = 200


# ---------------------------------------------------------------------------
# norms


def sobolev_norm(f, s: float, x=None, length: float | None = None, rtol: float = 1e-9) -> float:
    """H^s norm of samples of a function that vanishes at the window edges.

    With c_k the discrete Fourier coefficients (FFT / n) and kappa_k = 2 pi k / L,

        ||f||_s^2 = L * sum_k (1 + kappa_k^2)^s |c_k|^2,

    so that s = 0 gives the trapezoid L^2 norm h sum |f_j|^2 (Parseval).  The
    window is given either by the sample grid `x` (must be uniform) or by its
    `length`.
    """
    f = np.asarray(f, dtype=complex).ravel()
    n = f.size
    if n < 2 or n & (n - 1):
        raise ValueError(f"sample count must be a power of two, got {n}")
    if x is not None:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != n:
            raise ValueError("grid and samples differ in length")
        dx = np.diff(x)
        h = dx.mean()
        if h <= 0 or np.max(np.abs(dx - h)) > rtol * abs(h):
            raise ValueError("grid must be uniform and increasing")
        L = n * h
    elif length is not None:
        L = float(length)
    else:
        raise ValueError("give the sample grid or the window length")
    c = np.fft.fft(f) / n
    kappa = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
    return float(math.sqrt(L * np.sum((1.0 + kappa**2) ** s * np.abs(c) ** 2)))


@dataclass(frozen=True)
class GevreyNorm:
    value: float
    beta_star: int
    at_truncation: bool


def gevrey_terms(derivative_sup: Sequence[float], sigma: float, c: float) -> np.ndarray:
    """M_beta c^-beta (beta!)^(-1/sigma), computed in log space."""
    M = np.asarray(derivative_sup, dtype=float)
    beta = np.arange(M.size)
    with np.errstate(divide="ignore"):
        logs = np.log(M) - beta * math.log(c) - gammaln(beta + 1.0) / sigma
    return np.exp(logs)


def gevrey_norm(f, sigma: float, c: float, radius: float = 0.5, beta_max: int = DEFAULT_BETA_MAX,
                n_sample: int = 257) -> GevreyNorm:
    """sup_beta ||d^beta f||_inf c^-beta (beta!)^(-1/sigma) over beta <= beta_max.

    `f` is either a callable ``beta -> sup |d^beta f|`` (derivative oracle), a
    sequence of those sups, or a BivariateSeries whose t = T0 restriction is
    differentiated exactly and sampled on |x - x0| <= radius.
    """
    if not 0 < sigma:
        raise ValueError("sigma must be positive")
    if not c > 0:
        raise ValueError("c must be positive")
    if isinstance(f, BivariateSeries):
        row = f.at_T0()
        xs = np.linspace(-radius, radius, n_sample)
        beta_max = min(beta_max, row.size - 1)
        M = []
        poly = np.polynomial.Polynomial(row)
        for b in range(beta_max + 1):
            M.append(float(np.max(np.abs(poly(xs)))) if poly.coef.size else 0.0)
            poly = poly.deriv() if poly.degree() > 0 else np.polynomial.Polynomial([0.0])
    elif callable(f):
        M = [float(f(b)) for b in range(beta_max + 1)]
    else:
        M = list(f)[: beta_max + 1]
    if not M:
        raise ValueError("no derivative bounds available")
    terms = gevrey_terms(M, sigma, c)
    k = int(np.argmax(terms))
    return GevreyNorm(float(terms[k]), k, k == len(M) - 1)


class NormKind(str, Enum):
    SOBOLEV = "sobolev"
    GEVREY = "gevrey"


@dataclass(frozen=True)
class NormSpec:
    kind: NormKind = NormKind.SOBOLEV
    s: float = 2.0
    sigma: float = 0.4
    c: float = 1.0
    radius: float = 0.5

    def __post_init__(self):
        if self.kind == NormKind.GEVREY:
            if not 0 < self.sigma < 1:
                raise ValueError("Gevrey index sigma must lie in (0, 1)")
            if not self.c > 0:
                raise ValueError("Gevrey constant c must be positive")

    def to_dict(self) -> dict:
        if self.kind == NormKind.SOBOLEV:
            return {"kind": "sobolev", "s": self.s}
        return {"kind": "gevrey", "sigma": self.sigma, "c": self.c, "radius": self.radius}


# ---------------------------------------------------------------------------
# modal solutions


@dataclass(frozen=True)
class Mode:
    lam: complex
    w: np.ndarray
    growing: bool

    @property
    def rate(self) -> float:
        return self.lam.imag


def growing_mode(base: FlowState, model: GasModel) -> Mode:
    dec = eigen_decompose(flux_matrix(model, base))
    return Mode(dec.lambda_plus, dec.S[:, 0], dec.lambda_plus.imag > 0)


def modal_linear_solution(base: FlowState, model: GasModel, k: float, a: float, t, x) -> np.ndarray:
    """v(t, x) = a exp(i k (x - lambda_+ t)) w_+; returns shape (2,) + broadcast(t, x)."""
    if a <= 0:
        raise ValueError("amplitude must be positive")
    mode = growing_mode(base, model)
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    phase = a * np.exp(1j * k * (x - mode.lam * t))
    return mode.w.reshape((2,) + (1,) * phase.ndim) * phase


def modal_amplitude(base: FlowState, model: GasModel, k: float, a: float, t) -> np.ndarray:
    """|v|(t) for unit-norm w_+ (independent of x)."""
    mode = growing_mode(base, model)
    return a * np.exp(k * mode.rate * np.asarray(t, dtype=float))


# ---------------------------------------------------------------------------
# the experiment


@dataclass(frozen=True)
class GrowthRegion:
    x0: float
    r: float
    delta: float = 1.0
    T0: float = 0.0

    def __post_init__(self):
        if not (self.r > 0 and self.delta > 0):
            raise ValueError("region needs r > 0 and delta > 0")

    def contains(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        return (t >= self.T0) & ((x - self.x0) ** 2 + self.delta * (t - self.T0) < self.r**2)

    def l2_norm(self, field_fn: Callable, horizon: float, n_panels: int = 4) -> float:
        """L^2 norm of field_fn(t, x) (leading axis = components) over the region up to T0 + horizon.

        Uses t = T0 + (r^2 - y^2)/delta so the half-width of each slice is y.
        """
        r, d = self.r, self.delta
        y_lo = math.sqrt(max(r * r - d * horizon, 0.0))
        if y_lo >= r:
            return 0.0
        ys, wy = panel_rule([y_lo, r], (r - y_lo) / n_panels, GL_ORDER)
        g, wg = np.polynomial.legendre.leggauss(GL_ORDER)
        total = 0.0
        for y, w in zip(ys, wy):
            t = self.T0 + (r * r - y * y) / d
            # x slice of half-width y, split into panels for oscillatory data
            xs, wx = panel_rule([self.x0 - y, self.x0 + y], max(y / n_panels, 1e-300), GL_ORDER)
            vals = field_fn(np.full_like(xs, t), xs)
            dens = np.sum(np.abs(vals) ** 2, axis=0)
            total += w * (2.0 * y / d) * np.sum(wx * dens)
        return math.sqrt(total)


def default_r_rule(k: float) -> float:
    return k ** -0.25


def r_rule_from_name(name: str) -> Callable[[float], float]:
    """'k^-p' for p > 0."""
    name = name.replace(" ", "")
    if not name.startswith("k^-"):
        raise ValueError(f"unsupported r rule {name!r}; use 'k^-p'")
    p = float(name[3:])
    if not p > 0:
        raise ValueError("r rule exponent must be positive")
    return lambda k: k ** -p


class GrowthVerdict(str, Enum):
    INCREASING = "Increasing"
    NOT_INCREASING = "NotIncreasing"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class GrowthReport:
    k: list[float]
    r: list[float]
    numerator: list[float]
    denominator: list[float]
    ratio: list[float]
    verdict: GrowthVerdict
    norm: NormSpec
    alpha: float
    family: str
    flags: list[str] = field(default_factory=list)

    def rows(self):
        return list(zip(self.k, self.numerator, self.denominator, self.ratio))

    def to_dict(self) -> dict:
        return {"family": self.family, "norm": self.norm.to_dict(), "alpha": self.alpha,
                "verdict": self.verdict.value, "flags": list(self.flags),
                "entries": [{"k": k, "r": r, "numerator": n, "denominator": d, "ratio": q}
                            for k, r, n, d, q in zip(self.k, self.r, self.numerator,
                                                     self.denominator, self.ratio)]}


def _taper(x0: float, r_lower: float) -> CutoffSpec:
    # C-infinity, equal to 1 on the data ball and 0 beyond twice its radius
    return CutoffSpec(x0, 2.0 * r_lower, order=None)


def data_norm(base: FlowState, model: GasModel, k: float, a: float, norm: NormSpec, x0: float = 0.0,
              r_lower: float = 0.5, n: int = DEFAULT_WINDOW_POINTS,
              beta_max: int = DEFAULT_BETA_MAX) -> float:
    """Sum over components of the norm of the data a e^{ikx} (w_+)_j restricted near x0."""
    mode = growing_mode(base, model)
    if norm.kind == NormKind.SOBOLEV:
        taper = _taper(x0, r_lower)
        L = 8.0 * r_lower
        x = x0 - L / 2 + L * np.arange(n) / n
        base_wave = a * np.exp(1j * k * x) * taper(x)
        return sum(sobolev_norm(mode.w[j] * base_wave, norm.s, x=x) for j in range(2))
    total = 0.0
    for j in range(2):
        amp = a * abs(mode.w[j])
        if amp == 0:
            continue
        # sup |d^beta (amp e^{ikx})| = amp k^beta, evaluated in log space
        logM = math.log(amp) + np.arange(beta_max + 1) * math.log(k)
        logs = logM - np.arange(beta_max + 1) * math.log(norm.c) - gammaln(np.arange(beta_max + 1) + 1.0) / norm.sigma
        total += float(np.exp(np.max(logs)))
    return total


def growth_experiment(base: FlowState, model: GasModel, k_list, s: float = 2.0, alpha: float = 0.5,
                      delta: float = 1.0, r_rule: Callable[[float], float] = default_r_rule,
                      horizon: float = 0.25, norm: NormSpec | None = None, a: float = 1.0,
                      x0: float = 0.0, r_lower: float = 0.5) -> GrowthReport:
    """Ratio ||v_k||_{L^2(Omega_{r_k})} / ||data_k||^alpha along the modal family v_k."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    ks = [float(k) for k in k_list]
    if not ks:
        raise ValueError("empty k sequence")
    if any(b <= a_ for a_, b in zip(ks, ks[1:])):
        raise ValueError("k sequence must be strictly increasing")
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    norm = norm or NormSpec(NormKind.SOBOLEV, s=s)
    mode = growing_mode(base, model)
    flags = []
    if not mode.growing:
        flags.append("non-elliptic-base-state")

    def one(k):
        r = float(r_rule(k))
        region = GrowthRegion(x0, r, delta)
        num = region.l2_norm(lambda t, x: modal_linear_solution(base, model, k, a, t, x), horizon,
                             n_panels=max(4, int(math.ceil(k * r / 2))))
        den = data_norm(base, model, k, a, norm, x0, r_lower) ** alpha
        return r, num, den

    out = parallel_map(one, ks)
    rs = [o[0] for o in out]
    nums = [o[1] for o in out]
    dens = [o[2] for o in out]
    if any(not (math.isfinite(v) and v > 0) for v in nums + dens):
        raise ValueError("degenerate region: zero or non-finite norm")
    ratios = [n_ / d_ for n_, d_ in zip(nums, dens)]
    if len(ks) < 2:
        verdict = GrowthVerdict.INCONCLUSIVE
    elif all(b > a_ for a_, b in zip(ratios, ratios[1:])):
        verdict = GrowthVerdict.INCREASING
    else:
        verdict = GrowthVerdict.NOT_INCREASING
    family = (f"v_k = {a:g} exp(i k (x - lambda_+ t)) w_+ about u* = ({base.u1:g}, {base.u2:g}), "
              f"lambda_+ = {mode.lam.real:.6g}{mode.lam.imag:+.6g}i")
    return GrowthReport(ks, rs, nums, dens, ratios, verdict, norm, alpha, family, flags)


def linearization_spot_check(base: FlowState, model: GasModel, k: float, amplitudes, t: float, x: float,
                             N: int = 16) -> np.ndarray:
    """|u_CK - (u* + v_k)| at (t, x) for data u* + a e^{ikx} w_+, one entry per amplitude a.

    The nonlinear solution comes from the series solver with the Taylor
    coefficients a (ik)^n / n! w_+ as data, so the difference is second order
    in a (third order at u* = 0, where A(u) - A(0) is quadratic in u).
    """
    from .series import ck_solve

    mode = growing_mode(base, model)
    n = np.arange(N + 1)
    taylor = np.exp(n * np.log(complex(0.0, k)) - gammaln(n + 1.0))
    out = []
    for a in amplitudes:
        d1 = a * mode.w[0] * taylor
        d2 = a * mode.w[1] * taylor
        d1[0] += base.u1
        d2[0] += base.u2
        sol = ck_solve((d1, d2), model, N, warn_growth=False)
        u = sol.evaluate(np.array(t), np.array(x)).reshape(2)
        lin = np.array([base.u1, base.u2]) + modal_linear_solution(base, model, k, a, t, x).reshape(2)
        out.append(float(np.max(np.abs(u - lin))))
    return np.array(out)

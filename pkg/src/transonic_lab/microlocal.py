"""FBI transform and analytic wave front set detection in one dimension.

    Tf(z, mu) = int exp(-(mu/2) (z - x)^2) f(x) dx,        z complex, mu >= 1

A phase-space point (x0, xi0), xi0 != 0, lies outside WF_A(f) when, for z
near z0 = x0 - i xi0, the weighted magnitude

    exp(-(mu/2) (Im z)^2) |Tf(z, mu)|

decays like exp(-eps mu / 2).  Writing z = a - i b, the weighted transform is

    int exp(-(mu/2) (a - x)^2 + i mu b (a - x)) f(x) dx

which never overflows, so all decay measurements use that form.  Past the
point where the true value drops below the double-precision noise floor of
this oscillatory integral, samples are clamped and excluded from the fit.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from ._parallel import parallel_map
from .errors import FBIOverflowError, QuadratureError
from .quadrature import GL_ORDER, panel_rule

# Calibrated against the high-precision quadrature sweep in
# demos/calibrate_wavefront_thresholds.py (table in docs/calibration.md).
EPS_MIN = 0.45
EPS_FLAT = 0.13
FIT_TOL = 0.3

DEFAULT_TOL = 1e-10
NOISE_FACTOR = 256.0
UNDERFLOW_LOG = -700.0


def default_mu_grid(n: int = 16, mu_max: float = 256.0) -> np.ndarray:
    return np.geomspace(1.0, mu_max, n)


# ---------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class Datum1D:
    """A function on the real line, treated as zero outside `support`.

    `breakpoints` lists points where the function is not smooth; quadrature
    panels are aligned with them.
    """

    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    breakpoints: tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        lo, hi = self.support
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"effective support must be a finite interval, got {self.support}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros(x.shape, dtype=complex)
        if np.any(inside):
            out[inside] = self.func(x[inside])
        return out

    @classmethod
    def from_samples(cls, x, f, order: int = 1, name: str = "samples") -> "Datum1D":
        """Interpolated samples (order 1: piecewise linear, order 3: cubic spline)."""
        x = np.asarray(x, dtype=float)
        f = np.asarray(f)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("sample grid must be strictly increasing with at least 2 nodes")
        if f.shape != x.shape:
            raise ValueError("sample values must match the grid")
        if order == 1:
            fr, fi = f.real.astype(float), np.imag(f).astype(float)
            func = lambda s: np.interp(s, x, fr) + 1j * np.interp(s, x, fi)  # noqa: E731
            bps = tuple(x[1:-1])
        elif order == 3:
            spline = CubicSpline(x, f)
            func = spline
            bps = tuple(x[1:-1])
        else:
            raise ValueError("interpolation order must be 1 or 3")
        return cls(func, (float(x[0]), float(x[-1])), bps, name)


def _gaussian(x):
    return np.exp(-0.5 * x * x)


def _lorentzian(x):
    return 1.0 / (1.0 + x * x)


PRESETS: dict[str, Datum1D] = {
    "gaussian": Datum1D(_gaussian, (-14.0, 14.0), (), "gaussian"),
    "lorentzian": Datum1D(_lorentzian, (-60.0, 60.0), (), "lorentzian"),
    "abs": Datum1D(np.abs, (-8.0, 8.0), (0.0,), "abs"),
    "step": Datum1D(lambda x: (x >= 0).astype(float), (-8.0, 8.0), (0.0,), "step"),
}

# phase-space points where each preset fails to be analytic
SINGULAR_POINTS = {"gaussian": (), "lorentzian": (), "abs": (0.0,), "step": (0.0,)}


def load_datum(spec: str) -> Datum1D:
    """Preset name or ``file:<path.csv>`` with columns ``x,f`` (piecewise linear)."""
    if spec in PRESETS:
        return PRESETS[spec]
    if spec.startswith("file:"):
        path = spec[5:]
        xs, fs = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["x", "f"]:
                raise ValueError(f"{path}: expected header x,f")
            for rowno, row in enumerate(reader, start=2):
                try:
                    xs.append(float(row[0]))
                    fs.append(float(row[1]))
                except (ValueError, IndexError):
                    raise ValueError(f"{path}: row {rowno}: malformed entry {row}") from None
        return Datum1D.from_samples(xs, fs, 1, name=spec)
    raise ValueError(f"unknown datum {spec!r}; presets: {sorted(PRESETS)}")


@dataclass(frozen=True)
class FBIQuery:
    z: complex
    mu: float
    Q: float = 1.0

    def __post_init__(self):
        if not self.mu >= 1.0:
            raise ValueError(f"mu must be >= 1, got {self.mu}")
        if not self.Q > 0.0:
            raise ValueError(f"quadratic form must be positive definite, got Q = {self.Q}")


# ---------------------------------------------------------------------------
# the transform


def _window(muq: float) -> float:
    # exp(-muq W^2 / 2) <= exp(-40) beyond W, and never narrower than max(6/sqrt(mu), 1)
    return max(1.0, 6.0 / math.sqrt(muq), math.sqrt(80.0 / muq))


def _rule(f: Datum1D, a_lo: float, a_hi: float, muq: float, bmax: float, refine: int):
    W = _window(muq)
    lo = max(f.support[0], a_lo - W)
    hi = min(f.support[1], a_hi + W)
    if lo >= hi:
        return np.empty(0), np.empty(0)
    h = min(0.5, 1.5 / math.sqrt(muq), 3.0 / (muq * bmax) if bmax > 0 else np.inf) / 2**refine
    bps = [lo, hi] + [p for p in f.breakpoints if lo < p < hi]
    return panel_rule(bps, h, GL_ORDER)


def weighted_transform(f: Datum1D, zs, mu: float, Q: float = 1.0, refine: int = 0,
                       with_envelope: bool = False):
    """exp(-(mu Q / 2)(Im z)^2) T_Q f(z, mu) for an array of z (shared nodes).

    With ``with_envelope`` also returns int exp(-(mu Q/2)(Re z - x)^2) |f| dx,
    the scale against which cancellation error is measured.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    muq = mu * Q
    a = zs.real
    b = -zs.imag
    x, w = _rule(f, float(a.min()), float(a.max()), muq, float(np.max(np.abs(b))), refine)
    if x.size == 0:
        zero = np.zeros(zs.shape, dtype=complex)
        return (zero, np.zeros(zs.shape)) if with_envelope else zero
    fx = f(x)
    d = a[:, None] - x[None, :]
    expo = -0.5 * muq * d * d + 1j * muq * b[:, None] * d
    kern = np.exp(expo)
    vals = kern @ (w * fx)
    if with_envelope:
        env = np.exp(-0.5 * muq * d * d) @ (w * np.abs(fx))
        return vals, env
    return vals


def generalized_fbi(f: Datum1D, query: FBIQuery, tol: float = DEFAULT_TOL, check: bool = True) -> complex:
    """T_Q f(z, mu) = int exp(-(mu/2) Q (z - x)^2) f(x) dx for scalar Q > 0.

    With ``check`` the panel width is halved until successive weighted values
    exp(-mu Q (Im z)^2 / 2) T_Q f agree to `tol` (absolute); QuadratureError
    after four refinements. The unweighted error is then below tol * exp(mu Q (Im z)^2 / 2).
    """
    z, mu, Q = complex(query.z), float(query.mu), float(query.Q)
    log_scale = 0.5 * mu * Q * z.imag**2
    if log_scale > 700.0:
        raise FBIOverflowError(
            f"|Tf| may reach exp({log_scale:.1f}); use weighted_transform for this (z, mu)")
    scale = math.exp(log_scale)
    prev = complex(weighted_transform(f, [z], mu, Q, 0)[0])
    if not check:
        return prev * scale
    for k in range(1, 5):
        cur = complex(weighted_transform(f, [z], mu, Q, k)[0])
        if abs(cur - prev) <= tol:
            return cur * scale
        prev = cur
    raise QuadratureError(f"FBI quadrature at z={z}, mu={mu} did not reach tolerance {tol}")


def fbi_transform(f: Datum1D, query: FBIQuery, tol: float = DEFAULT_TOL, check: bool = True) -> complex:
    """Tf(z, mu) = int exp(-(mu/2)(z - x)^2) f(x) dx."""
    if query.Q != 1.0:
        raise ValueError("fbi_transform uses Q = 1; call generalized_fbi for other forms")
    return generalized_fbi(f, query, tol, check)


def gaussian_fbi_closed_form(z, mu, Q: float = 1.0):
    """Transform of exp(-x^2/2) under the kernel exp(-(mu Q/2)(z - x)^2)."""
    m = mu * Q
    return np.sqrt(2.0 * np.pi / (m + 1.0)) * np.exp(-m * np.asarray(z) ** 2 / (2.0 * (m + 1.0)))


# ---------------------------------------------------------------------------
# decay profiles and verdicts


class WFVerdict(str, Enum):
    NOT_IN_WFA = "NotInWFA"
    IN_WFA = "InWFA"
    INCONCLUSIVE = "Inconclusive"


class AnalyticityVerdict(str, Enum):
    ANALYTIC = "Analytic"
    NOT_ANALYTIC = "NotAnalytic"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Thresholds:
    eps_min: float = EPS_MIN
    eps_flat: float = EPS_FLAT
    fit_tol: float = FIT_TOL


@dataclass
class DecayProfile:
    x0: float
    xi0: float
    mu: np.ndarray
    weighted_log_abs: np.ndarray
    clamped: np.ndarray
    fit_mask: np.ndarray
    eps_hat: float
    fit_residual: float
    verdict: WFVerdict
    disc_radius: float
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "xi0": self.xi0, "eps_hat": self.eps_hat,
                "fit_residual": self.fit_residual, "verdict": self.verdict.value,
                "disc_radius": self.disc_radius, "flags": list(self.flags),
                "n_clamped": int(self.clamped.sum()), "n_fit": int(self.fit_mask.sum())}


def fit_decay(x, y):
    """Least-squares line through (x, y); returns (slope, rms residual)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res**2)))


def disc_points(center: complex, radius: float, n_ring: int = 4) -> np.ndarray:
    if radius <= 0 or n_ring <= 0:
        return np.array([center], dtype=complex)
    ang = 2.0 * np.pi * np.arange(n_ring) / n_ring
    return np.concatenate([[center], center + radius * np.exp(1j * ang)])


def classify_decay(eps_hat: float, resid: float, th: Thresholds) -> WFVerdict:
    if eps_hat >= th.eps_min and resid <= th.fit_tol:
        return WFVerdict.NOT_IN_WFA
    if abs(eps_hat) <= th.eps_flat:
        return WFVerdict.IN_WFA
    return WFVerdict.INCONCLUSIVE


def weighted_sweep(f: Datum1D, zs, mu_grid, Q: float = 1.0):
    """For each mu: (max over zs of the weighted magnitude, matching noise floor)."""
    def one(mu):
        vals, env = weighted_transform(f, zs, float(mu), Q, with_envelope=True)
        k = int(np.argmax(np.abs(vals)))
        return abs(vals[k]), NOISE_FACTOR * np.finfo(float).eps * float(np.max(env))
    out = parallel_map(one, list(mu_grid))
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def decay_profile(f: Datum1D, x0: float, xi0: float, mu_grid=None, disc_radius: float = 0.05,
                  n_ring: int = 4, thresholds: Thresholds | None = None) -> DecayProfile:
    """Fit the exponential decay rate of the weighted FBI magnitude near x0 - i xi0.

    The slope is taken against mu/2 over the upper half of the mu grid, so a
    decay exp(-eps mu / 2) gives eps_hat = eps.  Samples below the noise floor
    are clamped to it and left out of the fit.
    """
    if xi0 == 0:
        raise ValueError("xi0 must be nonzero")
    th = thresholds or Thresholds()
    mu = default_mu_grid() if mu_grid is None else np.asarray(mu_grid, dtype=float)
    if mu.size < 8 or mu[0] > 1.0 + 1e-12 or mu[-1] < 256.0 - 1e-9:
        raise ValueError("mu grid needs >= 8 points spanning at least [1, 256]")
    zs = disc_points(complex(x0, -xi0), disc_radius, n_ring)
    mags, floors = weighted_sweep(f, zs, mu)
    fit = fit_sweep(mu, mags, floors, mu / 2.0)
    verdict = WFVerdict.INCONCLUSIVE
    if math.isfinite(fit.eps_hat):
        verdict = classify_decay(fit.eps_hat, fit.residual, th)
    return DecayProfile(float(x0), float(xi0), mu, fit.logs, fit.clamped, fit.fit_mask,
                        fit.eps_hat, fit.residual, verdict, disc_radius, fit.flags)


@dataclass
class SweepFit:
    logs: np.ndarray
    clamped: np.ndarray
    fit_mask: np.ndarray
    eps_hat: float
    residual: float
    flags: list[str]


def fit_sweep(mu, mags, floors, abscissa) -> SweepFit:
    """Clamp-and-fit shared by decay profiles and the conjugation decay check.

    eps_hat is minus the least-squares slope of the log magnitude against
    `abscissa`, over the unclamped samples of the upper half of the grid.
    An identically zero transform is flagged and not fitted.
    """
    mu = np.asarray(mu, dtype=float)
    flags: list[str] = []
    clamped = mags <= floors
    logs = np.log(np.maximum(np.where(clamped, floors, mags), 1e-300))
    upper = np.arange(mu.size) >= mu.size // 2
    fit_mask = upper & ~clamped
    if np.all(mags == 0):
        flags.append("zero-transform")
        return SweepFit(logs, clamped, np.zeros_like(clamped), math.nan, math.nan, flags)
    if clamped.any():
        flags.append("clamped")
    if fit_mask.sum() < 3:
        fit_mask = ~clamped
        flags.append("fit-window-extended")
    if fit_mask.sum() < 2:
        flags.append("fit-degenerate")
        return SweepFit(logs, clamped, fit_mask, math.nan, math.nan, flags)
    slope, resid = fit_decay(np.asarray(abscissa)[fit_mask], logs[fit_mask])
    return SweepFit(logs, clamped, fit_mask, -slope, resid, flags)


@dataclass
class AnalyticityReport:
    x0: float
    verdict: AnalyticityVerdict
    profiles: list[DecayProfile]

    def to_dict(self) -> dict:
        return {"x0": self.x0, "verdict": self.verdict.value,
                "directions": [p.to_dict() for p in self.profiles]}


def analyticity_test(f: Datum1D, x0: float, Lambda: float = 0.5, xi_samples: Sequence[float] = (-1.0, 1.0),
                     mu_grid=None, disc_radius: float = 0.05,
                     thresholds: Thresholds | None = None) -> AnalyticityReport:
    """Real analyticity at x0 from the decay profiles of all sampled directions."""
    xis = [float(v) for v in xi_samples]
    if not (any(v > 0 for v in xis) and any(v < 0 for v in xis)):
        raise ValueError("xi samples must cover both signs")
    if any(abs(v) <= Lambda for v in xis):
        raise ValueError(f"every |xi| must exceed Lambda = {Lambda}")
    profiles = [decay_profile(f, x0, xi, mu_grid, disc_radius, thresholds=thresholds) for xi in xis]
    verdicts = {p.verdict for p in profiles}
    if WFVerdict.IN_WFA in verdicts:
        v = AnalyticityVerdict.NOT_ANALYTIC
    elif verdicts == {WFVerdict.NOT_IN_WFA}:
        v = AnalyticityVerdict.ANALYTIC
    else:
        v = AnalyticityVerdict.INCONCLUSIVE
    return AnalyticityReport(float(x0), v, profiles)

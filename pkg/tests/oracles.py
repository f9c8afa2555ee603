"""Independent reference computations used by the test-suite.

Nothing here imports the package under test except for the plain data
containers needed to describe inputs.
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np

# ---------------------------------------------------------------------------
# FBI transform by brute-force high-precision quadrature

MP_PRESETS = {
    "gaussian": (lambda x: mp.exp(-x * x / 2), (-14, 14), ()),
    "lorentzian": (lambda x: 1 / (1 + x * x), (-60, 60), ()),
    "abs": (lambda x: abs(x), (-8, 8), (0,)),
    "step": (lambda x: mp.mpf(1) if x >= 0 else mp.mpf(0), (-8, 8), (0,)),
}


def mp_weighted_fbi(name, z, mu, guard_digits=20):
    """|exp(-(mu/2)(Im z)^2) Tf(z, mu)| by Gauss-Legendre mpmath quadrature."""
    return abs(mp_weighted_fbi_value(name, z, mu, guard_digits))


def mp_weighted_fbi_value(name, z, mu, guard_digits=20):
    """exp(-(mu/2)(Im z)^2) Tf(z, mu) by Gauss-Legendre mpmath quadrature.

    Working precision grows with the expected cancellation mu (Im z)^2 / 2 so
    exponentially small values are resolved rather than clamped.
    """
    f, (s_lo, s_hi), breaks = MP_PRESETS[name]
    a, b = float(z.real), float(-z.imag)
    dps = int(guard_digits + mu * b * b / (2 * math.log(10)))
    with mp.workdps(dps):
        mu_ = mp.mpf(mu)
        a_, b_ = mp.mpf(a), mp.mpf(b)
        W = mp.sqrt(2 * dps * mp.log(10) / mu_)
        lo, hi = max(mp.mpf(s_lo), a_ - W), min(mp.mpf(s_hi), a_ + W)
        if lo >= hi:
            return 0j
        per = min(mp.mpf("0.5"), 4 * mp.pi / (mu_ * abs(b_) + 1))
        n = int(mp.ceil((hi - lo) / per))
        pts = sorted({lo + (hi - lo) * k / n for k in range(n + 1)}
                     | {mp.mpf(c) for c in breaks if lo < c < hi})

        def g(x):
            return mp.exp(-mu_ / 2 * (a_ - x) ** 2 + 1j * mu_ * b_ * (a_ - x)) * f(x)
        return complex(mp.quad(g, pts, method="gauss-legendre"))


def disc(center, radius, n_ring=4):
    ang = 2 * np.pi * np.arange(n_ring) / n_ring
    return [complex(center)] + [complex(center + radius * np.exp(1j * t)) for t in ang]


def oracle_decay(name, x0, xi0, mu_grid, disc_radius=0.05):
    """Slope fit (against mu/2) of the log of the disc-maximised oracle magnitude.

    Uses the upper half of the grid, like the implementation, but with no
    noise floor: every value is resolved in extended precision.
    Returns (eps, rms residual, log magnitudes on the fitted points).
    """
    mu = np.asarray(mu_grid, dtype=float)
    upper = mu[mu.size // 2:]
    zs = disc(complex(x0, -xi0), disc_radius)
    logs = np.array([math.log(max(mp_weighted_fbi(name, z, m) for z in zs)) for m in upper])
    A = np.column_stack([upper / 2, np.ones_like(upper)])
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - logs) ** 2)))
    return float(-coef[0]), rms, logs


# phase-space corpus: (datum, x0, analytic there?)
WF_CORPUS = [
    ("gaussian", 0.0, True),
    ("gaussian", 1.0, True),
    ("lorentzian", 0.0, True),
    ("lorentzian", 1.5, True),
    ("abs", 0.0, False),
    ("abs", 1.0, True),
    ("step", 0.0, False),
    ("step", 1.0, True),
]


# ---------------------------------------------------------------------------
# Gaussian closed forms (completion of the square)

def gaussian_fbi(z, mu, Q=1.0):
    m = mu * Q
    return complex(mp.sqrt(2 * mp.pi / (m + 1)) * mp.exp(-m * mp.mpc(z) ** 2 / (2 * (m + 1))))


def gaussian_weighted_integral(alpha, beta, gamma):
    """int exp(-alpha x^2 + beta x + gamma) dx for Re alpha > 0 (complex beta, gamma)."""
    alpha, beta, gamma = mp.mpc(alpha), mp.mpc(beta), mp.mpc(gamma)
    return complex(mp.sqrt(mp.pi / alpha) * mp.exp(beta * beta / (4 * alpha) + gamma))

"""Calibrate the wavefront-set thresholds against a brute-force oracle.

For every phase-space point of the corpus the weighted FBI magnitude is
computed twice: by the package (double precision, noise-floor clamping) and
by extended-precision mpmath quadrature.  Both are reduced to a decay rate
eps (slope against mu/2 over the upper half of the default mu grid), and the
thresholds are read off the two tables:

    eps_flat = 3 x largest |eps| at a singular point
    eps_min  = half the smallest eps at an analytic point
    fit_tol  = 2 x largest fit residual at an analytic point

each rounded outward to two significant digits.

A second table fixes the floor for the conjugation decay check: the
exponential-plus-power fit is run on data that are singular exactly at the
evaluation point (so the true exponential rate is zero) for a range of
centers x0 - i b, and the floor is twice the largest fitted rate.

Run from the repository root:  python3 demos/calibrate_wavefront_thresholds.py
"""
import math
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import WF_CORPUS, oracle_decay  # noqa: E402
from transonic_lab.microlocal import Thresholds, decay_profile, default_mu_grid, load_datum  # noqa: E402
from transonic_lab import conjugation, microlocal  # noqa: E402
from transonic_lab.conjugation import est_basic_check  # noqa: E402
from transonic_lab.microlocal import Datum1D  # noqa: E402

SINGULAR_AT_ZERO = [
    load_datum("abs"),
    load_datum("step"),
    Datum1D(lambda x: np.abs(x) * np.exp(x), (-8.0, 8.0), (0.0,), "|x| e^x"),
    Datum1D(lambda x: np.sign(x) * np.cos(x) / (1 + x * x), (-8.0, 8.0), (0.0,), "sgn(x) cos(x)/(1+x^2)"),
    Datum1D(lambda x: np.maximum(x, 0.0) ** 2, (-2.0, 2.0), (0.0,), "max(x,0)^2"),
]
CENTER_DEPTHS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]


def round_sig(x, up=True):
    if x == 0:
        return 0.0
    e = math.floor(math.log10(abs(x))) - 1
    f = (math.ceil if up else math.floor)(x / 10**e)
    return f * 10**e


def main():
    mu = default_mu_grid()
    loose = Thresholds(eps_min=0.0, eps_flat=0.0, fit_tol=np.inf)
    rows = []
    t0 = time.time()
    for name, x0, analytic in WF_CORPUS:
        prof = decay_profile(load_datum(name), x0, 1.0, mu, thresholds=loose)
        eps_o, rms_o, _ = oracle_decay(name, x0, 1.0, mu)
        rows.append((name, x0, analytic, prof.eps_hat, prof.fit_residual, eps_o, rms_o))
        print(f"{name:10s} x0={x0:4.1f}  impl eps={prof.eps_hat:8.4f} rms={prof.fit_residual:6.3f}   "
              f"oracle eps={eps_o:8.4f} rms={rms_o:6.3f}", flush=True)
    sing = [max(abs(r[3]), abs(r[5])) for r in rows if not r[2]]
    ana = [min(r[3], r[5]) for r in rows if r[2]]
    res = [max(r[4], r[6]) for r in rows if r[2]]
    eps_flat = round_sig(3 * max(sing))
    eps_min = round_sig(0.5 * min(ana), up=False)
    fit_tol = round_sig(2 * max(res))
    print(f"\neps_flat = {eps_flat}   eps_min = {eps_min}   fit_tol = {fit_tol}")
    print(f"separation (min analytic / max singular) = {min(ana) / max(sing):.1f}")
    print(f"package constants: EPS_FLAT={microlocal.EPS_FLAT} EPS_MIN={microlocal.EPS_MIN} "
          f"FIT_TOL={microlocal.FIT_TOL}   ({time.time() - t0:.0f} s)")

    lines = ["| datum | x0 | analytic | eps (package) | rms (package) | eps (oracle) | rms (oracle) |",
             "|---|---|---|---|---|---|---|"]
    for name, x0, analytic, e, r, eo, ro in rows:
        lines.append(f"| {name} | {x0:g} | {'yes' if analytic else 'no'} | {e:.4f} | {r:.3f} | {eo:.4f} | {ro:.3f} |")
    print("\n" + "\n".join(lines))

    print("\nconjugation decay floor (exponential rate on data singular at the center)")
    worst = 0.0
    print("| datum | " + " | ".join(f"b={b:g}" for b in CENTER_DEPTHS) + " |")
    print("|---|" + "---|" * len(CENTER_DEPTHS))
    for f in SINGULAR_AT_ZERO:
        eps = [est_basic_check([f], [complex(0.0, -b)], floor=0.0).eps_hat[0] for b in CENTER_DEPTHS]
        worst = max(worst, max(eps))
        print(f"| {f.name} | " + " | ".join(f"{e:.5f}" for e in eps) + " |")
    print(f"\nfloor = {round_sig(2 * worst)}   package EST_BASIC_FLOOR={conjugation.EST_BASIC_FLOOR}")


if __name__ == "__main__":
    main()

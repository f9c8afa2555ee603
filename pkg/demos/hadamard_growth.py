"""High-frequency data and the elliptic Cauchy problem.

At the rest state the frozen system has eigenvalues +-i, so the mode
exp(i k (x - i t)) grows like e^{k t}.  Its L^2 mass over a shrinking
region Omega_r beats any fixed power of the data norm, whether the data are
measured in H^2 or in a Gevrey norm with sigma < 1/2.
"""
import math

import numpy as np

from transonic_lab.gasdyn import FlowState, GasModel
from transonic_lab.illposedness import (NormKind, NormSpec, growing_mode, growth_experiment,
                                        linearization_spot_check, modal_amplitude)

model = GasModel()
rest = FlowState(0.0, 0.0)
mode = growing_mode(rest, model)
print("lambda_+ =", mode.lam, " w_+ =", np.round(mode.w, 6))
print("amplitude at k=16, t=0.25:", modal_amplitude(rest, model, 16, 1.0, 0.25), "e^4 =", math.exp(4))

ks = [4, 8, 16, 32, 64]
for norm in (NormSpec(NormKind.SOBOLEV, s=2.0), NormSpec(NormKind.GEVREY, sigma=0.4, c=1.0)):
    rep = growth_experiment(rest, model, ks, alpha=0.5, norm=norm)
    print(norm.to_dict(), rep.verdict.value)
    for k, r, num, den, q in zip(rep.k, rep.r, rep.numerator, rep.denominator, rep.ratio):
        print(f"  k={k:4.0f} r={r:.3f} num={num:.4e} den={den:.4e} ratio={q:.4f}")

# r_k = k^{-1/2} caps the time extent of Omega_r at 1/k and so cancels the growth
rep = growth_experiment(rest, model, ks, r_rule=lambda k: k ** -0.5)
print("r_k = k^-1/2:", rep.verdict.value, np.round(rep.ratio, 4))

# how close the nonlinear solution stays to u* + v_k for small amplitudes
base = FlowState(0.0, 0.3)
amps = [1e-2, 1e-3, 1e-4]
print("nonlinear - linear at u*=(0, 0.3):", linearization_spot_check(base, model, 2.0, amps, 0.01, 0.05))

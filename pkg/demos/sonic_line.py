"""A nozzle-like velocity field that accelerates through the speed of sound.

The flow speed grows along x and the throat moves slightly with T.  Nodes are
classified as elliptic (subsonic) or hyperbolic (supersonic); the sonic line
is traced on the grid edges and compared with the exact crossing q = q*.
"""
import numpy as np

from transonic_lab.gasdyn import GasModel, VelocityField, classify_arrays, sonic_line

model = GasModel(1.4, 1.0)
print("sonic speed q* =", model.q_sonic)

x = np.linspace(-1.0, 1.0, 41)
T = np.linspace(0.0, 0.5, 6)
X, TT = np.meshgrid(x, T)
q = model.q_sonic * (1.0 + 0.4 * np.tanh(2.0 * (X - 0.3 * TT)))
theta = 0.1 * X                    # a little turning of the flow
field = VelocityField(x, T, q * np.sin(theta), q * np.cos(theta))

cls = classify_arrays(model, field.u1, field.u2)
for k in "EHS":
    print(k, int(np.sum(cls == k)))

# the exact crossing is where tanh vanishes: x = 0.3 T
edges = sonic_line(field, model)
for e in edges:
    print(f"T={e.T:.2f}  x_grid={e.x:+.5f}  x_exact={0.3 * e.T:+.5f}")
err = max(abs(e.x - 0.3 * e.T) for e in edges)
print("max crossing error", err, "grid spacing", x[1] - x[0])

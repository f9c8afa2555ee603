"""Steady isentropic irrotational Euler flow reduced to a 2x2 first-order system.

With T = x2 as evolution variable and x = x1 the velocity u = (u1, u2) obeys

    d/dT u + A(u) d/dx u = 0,

    A(u) = [[-2 u1 u2 / (c^2 - u1^2), (c^2 - u2^2) / (c^2 - u1^2)],
            [-1,                      0                          ]].

The pressure law is polytropic, p = rho**gamma / gamma (normalised so that
rho = 1 at rest).  Bernoulli's law then gives the closed forms

    c^2   = c0^2 - (gamma - 1) q^2 / 2
    rho   = (1 - (gamma - 1) q^2 / (2 c0^2)) ** (1 / (gamma - 1))

and the eigenvalue discriminant of A is 4 c^2 (q^2 - c^2) / (c^2 - u1^2)^2, so
the system is elliptic exactly where the flow is subsonic.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import DegenerateDirectionError, TransonicError, VacuumLimitError

DEFAULT_SONIC_TOL = 1e-9
DEGENERATE_TOL = 1e-12


class Regime(str, Enum):
    ELLIPTIC = "E"
    HYPERBOLIC = "H"
    SONIC = "S"


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4
    c0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 1.0):
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if not (math.isfinite(self.c0) and self.c0 > 0.0):
            raise ValueError(f"c0 must be > 0, got {self.c0}")

    @property
    def q_max(self) -> float:
        """Vacuum speed, where density and sound speed vanish."""
        return self.c0 * math.sqrt(2.0 / (self.gamma - 1.0))

    @property
    def q_sonic(self) -> float:
        """Speed at which q = c."""
        return self.c0 * math.sqrt(2.0 / (self.gamma + 1.0))

    def sonic_tol(self, tol: float | None = None) -> float:
        return DEFAULT_SONIC_TOL * self.c0**2 if tol is None else tol


@dataclass(frozen=True)
class FlowState:
    u1: float
    u2: float

    def __post_init__(self):
        if not (math.isfinite(self.u1) and math.isfinite(self.u2)):
            raise ValueError(f"non-finite velocity ({self.u1}, {self.u2})")

    @property
    def speed(self) -> float:
        return math.hypot(self.u1, self.u2)


def _check_speed(model: GasModel, q):
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("speed must be non-negative")
    if np.any(q >= model.q_max):
        raise VacuumLimitError(
            f"speed {np.max(q):.6g} reaches the vacuum limit q_max = {model.q_max:.6g}")
    return q


def sound_speed_sq_q(model: GasModel, q):
    """c^2 as a function of speed (vectorised)."""
    q = _check_speed(model, q)
    return model.c0**2 - 0.5 * (model.gamma - 1.0) * q * q


def density(model: GasModel, q):
    """Bernoulli density rho(q), normalised to rho(0) = 1."""
    q = _check_speed(model, q)
    base = 1.0 - 0.5 * (model.gamma - 1.0) * q * q / model.c0**2
    out = base ** (1.0 / (model.gamma - 1.0))
    return float(out) if out.ndim == 0 else out


def sound_speed(model: GasModel, state: FlowState) -> float:
    return math.sqrt(float(sound_speed_sq_q(model, state.speed)))


def mach(model: GasModel, state: FlowState) -> float:
    return state.speed / sound_speed(model, state)


def flux_matrix(model: GasModel, state: FlowState, tol: float = DEGENERATE_TOL) -> np.ndarray:
    """The real 2x2 matrix A(u) of the reduced system."""
    c2 = float(sound_speed_sq_q(model, state.speed))
    u1, u2 = state.u1, state.u2
    den = c2 - u1 * u1
    if abs(den) <= tol * model.c0**2:
        raise DegenerateDirectionError(
            f"c^2 - u1^2 = {den:.3e}: the T direction is characteristic at u = ({u1}, {u2})")
    return np.array([[-2.0 * u1 * u2 / den, (c2 - u2 * u2) / den],
                     [-1.0, 0.0]])


def flux_matrices(model: GasModel, u1, u2, tol: float = DEGENERATE_TOL) -> np.ndarray:
    """Vectorised flux_matrix; returns an array of shape (..., 2, 2)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    c2 = sound_speed_sq_q(model, np.hypot(u1, u2))
    den = c2 - u1 * u1
    if np.any(np.abs(den) <= tol * model.c0**2):
        raise DegenerateDirectionError("c^2 - u1^2 vanishes for some state")
    out = np.empty(u1.shape + (2, 2))
    out[..., 0, 0] = -2.0 * u1 * u2 / den
    out[..., 0, 1] = (c2 - u2 * u2) / den
    out[..., 1, 0] = -1.0
    out[..., 1, 1] = 0.0
    return out


def classify_arrays(model: GasModel, u1, u2, tol: float | None = None) -> np.ndarray:
    """Regime codes ('E', 'H', 'S') for arrays of velocities."""
    tol = model.sonic_tol(tol)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    q2 = u1 * u1 + u2 * u2
    g = q2 - sound_speed_sq_q(model, np.sqrt(q2))
    out = np.full(g.shape, Regime.SONIC.value, dtype="<U1")
    out[g < -tol] = Regime.ELLIPTIC.value
    out[g > tol] = Regime.HYPERBOLIC.value
    return out


def classify(model: GasModel, state: FlowState, tol: float | None = None) -> Regime:
    return Regime(str(classify_arrays(model, state.u1, state.u2, tol)))


# ---------------------------------------------------------------------------
# gridded data


@dataclass
class VelocityField:
    """Velocities on a rectangular (T, x) grid; u1, u2 have shape (len(T), len(x))."""

    x: np.ndarray
    T: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    rows: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        for name, ax in (("x", self.x), ("T", self.T)):
            if ax.ndim != 1 or ax.size < 2:
                raise ValueError(f"{name} axis needs at least 2 nodes")
            if np.any(np.diff(ax) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing")
        shape = (self.T.size, self.x.size)
        if self.u1.shape != shape or self.u2.shape != shape:
            raise ValueError(f"velocity arrays must have shape {shape}")
        if not (np.all(np.isfinite(self.u1)) and np.all(np.isfinite(self.u2))):
            raise ValueError("velocity field contains non-finite values")

    def classify(self, model: GasModel, tol: float | None = None) -> np.ndarray:
        return classify_arrays(model, self.u1, self.u2, tol)


@dataclass(frozen=True)
class SonicEdge:
    """Grid edge whose endpoints lie on opposite sides of the sonic line."""

    a: tuple[int, int]
    b: tuple[int, int]
    T: float
    x: float
    q_a: float
    q_b: float


def sonic_line(field: VelocityField, model: GasModel, tol: float | None = None) -> list[SonicEdge]:
    """All grid edges joining an elliptic node to a hyperbolic node.

    The crossing location is the linear interpolant of q^2 - c^2 along the edge.
    """
    q2 = field.u1**2 + field.u2**2
    g = q2 - sound_speed_sq_q(model, np.sqrt(q2))
    cls = field.classify(model, tol)
    q = np.sqrt(q2)
    edges = []
    nT, nx = cls.shape
    for i in range(nT):
        for j in range(nx):
            for di, dj in ((0, 1), (1, 0)):
                k, l = i + di, j + dj
                if k >= nT or l >= nx:
                    continue
                if {cls[i, j], cls[k, l]} != {"E", "H"}:
                    continue
                s = g[i, j] / (g[i, j] - g[k, l])
                T = field.T[i] + s * (field.T[k] - field.T[i])
                x = field.x[j] + s * (field.x[l] - field.x[j])
                edges.append(SonicEdge((i, j), (k, l), float(T), float(x),
                                       float(q[i, j]), float(q[k, l])))
    return edges


class FieldFormatError(TransonicError, ValueError):
    """Malformed velocity-field CSV; `problems` lists (row number, message) pairs."""

    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        super().__init__("; ".join(f"row {r}: {m}" for r, m in problems[:10]))


def read_field_csv(path, model: GasModel | None = None) -> VelocityField:
    """Load a `x,T,u1,u2` CSV (one row per node, any order, full grid required).

    Row numbers in diagnostics count the header as row 1.  When `model` is
    given, states at or beyond the vacuum speed are reported as errors.
    """
    problems: list[tuple[int, str]] = []
    recs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "T", "u1", "u2"]:
            raise FieldFormatError([(1, f"expected header x,T,u1,u2, got {header}")])
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                problems.append((rowno, f"expected 4 columns, got {len(row)}"))
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                problems.append((rowno, f"non-numeric entry in {row}"))
                continue
            if not all(math.isfinite(v) for v in vals):
                problems.append((rowno, "non-finite entry"))
                continue
            if model is not None and math.hypot(vals[2], vals[3]) >= model.q_max:
                problems.append((rowno, "inadmissible state: speed at or beyond vacuum limit"))
                continue
            recs.append((rowno, *vals))
    if problems:
        raise FieldFormatError(problems)
    if not recs:
        raise FieldFormatError([(2, "no data rows")])
    arr = np.array([r[1:] for r in recs])
    xs = np.unique(arr[:, 0])
    Ts = np.unique(arr[:, 1])
    u1 = np.full((Ts.size, xs.size), np.nan)
    u2 = np.full_like(u1, np.nan)
    rows = np.zeros(u1.shape, dtype=int)
    ix = np.searchsorted(xs, arr[:, 0])
    iT = np.searchsorted(Ts, arr[:, 1])
    for k, (i, j) in enumerate(zip(iT, ix)):
        if not np.isnan(u1[i, j]):
            problems.append((recs[k][0], f"duplicate node (x={xs[j]}, T={Ts[i]})"))
        u1[i, j], u2[i, j] = arr[k, 2], arr[k, 3]
        rows[i, j] = recs[k][0]
    missing = np.argwhere(np.isnan(u1))
    for i, j in missing[:10]:
        problems.append((0, f"missing node (x={xs[j]}, T={Ts[i]})"))
    if problems:
        raise FieldFormatError(problems)
    return VelocityField(xs, Ts, u1, u2, rows=rows)


def iter_classification_rows(field: VelocityField, cls: np.ndarray) -> Iterable[tuple[float, float, str]]:
    for i, T in enumerate(field.T):
        for j, x in enumerate(field.x):
            yield float(x), float(T), str(cls[i, j])

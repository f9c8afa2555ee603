"""Closed-form eigen-decomposition of 2x2 matrices and eigenpair continuation.

Eigenvalues come from the quadratic formula with the principal complex square
root, so for a real matrix with complex spectrum ``lambda_plus`` is the root
with positive imaginary part; for real spectrum it is the larger root.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import MultiplicityError

DEFECT_TOL = 1e-12


@dataclass(frozen=True)
class EigenDecomposition:
    lambda_plus: complex
    lambda_minus: complex
    S: np.ndarray
    S_inv: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag([self.lambda_plus, self.lambda_minus])

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([self.lambda_plus, self.lambda_minus])


def quadratic_eigenvalues(A) -> tuple[complex, complex, complex]:
    """Return (lambda_plus, lambda_minus, discriminant) of a 2x2 matrix."""
    a, b, c, d = A[0][0], A[0][1], A[1][0], A[1][1]
    tr = a + d
    disc = complex(tr * tr - 4.0 * (a * d - b * c))
    root = np.sqrt(disc)
    return (tr + root) / 2.0, (tr - root) / 2.0, disc


def unit_eigenvector(A, lam) -> np.ndarray:
    """Unit eigenvector for `lam`, first nonzero component real and positive."""
    a, b, c, d = (complex(v) for v in (A[0][0], A[0][1], A[1][0], A[1][1]))
    # two candidate null vectors of A - lam I; keep the better conditioned one
    v1 = np.array([b, lam - a])
    v2 = np.array([lam - d, c])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        # A = lam I: every vector is an eigenvector
        v, nrm = np.array([1.0 + 0j, 0.0]), 1.0
    v = v / nrm
    k = 0 if abs(v[0]) > 1e-14 else 1
    return v * (abs(v[k]) / v[k])


def eigen_decompose(A, tol: float = DEFECT_TOL) -> EigenDecomposition:
    A = np.asarray(A)
    if A.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {A.shape}")
    lp, lm, disc = quadratic_eigenvalues(A)
    scale = np.max(np.abs(A)) ** 2
    if abs(disc) <= tol * scale:
        raise MultiplicityError(
            f"eigenvalues are not distinct: |tr^2 - 4 det| = {abs(disc):.3e}")
    S = np.column_stack([unit_eigenvector(A, lp), unit_eigenvector(A, lm)])
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    S_inv = np.array([[S[1, 1], -S[0, 1]], [-S[1, 0], S[0, 0]]]) / det
    return EigenDecomposition(complex(lp), complex(lm), S, S_inv)


def discriminants(As: np.ndarray) -> np.ndarray:
    """tr^2 - 4 det for a stack of 2x2 matrices of shape (..., 2, 2)."""
    tr = As[..., 0, 0] + As[..., 1, 1]
    det = As[..., 0, 0] * As[..., 1, 1] - As[..., 0, 1] * As[..., 1, 0]
    return tr * tr - 4.0 * det


# ---------------------------------------------------------------------------
# continuation along a parameter path


@dataclass
class EigenBranch:
    t: np.ndarray
    values: np.ndarray
    vectors: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re", "im"])
            for t, lam in zip(self.t, self.values):
                w.writerow([f"{t:.17g}", f"{lam.real:.17g}", f"{lam.imag:.17g}"])


@dataclass
class BranchTracking:
    branches: tuple[EigenBranch, EigenBranch]
    clusters: list[int] = field(default_factory=list)
    tie_breaks: list[int] = field(default_factory=list)

    @property
    def cluster_parameters(self) -> np.ndarray:
        return self.branches[0].t[self.clusters]


def _phase_align(prev, v):
    ov = np.vdot(prev, v)
    if abs(ov) == 0.0:
        return v
    return v * (abs(ov) / ov).conjugate()


def track_eigenpairs(ts, matrices, cluster_tol: float = 1e-8, tie_tol: float = 1e-12) -> BranchTracking:
    """Follow both eigenpairs of a sampled 2x2 matrix path.

    Consecutive samples are matched by minimal total eigenvalue displacement;
    equal displacements are resolved by eigenvector overlap with the last
    sample at which the spectrum was simple.  Samples where the eigenvalues
    coincide to within ``cluster_tol * max(1, |A|)`` are reported as clusters.
    """
    ts = np.asarray(ts, dtype=float)
    mats = np.asarray(matrices)
    if mats.shape != (ts.size, 2, 2):
        raise ValueError("matrices must have shape (len(ts), 2, 2)")
    n = ts.size
    vals = np.empty((n, 2), dtype=complex)
    vecs = np.empty((n, 2, 2), dtype=complex)
    clusters, ties = [], []
    ref_vecs = None
    for j in range(n):
        A = mats[j]
        lp, lm, _ = quadratic_eigenvalues(A)
        cand = np.array([lp, lm])
        cvec = np.array([unit_eigenvector(A, lp), unit_eigenvector(A, lm)])
        simple = abs(lp - lm) > cluster_tol * max(1.0, np.max(np.abs(A)))
        if not simple:
            clusters.append(j)
        if j > 0:
            keep = abs(cand[0] - vals[j - 1, 0]) + abs(cand[1] - vals[j - 1, 1])
            swap = abs(cand[1] - vals[j - 1, 0]) + abs(cand[0] - vals[j - 1, 1])
            if abs(keep - swap) <= tie_tol * max(1.0, keep):
                ties.append(j)
                ref = ref_vecs if ref_vecs is not None else vecs[j - 1]
                ov_keep = abs(np.vdot(ref[0], cvec[0])) + abs(np.vdot(ref[1], cvec[1]))
                ov_swap = abs(np.vdot(ref[0], cvec[1])) + abs(np.vdot(ref[1], cvec[0]))
                do_swap = ov_swap > ov_keep
            else:
                do_swap = swap < keep
            if do_swap:
                cand = cand[::-1]
                cvec = cvec[::-1]
            cvec = np.array([_phase_align(vecs[j - 1, k], cvec[k]) for k in range(2)])
        vals[j] = cand
        vecs[j] = cvec
        if simple:
            ref_vecs = cvec
    branches = tuple(EigenBranch(ts.copy(), vals[:, k].copy(), vecs[:, k].copy()) for k in range(2))
    return BranchTracking(branches, clusters, ties)

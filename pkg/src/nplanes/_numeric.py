"""Small shared numerical helpers (projective normalization, norms)."""

from __future__ import annotations

import numpy as np

from .errors import UsageError

# Default decision thresholds.  Algebraic-identity residuals are judged at
# ALGEBRAIC_TOL, rank/intersection decisions at RANK_TOL; both can be
# overridden per call where it matters.
ALGEBRAIC_TOL = 1e-9
RANK_TOL = 1e-8


def phase_normalize(a: np.ndarray) -> np.ndarray:
    """Scale a nonzero array so its largest-modulus entry becomes 1.0.

    The entry chosen is the first one attaining the maximum modulus in
    C-order, which fixes both the scale and the phase deterministically:
    projectively equal inputs map to (numerically) equal outputs.
    """
    a = np.asarray(a, dtype=complex)
    flat = np.abs(a).ravel()
    i = int(np.argmax(flat))
    pivot = a.ravel()[i]
    if flat[i] == 0.0 or not np.isfinite(flat[i]):
        raise UsageError("cannot phase-normalize a zero or non-finite array")
    return a / pivot


def unitize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise UsageError("cannot normalize the zero vector")
    return v / nrm


def chordal_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Distance between the projective points [p], [q].

    Convention: d(p, q) = min_phi ||p/|p| - e^{i phi} q/|q||| / sqrt(2)
    = sqrt(1 - |<p, q>|), which is 0 iff [p] = [q] and 1 for orthogonal
    representatives.
    """
    p = unitize(p).ravel()
    q = unitize(q).ravel()
    ip = abs(np.vdot(p, q))
    return float(np.sqrt(max(0.0, 1.0 - min(ip, 1.0))))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex), ord=2))


def smallest_singular_value(a: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    return float(s[-1])


def point_plane_distance(z: np.ndarray, ortho_basis: np.ndarray) -> float:
    """sin of the principal angle between the line [z] and the span of the
    (orthonormal) columns of ``ortho_basis``."""
    z = unitize(z)
    proj = ortho_basis @ (ortho_basis.conj().T @ z)
    return float(np.linalg.norm(z - proj))

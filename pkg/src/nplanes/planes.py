"""n-planes in P^(2n+1): Pluecker vector / spanning basis / graph form,
intersection tests, point sampling, and the plane metric used as the
convergence gauge.

Coordinates are ordered z = (z_0, ..., z_n, z_{n+1}, ..., z_{2n+1}) with
z' the first n+1 and z'' the last n+1 entries; a graph matrix X describes
the plane {z' = X z''}.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ._numeric import RANK_TOL, chordal_distance, phase_normalize, point_plane_distance
from .errors import DegenerateSubspaceError, UsageError
from .exterior import plucker_of_subspace, q_form, wedge_with

# A freshly built plane should sit on the quadric to much better than the
# decision tolerance; from_plucker gates on this.
QUADRIC_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class NPlane:
    """An n-plane, carried redundantly as a normalized Pluecker vector, an
    orthonormal spanning basis (columns), and, when the plane is transverse
    to {z'' = 0}, the graph matrix X of {z' = X z''}."""

    plucker: np.ndarray
    basis: np.ndarray
    n: int
    graph: np.ndarray | None = None

    def __post_init__(self):
        self.plucker.flags.writeable = False
        self.basis.flags.writeable = False
        if self.graph is not None:
            self.graph.flags.writeable = False

    @classmethod
    def from_basis(cls, basis: np.ndarray, rank_tol: float = RANK_TOL) -> "NPlane":
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != 2 * basis.shape[1]:
            raise UsageError(f"basis must be (2n+2) x (n+1), got {basis.shape}")
        n = basis.shape[1] - 1
        p = phase_normalize(plucker_of_subspace(basis, rank_tol=rank_tol))
        q, _ = np.linalg.qr(basis)
        return cls(plucker=p, basis=q, n=n, graph=_graph_from_basis(q))

    @classmethod
    def from_graph(cls, x: np.ndarray) -> "NPlane":
        x = np.asarray(x, dtype=complex)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise UsageError(f"graph matrix must be square, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise UsageError("graph matrix must be finite")
        k = x.shape[0]
        basis = np.vstack([x, np.eye(k, dtype=complex)])
        plane = cls.from_basis(basis)
        # the exact graph is known here; keep it rather than the re-solved one
        object.__setattr__(plane, "graph", x.copy())
        plane.graph.flags.writeable = False
        return plane

    @classmethod
    def from_plucker(cls, p: np.ndarray, residual_tol: float = QUADRIC_RESIDUAL_TOL) -> "NPlane":
        """Recover the plane from (near-)decomposable Pluecker coordinates.

        The subspace is the kernel of v -> v ^ p; a non-decomposable input
        has no such kernel of the right dimension and is rejected.
        """
        p = np.asarray(p, dtype=complex).ravel()
        m = _m_from_plucker_length(len(p))
        res = abs(q_form(p, p, m=m)) / float(np.vdot(p, p).real)
        if res > residual_tol:
            raise DegenerateSubspaceError(
                f"vector is off the quadric (|Q(p,p)|/|p|^2 = {res:.2e}); not a plane"
            )
        w = wedge_with(p, m)
        _, s, vh = np.linalg.svd(w)
        # v ^ p kills exactly the m-dimensional subspace of a decomposable p:
        # the last m singular values vanish, the first m do not
        if s[m - 1] <= 1e-6 * s[0] or s[m] > 1e-6 * s[0]:
            raise DegenerateSubspaceError(
                "kernel of the wedge map does not have the dimension of a plane; "
                "vector is not decomposable"
            )
        basis = vh[m:].conj().T
        plane = cls.from_basis(basis)
        # keep the caller's (normalized) coordinates; they agree with the
        # recomputed ones up to roundoff and phase
        object.__setattr__(plane, "plucker", phase_normalize(p))
        plane.plucker.flags.writeable = False
        return plane

    def quadric_residual(self) -> float:
        p = self.plucker
        return abs(q_form(p, p)) / float(np.vdot(p, p).real)

    def contains_point(self, z: np.ndarray, tol: float = 1e-8) -> bool:
        return point_plane_distance(np.asarray(z, dtype=complex), self.basis) <= tol


def _m_from_plucker_length(length: int) -> int:
    for m in range(2, 7):
        if comb(2 * m, m) == length:
            return m
    raise UsageError(f"Pluecker vector length {length} is not C(2m, m) for m in 2..6")


def _graph_from_basis(basis: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray | None:
    k = basis.shape[1]
    lower = basis[k:, :]
    s = np.linalg.svd(lower, compute_uv=False)
    if s[-1] <= rank_tol * max(s[0], 1e-300):
        return None
    upper = basis[:k, :]
    return upper @ np.linalg.inv(lower)


def graph_to_plucker(x: np.ndarray) -> NPlane:
    """The plane {z' = X z''}."""
    return NPlane.from_graph(x)


def plucker_to_graph(plane: NPlane) -> np.ndarray | None:
    """Graph matrix of the plane, or None when it is non-transverse to
    {z'' = 0} (a marker, not an error)."""
    return plane.graph


def planes_intersect(l1: NPlane, l2: NPlane, tol: float = RANK_TOL) -> bool:
    """True iff the planes meet: |Q(p1, p2)| <= tol * |p1| * |p2|."""
    if l1.n != l2.n:
        raise UsageError(f"planes live in different spaces: n={l1.n} vs n={l2.n}")
    p1, p2 = l1.plucker, l2.plucker
    scale = float(np.linalg.norm(p1) * np.linalg.norm(p2))
    return abs(q_form(p1, p2)) <= tol * scale


def sample_points(plane: NPlane, count: int, seed: int) -> list[np.ndarray]:
    """Deterministic points on the plane: basis @ u with u drawn from the
    unit sphere of C^(n+1) by a seeded generator."""
    if count < 1:
        raise UsageError("count must be >= 1")
    rng = np.random.default_rng(seed)
    k = plane.n + 1
    coeff = rng.standard_normal((count, k)) + 1j * rng.standard_normal((count, k))
    coeff /= np.linalg.norm(coeff, axis=1, keepdims=True)
    return [phase_normalize(plane.basis @ c) for c in coeff]


@dataclass(frozen=True)
class PlaneDistance:
    """Chordal distance between normalized Pluecker vectors (ambient P^N
    metric); zero iff the planes coincide projectively."""

    value: float

    def __float__(self) -> float:
        return self.value


def plane_distance(l1: NPlane, l2: NPlane) -> PlaneDistance:
    if l1.n != l2.n:
        raise UsageError(f"planes live in different spaces: n={l1.n} vs n={l2.n}")
    return PlaneDistance(chordal_distance(l1.plucker, l2.plucker))

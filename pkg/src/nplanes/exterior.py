"""Multiindex combinatorics, sign tables, compound (minor) matrices, the
invariant bilinear form on m-vector coordinates, and Pluecker coordinates.

All coordinate vectors of length C(2m, m) are indexed by the m-element
subsets of {1, ..., 2m} in lexicographic order.  The half-dimension m is
n + 1 when working with n-planes in P^(2n+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from ._numeric import RANK_TOL
from .errors import DegenerateSubspaceError, DimensionCapError, UsageError

M_MIN = 2
# C(12, 6) = 924 coordinates; dense minor tables above m = 6 are impractical.
M_MAX = 6


@dataclass(frozen=True)
class MultiIndex:
    """A strictly increasing m-subset of {1, ..., 2m}."""

    entries: tuple[int, ...]
    m: int

    def __post_init__(self):
        e = self.entries
        if len(e) != self.m:
            raise UsageError(f"multiindex needs exactly m={self.m} entries, got {len(e)}")
        if any(e[i] >= e[i + 1] for i in range(len(e) - 1)):
            raise UsageError(f"multiindex entries must be strictly increasing: {e}")
        if e[0] < 1 or e[-1] > 2 * self.m:
            raise UsageError(f"multiindex entries must lie in 1..{2 * self.m}: {e}")

    def complement(self) -> "MultiIndex":
        full = set(range(1, 2 * self.m + 1))
        return MultiIndex(tuple(sorted(full - set(self.entries))), self.m)

    def rows(self) -> tuple[int, ...]:
        """0-based row/column indices for slicing matrices."""
        return tuple(i - 1 for i in self.entries)


def _check_m(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or not (M_MIN <= m <= M_MAX):
        raise DimensionCapError(f"half-dimension m must be an integer in {M_MIN}..{M_MAX}, got {m!r}")


@lru_cache(maxsize=None)
def enumerate_multiindices(m: int) -> tuple[MultiIndex, ...]:
    """All m-subsets of {1, ..., 2m} in lexicographic order."""
    _check_m(m)
    return tuple(MultiIndex(c, m) for c in combinations(range(1, 2 * m + 1), m))


def multiindex_position(idx: MultiIndex) -> int:
    return _position_table(idx.m)[idx.entries]


@lru_cache(maxsize=None)
def _position_table(m: int) -> dict[tuple[int, ...], int]:
    return {mi.entries: j for j, mi in enumerate(enumerate_multiindices(m))}


def sign_delta(j_idx: MultiIndex, k_idx: MultiIndex) -> int:
    """The sign delta_{JK}: 0 on overlapping J, K, else (-1)^nu with
    nu = #{(p, q) in J x K : p > q}, so that e_J ^ e_K = delta_{JK} e_1..e_2m."""
    if j_idx.m != k_idx.m:
        raise UsageError(f"multiindex dimensions differ: {j_idx.m} vs {k_idx.m}")
    if set(j_idx.entries) & set(k_idx.entries):
        return 0
    nu = sum(1 for p in j_idx.entries for q in k_idx.entries if p > q)
    return -1 if nu % 2 else 1


@lru_cache(maxsize=None)
def _pairing_table(m: int) -> tuple[np.ndarray, np.ndarray]:
    """(comp, sign): comp[j] is the position of the complement of the j-th
    multiindex, sign[j] = delta_{J, J^c}."""
    table = enumerate_multiindices(m)
    pos = _position_table(m)
    comp = np.empty(len(table), dtype=np.intp)
    sign = np.empty(len(table), dtype=np.int64)
    for j, mi in enumerate(table):
        mc = mi.complement()
        comp[j] = pos[mc.entries]
        sign[j] = sign_delta(mi, mc)
    return comp, sign


@lru_cache(maxsize=None)
def _m_for_length(length: int) -> int:
    for m in range(M_MIN, M_MAX + 1):
        if comb(2 * m, m) == length:
            return m
    raise UsageError(f"vector length {length} is not C(2m, m) for any m in {M_MIN}..{M_MAX}")


@dataclass(frozen=True)
class QuadricForm:
    """The bilinear form Q(z, w) = delta_{JK} z^J w^K for half-dimension m."""

    m: int

    @property
    def dim(self) -> int:
        return comb(2 * self.m, self.m)

    def matrix(self) -> np.ndarray:
        """Dense matrix D with Q(z, w) = z^T D w (a signed permutation)."""
        comp, sign = _pairing_table(self.m)
        d = np.zeros((self.dim, self.dim), dtype=np.int64)
        d[np.arange(self.dim), comp] = sign
        return d

    def __call__(self, z: np.ndarray, w: np.ndarray) -> complex:
        return q_form(z, w, m=self.m)


def q_form(z: np.ndarray, w: np.ndarray, m: int | None = None) -> complex:
    """Q(z, w) = delta_{JK} z^J w^K; satisfies Q(z, w) = (-1)^m Q(w, z)."""
    z = np.asarray(z, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    if z.shape != w.shape:
        raise UsageError(f"Q needs vectors of equal length, got {z.shape} and {w.shape}")
    if m is None:
        m = _m_for_length(len(z))
    elif comb(2 * m, m) != len(z):
        raise UsageError(f"vector length {len(z)} does not match m={m}")
    comp, sign = _pairing_table(m)
    return complex(np.sum(sign * z * w[comp]))


def q_form_batch(z: np.ndarray, w: np.ndarray, m: int) -> np.ndarray:
    """Q applied along the last axis of broadcast-compatible stacks."""
    comp, sign = _pairing_table(m)
    return np.sum(sign * z * w[..., comp], axis=-1)


@dataclass(frozen=True)
class CompoundMatrix:
    """Matrix of all m x m minors of a 2m x 2m matrix, acting on m-vector
    coordinates; entry (K, J) is the minor with rows K and columns J."""

    entries: np.ndarray
    source_det: complex
    m: int

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        if isinstance(other, CompoundMatrix):
            return self.entries @ other.entries
        return self.entries @ other


@lru_cache(maxsize=None)
def _rowset_array(m: int) -> np.ndarray:
    """(N+1, m) array of 0-based row indices, one row per multiindex."""
    return np.array([mi.rows() for mi in enumerate_multiindices(m)], dtype=np.intp)


def _all_minors(a: np.ndarray, m: int) -> np.ndarray:
    """(N+1, N+1) array of m x m minors of the 2m x 2m matrix ``a``:
    entry (K, J) uses rows K, columns J."""
    rows = _rowset_array(m)
    npl = rows.shape[0]
    out = np.empty((npl, npl), dtype=complex)
    # One batched determinant call per column set keeps memory flat even at m=6.
    for j in range(npl):
        sub = a[:, rows[j]]          # (2m, m)
        stacked = sub[rows, :]       # (N+1, m, m): rows K, columns J
        out[:, j] = np.linalg.det(stacked)
    return out


def compound(a: np.ndarray) -> CompoundMatrix:
    """The action of ``a`` on m-vector coordinates (all m x m minors)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise UsageError(f"compound needs a square 2m x 2m matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise UsageError("compound needs finite entries")
    m = a.shape[0] // 2
    _check_m(m)
    return CompoundMatrix(_all_minors(a, m), complex(np.linalg.det(a)), m)


def adjugate_compound(a: np.ndarray) -> CompoundMatrix:
    """The adjugate compound: (A*)^I_J = delta^{IK} delta_{LJ} A^L_K, so that
    A* A = (det A) I and Q(A z, w) = Q(z, A* w)."""
    hat = compound(a)
    comp, sign = _pairing_table(hat.m)
    # delta^{I K} is nonzero only at K = I^c with value delta_{I^c, I};
    # delta_{L J} only at L = J^c with value delta_{J^c, J}.
    t = np.empty(hat.dim, dtype=np.int64)
    t[comp] = sign  # t[i] = delta_{I^c, I}
    star = (t[:, None] * t[None, :]) * hat.entries.T[np.ix_(comp, comp)]
    return CompoundMatrix(star, hat.source_det, hat.m)


def plucker_of_subspace(basis: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Pluecker coordinates of the column span of a 2m x m matrix: the
    component at K is the m x m minor with rows K.  The result satisfies
    Q(x, x) = 0."""
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != 2 * basis.shape[1]:
        raise UsageError(f"spanning matrix must be 2m x m, got shape {basis.shape}")
    m = basis.shape[1]
    _check_m(m)
    s = np.linalg.svd(basis, compute_uv=False)
    if s[-1] <= rank_tol * s[0]:
        raise DegenerateSubspaceError(
            f"spanning matrix is numerically rank-deficient (sigma ratio {s[-1] / s[0]:.2e})"
        )
    rows = _rowset_array(m)
    return np.linalg.det(basis[rows, :])


def plucker_of_bases(bases: np.ndarray) -> np.ndarray:
    """Vectorized ``plucker_of_subspace`` over a (W, 2m, m) stack; no rank
    check is performed."""
    bases = np.asarray(bases, dtype=complex)
    m = bases.shape[2]
    rows = _rowset_array(m)
    npl = rows.shape[0]
    out = np.empty((bases.shape[0], npl), dtype=complex)
    for k in range(npl):
        out[:, k] = np.linalg.det(bases[:, rows[k], :])
    return out


@lru_cache(maxsize=None)
def _lift_positions(m: int) -> tuple[dict[tuple[int, ...], int], int]:
    lifted = list(combinations(range(1, 2 * m + 1), m + 1))
    return {c: j for j, c in enumerate(lifted)}, len(lifted)


def wedge_with(w: np.ndarray, m: int) -> np.ndarray:
    """Matrix of v -> v ^ w from C^(2m) to (m+1)-vector coordinates.

    Its kernel recovers the subspace of a decomposable w.
    """
    w = np.asarray(w, dtype=complex).ravel()
    pos_lift, n_lift = _lift_positions(m)
    table = enumerate_multiindices(m)
    out = np.zeros((n_lift, 2 * m), dtype=complex)
    for j, mi in enumerate(table):
        if w[j] == 0:
            continue
        for i in range(1, 2 * m + 1):
            if i in mi.entries:
                continue
            below = sum(1 for e in mi.entries if e < i)
            sgn = -1.0 if below % 2 else 1.0
            lifted = tuple(sorted(mi.entries + (i,)))
            out[pos_lift[lifted], i - 1] += sgn * w[j]
    return out

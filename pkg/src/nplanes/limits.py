"""Limits of normalized matrix sequences, extraction of limit n-planes via
compound matrices, limit-set point clouds, and orbit convergence
diagnostics.

A sequence is treated as convergent when its normalized representatives are
numerically Cauchy; subsequence extraction is not computable from finite
data, so non-Cauchy input yields an "undecided" outcome instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numeric import phase_normalize, point_plane_distance
from .errors import (ConvergenceUndecidedError, EnumerationBudgetError,
                     NotALimitPlaneError, UsageError)
from .exterior import compound, q_form
from .groups import GroupSpec, ProjectiveMap, enumerate_words
from .planes import NPlane, plane_distance, sample_points

CAUCHY_TOL = 1e-8
RANK_REL_TOL = 1e-8
RANK1_GAP_TOL = 1e-6


@dataclass
class SequenceLimit:
    """Limit data of a normalized matrix sequence."""

    limit_matrix: np.ndarray
    numerical_rank: int
    image_basis: np.ndarray     # orthonormal columns spanning the limit image
    kernel_basis: np.ndarray    # orthonormal columns spanning the limit kernel
    converged: bool
    gap: float                  # sigma_r / sigma_{r+1}
    diffs: np.ndarray = field(default_factory=lambda: np.zeros(0))


def sequence_limit(mats: list[np.ndarray], cauchy_tol: float = CAUCHY_TOL,
                   rank_tol: float = RANK_REL_TOL) -> SequenceLimit:
    """Limit of a list of (already normalized) matrices.

    The last element is taken as the limit; ``converged`` is true when the
    consecutive max-entry differences have dropped below ``cauchy_tol`` over
    the final steps.  Rank counts singular values above rank_tol * sigma_max.
    """
    if len(mats) < 2:
        raise UsageError("need at least 2 matrices")
    stack = [np.asarray(m, dtype=complex) for m in mats]
    diffs = np.array([float(np.max(np.abs(b - a))) for a, b in zip(stack, stack[1:])])
    tail = diffs[-3:] if len(diffs) >= 3 else diffs
    converged = bool(np.max(tail) <= cauchy_tol)
    limit = stack[-1]
    u, s, vh = np.linalg.svd(limit)
    dim = limit.shape[0]
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    if 0 < rank < dim:
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else float("inf")
    else:
        gap = float("inf")
    return SequenceLimit(
        limit_matrix=limit,
        numerical_rank=rank,
        image_basis=u[:, :rank],
        kernel_basis=vh[rank:].conj().T,
        converged=converged,
        gap=gap,
        diffs=diffs,
    )


@dataclass
class LimitPlaneResult:
    plane: NPlane
    residual_on_quadric: float
    rank1_gap: float


def limit_nplane(seq: list[ProjectiveMap], cauchy_tol: float = CAUCHY_TOL,
                 rank1_gap_tol: float = RANK1_GAP_TOL) -> LimitPlaneResult:
    """Limit plane of a sequence of group elements, through the compound
    route: normalize the minor matrices, take the sequence limit, and demand
    a rank-1 limit whose image direction sits on the quadric.

    Raises NotALimitPlaneError when the compound limit has rank > 1 (the
    sequence is not converging to a single plane) and
    ConvergenceUndecidedError when the tail is not Cauchy.
    """
    if len(seq) < 8:
        raise UsageError("need at least 8 maps to judge a limit")
    hats = [phase_normalize(compound(g.rep).entries) for g in seq]
    lim = sequence_limit(hats, cauchy_tol=cauchy_tol)
    if not lim.converged:
        raise ConvergenceUndecidedError(
            "compound sequence is not numerically Cauchy", diffs=lim.diffs)
    s = np.linalg.svd(lim.limit_matrix, compute_uv=False)
    second_ratio = float(s[1] / s[0]) if s[0] > 0 else float("inf")
    if lim.numerical_rank != 1 or second_ratio >= rank1_gap_tol:
        raise NotALimitPlaneError(
            f"compound limit has numerical rank {lim.numerical_rank} "
            f"(sigma_2/sigma_1 = {second_ratio:.2e}); no single limit plane",
            rank=lim.numerical_rank, gap=second_ratio)
    p = phase_normalize(lim.image_basis[:, 0])
    plane = NPlane.from_plucker(p)
    return LimitPlaneResult(
        plane=plane,
        residual_on_quadric=abs(q_form(p, p)) / float(np.vdot(p, p).real),
        rank1_gap=second_ratio,
    )


def power_sequence(g: ProjectiveMap, count: int, tail: int = 12) -> list[ProjectiveMap]:
    """The last ``tail`` of the maps g, g^2, ..., g^count (normalized at
    every step)."""
    if count < 1:
        raise UsageError("count must be >= 1")
    out = []
    cur = g
    for k in range(1, count + 1):
        if k > count - tail:
            out.append(cur)
        if k < count:
            cur = cur.compose(g)
    return out


@dataclass
class CloudPoint:
    word_length: int
    coords: np.ndarray  # (2n+2,) phase-normalized homogeneous coordinates


@dataclass
class CloudResult:
    points: list[CloudPoint]
    partial: bool
    n: int
    seed: int


def default_seed_plane(n: int) -> NPlane:
    """The plane {z'' = 0}, the core of the candidate large tube."""
    basis = np.vstack([np.eye(n + 1, dtype=complex), np.zeros((n + 1, n + 1), dtype=complex)])
    return NPlane.from_basis(basis)


def limit_set_cloud(spec: GroupSpec, max_length: int, samples_per_plane: int,
                    seed: int, seed_plane: NPlane | None = None,
                    budget: int = 1_000_000, threads: int = 1) -> CloudResult:
    """Point cloud approximating the limit set: every reduced word with
    length in [max_length - 2, max_length] pushes the seed plane around, and
    each image plane is sampled deterministically.

    On budget exhaustion the cloud computed so far is returned with
    ``partial`` set.
    """
    if samples_per_plane < 1:
        raise UsageError("samples_per_plane must be >= 1")
    if seed_plane is None:
        seed_plane = default_seed_plane(spec.n)
    min_length = max(1, max_length - 2)
    partial = False
    maps: list[ProjectiveMap] = []
    try:
        for pm in enumerate_words(spec, max_length, budget=budget):
            if pm.word_length() >= min_length:
                maps.append(pm)
    except EnumerationBudgetError as exc:
        maps = [pm for pm in exc.partial if pm.word_length() >= min_length]
        partial = True

    def plane_points(item):
        idx, pm = item
        basis = pm.rep @ seed_plane.basis
        plane = NPlane.from_basis(basis)
        pts = sample_points(plane, samples_per_plane, seed=_word_seed(seed, idx))
        return [CloudPoint(word_length=pm.word_length(), coords=p) for p in pts]

    items = list(enumerate(maps))
    if threads > 1 and items:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(plane_points, items))
    else:
        chunks = [plane_points(it) for it in items]
    points = [pt for chunk in chunks for pt in chunk]
    return CloudResult(points=points, partial=partial, n=spec.n, seed=seed)


def _word_seed(seed: int, word_index: int) -> int:
    # stable per-word stream, independent of thread scheduling
    return (seed * 1_000_003 + word_index) % (2**63)


@dataclass
class OrbitReport:
    """Distances from g^k(probe) to the target plane, one row per k."""

    ks: np.ndarray
    distances: np.ndarray          # (len(ks), n_probes_kept)
    kept: list[int]
    excluded: list[tuple[int, str]]
    rate_estimate: float | None = None


def orbit_convergence_report(g: ProjectiveMap, target: NPlane,
                             probes: list[np.ndarray], iterations: int,
                             probe_tol: float = 1e-3) -> OrbitReport:
    """Track the approach of g^k(probe) to the target plane.

    Probes within ``probe_tol`` of the repelling plane of g (when that plane
    can be determined) are excluded with a note, since convergence fails on
    it.
    """
    if iterations < 1:
        raise UsageError("iterations must be >= 1")
    repelling = None
    try:
        repelling = limit_nplane(power_sequence(g.inverse(), min(max(iterations, 40), 200))).plane
    except Exception:
        pass  # no usable repelling plane; keep all probes

    kept, excluded = [], []
    zs = []
    for i, probe in enumerate(probes):
        z = np.asarray(probe, dtype=complex)
        if repelling is not None and point_plane_distance(z, repelling.basis) <= probe_tol:
            excluded.append((i, "probe within tolerance of the repelling plane"))
            continue
        kept.append(i)
        zs.append(phase_normalize(z))
    ks = np.arange(1, iterations + 1)
    dist = np.zeros((iterations, len(zs)))
    for col, z in enumerate(zs):
        cur = z
        for row in range(iterations):
            cur = phase_normalize(g.rep @ cur)
            dist[row, col] = point_plane_distance(cur, target.basis)
    rate = None
    if iterations >= 6 and len(zs) and np.all(dist[-1] > 0):
        with np.errstate(divide="ignore"):
            ratios = dist[-1] / dist[-5]
        rate = float(np.median(ratios) ** (1 / 4))
    return OrbitReport(ks=ks, distances=dist, kept=kept, excluded=excluded,
                       rate_estimate=rate)


def cyclic_invariance_residual(g: ProjectiveMap, plane: NPlane) -> float:
    """plane_distance(g . plane, plane); zero for an invariant plane."""
    moved = NPlane.from_basis(g.rep @ plane.basis)
    return plane_distance(moved, plane).value

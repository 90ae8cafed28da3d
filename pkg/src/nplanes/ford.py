"""Isometric-sphere analytics: the mu functional, membership in the
F-region, tube-radius estimation, boundedness/accumulation diagnostics of
the ||C^-1|| spectrum, volume-form pullback verification, and the
limit-line separation table.

All quantities here depend on the choice of homogeneous coordinates; a
GroupSpec's ``frame`` is applied before computing, and every report records
which frame was used.  ``mu`` and ||C^-1|| are evaluated on |det| = 1
representatives, the only scaling at which they are well defined.

All verdicts are truncated at a word length L: the exact region involves
infinitely many conditions, so "interior" always means "interior at depth
L" and accumulation statements are reported as trends, never as
certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numeric import operator_norm, phase_normalize
from .errors import (CSingularError, ChartEscapeError, UsageError,
                     VREstimateError)
from .groups import GroupSpec, ProjectiveMap, words_up_to

BOUNDARY_BAND = 1e-7   # |mu - 1| within this counts as on the sphere
C_SINGULAR_REL = 1e-12


def _identityish(g: ProjectiveMap, tol: float = 1e-12) -> bool:
    return g.word == () or g.is_identity(tol)


def mu(g: ProjectiveMap, z: np.ndarray) -> float:
    """mu_g(z) = ||z''|| / ||C z' + D z''|| on the |det| = 1 representative.

    The identity gets mu = 1 by convention.  Returns inf when z sits on
    g^-1 of the plane {z'' = 0} (vanishing denominator).
    """
    z = np.asarray(z, dtype=complex).ravel()
    if z.shape[0] != 2 * g.n + 2:
        raise UsageError(f"point has wrong length {z.shape[0]} for n={g.n}")
    if _identityish(g):
        return 1.0
    _, _, c, d = g.blocks_sl
    sc = np.linalg.svd(c, compute_uv=False)
    if sc[0] == 0.0 or sc[-1] <= C_SINGULAR_REL * sc[0]:
        raise CSingularError("block C is numerically singular; mu is not meaningful", word=g.word)
    k = g.n + 1
    num = float(np.linalg.norm(z[k:]))
    den = float(np.linalg.norm(c @ z[:k] + d @ z[k:]))
    scale = float(np.linalg.norm(z)) * max(operator_norm(c), operator_norm(d))
    if den <= 1e-14 * scale:
        return float("inf")
    return num / den


@dataclass
class _WordTable:
    """Stacked SL-representative blocks for all non-identity words up to a
    length, plus derived norms.  Built once and reused by every verdict."""

    spec: GroupSpec            # with frame already applied
    frame: np.ndarray | None   # the frame that was applied (for reporting)
    depth: int
    words: list[ProjectiveMap]
    lengths: np.ndarray
    a_blocks: np.ndarray
    c_blocks: np.ndarray
    d_blocks: np.ndarray
    c_inv_norms: np.ndarray    # inf where C is singular
    c_singular: np.ndarray     # bool mask

    def mu_table(self, points: np.ndarray) -> np.ndarray:
        """mu values, shape (n_words, n_points); points are rows."""
        k = self.spec.n + 1
        zp, zpp = points[:, :k], points[:, k:]
        img = (np.einsum("wij,pj->wpi", self.c_blocks, zp)
               + np.einsum("wij,pj->wpi", self.d_blocks, zpp))
        den = np.linalg.norm(img, axis=2)
        num = np.linalg.norm(zpp, axis=1)[None, :]
        scale = (np.linalg.norm(points, axis=1)[None, :]
                 * np.maximum(np.abs(self.c_blocks).sum(axis=(1, 2)),
                              np.abs(self.d_blocks).sum(axis=(1, 2)))[:, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(den <= 1e-14 * scale, np.inf, num / den)
        return out


def build_word_table(spec: GroupSpec, max_length: int) -> _WordTable:
    framed = spec.with_frame_applied()
    words = [w for w in words_up_to(framed, max_length) if w.word_length() > 0]
    k = framed.n + 1
    count = len(words)
    a = np.zeros((count, k, k), dtype=complex)
    c = np.zeros((count, k, k), dtype=complex)
    d = np.zeros((count, k, k), dtype=complex)
    lengths = np.zeros(count, dtype=int)
    for i, w in enumerate(words):
        ab, _, cb, db = w.blocks_sl
        a[i], c[i], d[i] = ab, cb, db
        lengths[i] = w.word_length()
    if count:
        sv = np.linalg.svd(c, compute_uv=False)
        singular = (sv[:, 0] == 0.0) | (sv[:, -1] <= C_SINGULAR_REL * sv[:, 0])
        with np.errstate(divide="ignore"):
            norms = np.where(singular, np.inf, 1.0 / np.where(sv[:, -1] > 0, sv[:, -1], 1.0))
    else:
        singular = np.zeros(0, dtype=bool)
        norms = np.zeros(0)
    return _WordTable(spec=framed, frame=spec.frame, depth=max_length, words=words,
                      lengths=lengths, a_blocks=a, c_blocks=c, d_blocks=d,
                      c_inv_norms=norms, c_singular=singular)


@dataclass
class FordVerdict:
    """L-truncated classification of a point against the F-region."""

    point: np.ndarray
    status: str                       # interior | boundary | exterior | undecided
    witness: ProjectiveMap | None     # word achieving mu >= 1, when one exists
    depth: int
    mu_max: float
    torsion_caveat: bool = False
    frame: np.ndarray | None = None
    note: str = ""


def ford_membership(z: np.ndarray, spec: GroupSpec, max_length: int,
                    band: float = BOUNDARY_BAND,
                    table: _WordTable | None = None) -> FordVerdict:
    """Classify a point (given in the frame's coordinates) at depth
    ``max_length``.

    interior: mu < 1 - band for every word and the per-shell maxima of mu
    trend downward; exterior: some mu > 1 + band (witness returned);
    boundary: |mu - 1| <= band is attained and nothing exceeds 1 + band.
    Everything else is undecided - a value, not an error.
    """
    if table is None:
        table = build_word_table(spec, max_length)
    z = phase_normalize(np.asarray(z, dtype=complex).ravel())
    caveat = spec.has_torsion_generator() if spec.generators else False
    if not table.words:
        return FordVerdict(point=z, status="undecided", witness=None, depth=max_length,
                           mu_max=float("nan"), torsion_caveat=caveat, frame=table.frame,
                           note="no non-identity words at this depth")
    mus = table.mu_table(z[None, :])[:, 0]
    return _classify(z, mus, table, band, caveat)


def ford_membership_batch(points: np.ndarray, spec: GroupSpec, max_length: int,
                          band: float = BOUNDARY_BAND,
                          table: _WordTable | None = None) -> list[FordVerdict]:
    if table is None:
        table = build_word_table(spec, max_length)
    pts = np.array([phase_normalize(np.asarray(p, dtype=complex).ravel()) for p in points])
    caveat = spec.has_torsion_generator() if spec.generators else False
    if not table.words:
        return [FordVerdict(point=p, status="undecided", witness=None, depth=max_length,
                            mu_max=float("nan"), torsion_caveat=caveat, frame=table.frame,
                            note="no non-identity words at this depth")
                for p in pts]
    mus = table.mu_table(pts)
    return [_classify(pts[i], mus[:, i], table, band, caveat) for i in range(len(pts))]


def _classify(z: np.ndarray, mus: np.ndarray, table: _WordTable, band: float,
              caveat: bool) -> FordVerdict:
    i_max = int(np.argmax(mus))
    mu_max = float(mus[i_max])
    witness = table.words[i_max] if mu_max >= 1.0 - band else None
    if mu_max > 1.0 + band:
        status, note = "exterior", ""
    elif mu_max >= 1.0 - band:
        status, note = "boundary", ""
    else:
        if np.any(table.c_singular):
            status = "undecided"
            note = "a word has singular C; the truncated sphere conditions are incomplete"
        else:
            shell_max = _shell_maxima(mus, table.lengths)
            if _trend_decreasing(shell_max):
                status, note = "interior", ""
            else:
                status = "undecided"
                note = "all mu < 1 at this depth but the shell trend is not decreasing"
    return FordVerdict(point=z, status=status, witness=witness, depth=table.depth,
                       mu_max=mu_max, torsion_caveat=caveat, frame=table.frame, note=note)


def _shell_maxima(values: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    out = []
    for ell in range(1, int(lengths.max()) + 1):
        mask = lengths == ell
        if np.any(mask):
            out.append(float(np.max(values[mask])))
    return np.array(out)


def _trend_decreasing(shell_max: np.ndarray, slack: float = 1e-12) -> bool:
    if len(shell_max) < 2:
        return True
    tail = shell_max[-3:] if len(shell_max) >= 3 else shell_max
    return bool(np.all(np.diff(tail) <= slack))


def v_r_estimate(spec: GroupSpec, max_length: int,
                 table: _WordTable | None = None) -> float:
    """L-truncated tube radius R = R_0 + rho: R_0 bounds ||A C^-1|| and
    ||C^-1 D|| over all words up to the depth, rho bounds ||C^-1||.

    The tube {||z'|| > R ||z''||} (in the frame coordinates) then avoids
    every truncated sphere condition.
    """
    if table is None:
        table = build_word_table(spec, max_length)
    if not table.words:
        raise UsageError("cannot estimate a tube for the trivial group")
    if np.any(table.c_singular):
        bad = table.words[int(np.argmax(table.c_singular))]
        raise VREstimateError(
            f"word {bad.word} has a numerically singular C block", word=bad.word)
    c_inv = np.linalg.inv(table.c_blocks)
    ac = np.linalg.norm(np.matmul(table.a_blocks, c_inv), ord=2, axis=(1, 2))
    cd = np.linalg.norm(np.matmul(c_inv, table.d_blocks), ord=2, axis=(1, 2))
    r0 = float(max(ac.max(), cd.max()))
    rho = float(table.c_inv_norms.max())
    return r0 + rho


@dataclass
class ClubSpadeReport:
    """Shell statistics of ||C^-1||: evidence for boundedness of the radius
    set and for 0 being its only accumulation point.  Trend and histogram
    only - finitely many words certify nothing."""

    depth: int
    shell_lengths: np.ndarray
    shell_max: np.ndarray
    shell_min: np.ndarray
    shell_counts: np.ndarray
    rho: float                           # sup estimate of ||C^-1||
    partial_sums: dict[float, np.ndarray]  # delta -> cumulative sums per shell
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray
    frame: np.ndarray | None = None

    def monotone_from_shell(self) -> int | None:
        """First 1-based shell index from which the maxima never increase,
        or None if the final step still increases."""
        if len(self.shell_max) == 0:
            return None
        start = len(self.shell_max) - 1
        while start > 0 and self.shell_max[start] <= self.shell_max[start - 1] * (1 + 1e-12):
            start -= 1
        if start == len(self.shell_max) - 1 and len(self.shell_max) > 1:
            return None
        return int(self.shell_lengths[start])

    def increments(self, delta: float) -> np.ndarray:
        sums = self.partial_sums[delta]
        return np.diff(np.concatenate([[0.0], sums]))


def club_spade_diagnostics(spec: GroupSpec, max_length: int,
                           deltas: list[float] | None = None,
                           table: _WordTable | None = None) -> ClubSpadeReport:
    """Per-shell max/min of ||C^-1|| plus partial sums of sum ||C^-1||^delta."""
    if deltas is None:
        deltas = [4.0]
    if table is None:
        table = build_word_table(spec, max_length)
    if not table.words:
        return ClubSpadeReport(depth=max_length, shell_lengths=np.zeros(0, dtype=int),
                               shell_max=np.zeros(0), shell_min=np.zeros(0),
                               shell_counts=np.zeros(0, dtype=int), rho=float("nan"),
                               partial_sums={float(d): np.zeros(0) for d in deltas},
                               histogram_counts=np.zeros(0, dtype=int),
                               histogram_edges=np.zeros(0), frame=table.frame)
    lengths, norms = table.lengths, table.c_inv_norms
    shells = np.arange(1, int(lengths.max()) + 1)
    smax, smin, scount = [], [], []
    sums = {float(d): [] for d in deltas}
    running = {float(d): 0.0 for d in deltas}
    for ell in shells:
        vals = norms[lengths == ell]
        scount.append(len(vals))
        smax.append(float(vals.max()) if len(vals) else float("nan"))
        smin.append(float(vals.min()) if len(vals) else float("nan"))
        for d in deltas:
            running[float(d)] += float(np.sum(vals ** float(d)))
            sums[float(d)].append(running[float(d)])
    finite = norms[np.isfinite(norms)]
    counts, edges = (np.histogram(finite, bins=10) if len(finite)
                     else (np.zeros(0, dtype=int), np.zeros(0)))
    return ClubSpadeReport(depth=max_length, shell_lengths=shells,
                           shell_max=np.array(smax), shell_min=np.array(smin),
                           shell_counts=np.array(scount, dtype=int),
                           rho=float(np.max(norms)),
                           partial_sums={d: np.array(v) for d, v in sums.items()},
                           histogram_counts=counts, histogram_edges=edges,
                           frame=table.frame)


@dataclass
class VolumeChart:
    """A point of the chart U_alpha of P^(2n+1) minus {z'' = 0}."""

    alpha: int                 # 1-based chart index in 1..n+1
    zeta: np.ndarray           # (n+1,) fiber coordinates z^j / z^(n+alpha)
    x: np.ndarray              # (n,) base coordinates

    @property
    def n(self) -> int:
        return len(self.x)

    def to_homogeneous(self) -> np.ndarray:
        n = self.n
        z = np.zeros(2 * n + 2, dtype=complex)
        z[: n + 1] = self.zeta
        lower = np.zeros(n + 1, dtype=complex)
        lower[self.alpha - 1] = 1.0
        others = [k for k in range(n + 1) if k != self.alpha - 1]
        for pos, k in enumerate(others):
            lower[k] = self.x[pos]
        z[n + 1:] = lower
        return z

    @classmethod
    def from_homogeneous(cls, z: np.ndarray, alpha: int,
                         escape_tol: float = 1e-9) -> "VolumeChart":
        z = np.asarray(z, dtype=complex).ravel()
        n = len(z) // 2 - 1
        if not (1 <= alpha <= n + 1):
            raise UsageError(f"chart index {alpha} outside 1..{n + 1}")
        pivot = z[n + alpha]
        if abs(pivot) <= escape_tol * np.linalg.norm(z):
            raise ChartEscapeError(f"point left chart U_{alpha} (pivot {abs(pivot):.2e})")
        zeta = z[: n + 1] / pivot
        lower = z[n + 1:] / pivot
        x = np.array([lower[k] for k in range(n + 1) if k != alpha - 1])
        return cls(alpha=alpha, zeta=zeta, x=x)

    def density(self) -> float:
        """Local density of the invariant volume form against Lebesgue
        measure in the chart coordinates: (1 + ||x||^2)^(-2(n+1))."""
        n = self.n
        return float((1.0 + float(np.linalg.norm(self.x)) ** 2) ** (-2 * (n + 1)))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.zeta, self.x])

    def replace_flat(self, flat: np.ndarray) -> "VolumeChart":
        n = self.n
        return VolumeChart(alpha=self.alpha, zeta=flat[: n + 1].copy(), x=flat[n + 1:].copy())


def volume_pullback_check(g: ProjectiveMap, z: VolumeChart,
                          h: float = 1e-5) -> tuple[float, float, float]:
    """Compare the numerically computed density ratio of the pulled-back
    volume form against mu_g^(4(n+1)).

    Returns (lhs, rhs, rel_err) with lhs from a central-difference
    holomorphic Jacobian of the chart expression of g.
    """
    n = z.n
    if g.n != n:
        raise UsageError("map and chart point have different n")
    z_h = z.to_homogeneous()
    if _identityish(g):
        return 1.0, 1.0, 0.0
    _, _, c, _ = g.blocks_sl
    if abs(np.linalg.det(c)) <= 1e-12:
        raise CSingularError("block C is numerically singular", word=g.word)

    def chart_image(flat: np.ndarray) -> np.ndarray:
        pt = z.replace_flat(flat)
        image = g.rep @ pt.to_homogeneous()
        return VolumeChart.from_homogeneous(image, z.alpha).flat()

    base = z.flat()
    out0 = chart_image(base)  # raises ChartEscapeError when g(z) leaves the chart
    dim = len(base)
    jac = np.zeros((dim, dim), dtype=complex)
    for j in range(dim):
        step = np.zeros(dim, dtype=complex)
        step[j] = h
        # real step suffices: the chart map is holomorphic
        jac[:, j] = (chart_image(base + step) - chart_image(base - step)) / (2 * h)
    image_chart = z.replace_flat(out0)
    lhs = image_chart.density() * abs(np.linalg.det(jac)) ** 2 / z.density()
    rhs = mu(g, z_h) ** (4 * (n + 1))
    rel = abs(lhs - rhs) / abs(rhs)
    return float(lhs), float(rhs), float(rel)


@dataclass
class SeparationRow:
    word: tuple[int, ...]
    length: int
    value: float   # ||C L + D||


@dataclass
class SeparationTable:
    rows: list[SeparationRow]
    shell_min: np.ndarray
    shell_lengths: np.ndarray
    frame: np.ndarray | None = None


def limit_line_separation(spec: GroupSpec, l_matrix: np.ndarray, max_length: int,
                          table: _WordTable | None = None) -> SeparationTable:
    """Per-word values of ||C L + D|| for a candidate limit-plane graph
    matrix L.  Shell minima that sink to 0 are the numeric signature of L
    describing a limit plane reached by the group."""
    l_matrix = np.asarray(l_matrix, dtype=complex)
    if not np.all(np.isfinite(l_matrix)):
        raise UsageError("graph matrix must be finite")
    if table is None:
        table = build_word_table(spec, max_length)
    rows = [SeparationRow(word=(), length=0,
                          value=float(operator_norm(l_matrix * 0 + np.eye(spec.n + 1))))]
    if table.words:
        vals = np.linalg.norm(np.matmul(table.c_blocks, l_matrix) + table.d_blocks,
                              ord=2, axis=(1, 2))
        for w, v in zip(table.words, vals):
            rows.append(SeparationRow(word=w.word, length=w.word_length(), value=float(v)))
        shells = np.arange(1, int(table.lengths.max()) + 1)
        mins = np.array([float(vals[table.lengths == ell].min()) for ell in shells])
    else:
        shells, mins = np.zeros(0, dtype=int), np.zeros(0)
    return SeparationTable(rows=rows, shell_min=mins, shell_lengths=shells,
                           frame=table.frame)

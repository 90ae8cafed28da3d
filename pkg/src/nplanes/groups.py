"""Group elements of PGL_(2n+2)(C): normalized representatives with block
decomposition, finitely generated group descriptions, breadth-first word
enumeration with free reduction, and the ||C^-1|| functional.

Words are tuples of signed 1-based letters: +k is the k-th generator,
-k its inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ._numeric import phase_normalize
from .errors import EnumerationBudgetError, SingularMatrixError, UsageError

DEFAULT_WORD_BUDGET = 1_000_000
# |det| below this (after max-entry normalization) counts as singular
DET_FLOOR = 1e-12


def normalize(mat: np.ndarray) -> np.ndarray:
    """Scale an invertible matrix so its max-entry modulus is 1 with the
    first maximal entry real positive (deterministic representative)."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise UsageError(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise SingularMatrixError("matrix has non-finite entries")
    out = phase_normalize(mat)
    if abs(np.linalg.det(out)) < DET_FLOOR:
        raise SingularMatrixError("matrix is numerically singular; not a group element")
    return out


@dataclass
class ProjectiveMap:
    """An element of PGL_(2n+2)(C).

    ``rep`` is the max-entry-normalized representative; ``word`` tracks the
    reduced word in generator letters when known (the empty tuple means the
    identity, None means untracked).
    """

    rep: np.ndarray
    word: tuple[int, ...] | None = None
    n: int = field(default=0)

    def __post_init__(self):
        self.rep = np.asarray(self.rep, dtype=complex)
        d = self.rep.shape[0]
        if self.rep.ndim != 2 or self.rep.shape[1] != d or d % 2:
            raise UsageError(f"representative must be square of even size, got {self.rep.shape}")
        if self.n == 0:
            self.n = d // 2 - 1
        elif d != 2 * self.n + 2:
            raise UsageError(f"size {d} does not match n={self.n}")
        self.rep.flags.writeable = False

    @classmethod
    def from_matrix(cls, mat: np.ndarray, word: tuple[int, ...] | None = None) -> "ProjectiveMap":
        return cls(rep=normalize(mat), word=word)

    @classmethod
    def identity(cls, n: int) -> "ProjectiveMap":
        return cls(rep=np.eye(2 * n + 2, dtype=complex), word=(), n=n)

    @property
    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(A, B, C, D) blocks of the normalized representative."""
        k = self.n + 1
        r = self.rep
        return r[:k, :k], r[:k, k:], r[k:, :k], r[k:, k:]

    @cached_property
    def sl_rep(self) -> np.ndarray:
        """Representative scaled to |det| = 1.  The isometric-sphere
        quantities (mu, ||C^-1||, ...) are only meaningful at this scale."""
        d = self.rep.shape[0]
        det = np.linalg.det(self.rep)
        out = self.rep * abs(det) ** (-1.0 / d)
        out.flags.writeable = False
        return out

    @property
    def blocks_sl(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        k = self.n + 1
        r = self.sl_rep
        return r[:k, :k], r[:k, k:], r[k:, :k], r[k:, k:]

    def compose(self, other: "ProjectiveMap") -> "ProjectiveMap":
        if self.n != other.n:
            raise UsageError("cannot compose maps of different dimension")
        word = None
        if self.word is not None and other.word is not None:
            word = reduce_word(self.word + other.word)
        return ProjectiveMap(rep=normalize(self.rep @ other.rep), word=word, n=self.n)

    def inverse(self) -> "ProjectiveMap":
        word = None if self.word is None else invert_word(self.word)
        return ProjectiveMap(rep=normalize(np.linalg.inv(self.rep)), word=word, n=self.n)

    def apply(self, z: np.ndarray) -> np.ndarray:
        """Image of a projective point (phase-normalized)."""
        return phase_normalize(self.rep @ np.asarray(z, dtype=complex))

    def is_identity(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.rep - np.eye(self.rep.shape[0]))) <= tol)

    def word_length(self) -> int:
        if self.word is None:
            raise UsageError("map does not carry a word")
        return len(self.word)


def reduce_word(word: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert_word(word: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-letter for letter in reversed(word))


@dataclass
class GroupSpec:
    """A finitely generated subgroup of PGL_(2n+2)(C).

    ``structure`` is one of "free", "cyclic", "free_product"; for a free
    product, ``factor_sizes`` gives how many consecutive generators belong
    to each factor.  ``frame`` is an optional change of homogeneous
    coordinates in which the isometric-sphere diagnostics are meaningful;
    it is applied (by conjugation) before any such computation.
    """

    n: int
    generators: list[ProjectiveMap]
    names: tuple[str, ...] = ()
    structure: str = "free"
    factor_sizes: tuple[int, ...] | None = None
    frame: np.ndarray | None = None
    max_word_length: int = 24

    def __post_init__(self):
        if self.structure not in ("free", "cyclic", "free_product"):
            raise UsageError(f"unknown structure {self.structure!r}")
        if self.structure == "cyclic" and len(self.generators) > 1:
            raise UsageError("cyclic structure is single-generator")
        if self.structure == "free_product":
            if self.factor_sizes is None or sum(self.factor_sizes) != len(self.generators):
                raise UsageError("factor_sizes must partition the generator list")
        for g in self.generators:
            if g.n != self.n:
                raise UsageError("generator dimension does not match the group")
        if not self.names:
            self.names = tuple(f"g{i + 1}" for i in range(len(self.generators)))
        if len(self.names) != len(self.generators):
            raise UsageError("one name per generator required")
        if self.frame is not None:
            self.frame = np.asarray(self.frame, dtype=complex)
            if self.frame.shape != (2 * self.n + 2, 2 * self.n + 2):
                raise UsageError("frame must be a (2n+2) x (2n+2) matrix")

    @classmethod
    def from_matrices(cls, n: int, mats, names=None, structure: str = "free",
                      factor_sizes=None, frame=None, max_word_length: int = 24) -> "GroupSpec":
        gens = [ProjectiveMap.from_matrix(np.asarray(m, dtype=complex), word=(i + 1,))
                for i, m in enumerate(mats)]
        return cls(n=n, generators=gens,
                   names=tuple(names) if names else (),
                   structure=structure,
                   factor_sizes=tuple(factor_sizes) if factor_sizes else None,
                   frame=np.asarray(frame, dtype=complex) if frame is not None else None,
                   max_word_length=max_word_length)

    def with_frame_applied(self) -> "GroupSpec":
        """Conjugate all generators into the stored frame; the result has no
        frame left to apply."""
        if self.frame is None:
            return self
        t = self.frame
        t_inv = np.linalg.inv(t)
        gens = [ProjectiveMap(rep=normalize(t @ g.rep @ t_inv), word=g.word, n=self.n)
                for g in self.generators]
        return replace(self, generators=gens, frame=None)

    def letter_map(self, letter: int) -> ProjectiveMap:
        g = self.generators[abs(letter) - 1]
        return g if letter > 0 else g.inverse()

    def word_map(self, word: tuple[int, ...]) -> ProjectiveMap:
        out = ProjectiveMap.identity(self.n)
        for letter in reduce_word(word):
            out = out.compose(self.letter_map(letter))
        return out

    def word_name(self, word: tuple[int, ...]) -> str:
        if not word:
            return "1"
        parts = []
        for letter in word:
            nm = self.names[abs(letter) - 1]
            parts.append(nm if letter > 0 else nm + "^-1")
        return "*".join(parts)

    def factor_of_letter(self, letter: int) -> int:
        idx = abs(letter) - 1
        if self.structure != "free_product" or self.factor_sizes is None:
            return idx
        acc = 0
        for fi, size in enumerate(self.factor_sizes):
            acc += size
            if idx < acc:
                return fi
        raise UsageError(f"letter {letter} outside the generator list")

    def syllables(self, word: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Normal-form decomposition: maximal runs of letters from the same
        free factor.  The number of syllables is the normal-form length."""
        out: list[tuple[int, ...]] = []
        current: list[int] = []
        cur_factor = None
        for letter in word:
            f = self.factor_of_letter(letter)
            if cur_factor is None or f == cur_factor:
                current.append(letter)
            else:
                out.append(tuple(current))
                current = [letter]
            cur_factor = f
        if current:
            out.append(tuple(current))
        return out

    def torsion_flags(self, max_order: int = 12, tol: float = 1e-8) -> list[bool]:
        """True per generator when some power k <= max_order is numerically
        the identity.  Discreteness itself is never verified; verdicts built
        on this spec are evidence, not certificates."""
        flags = []
        for g in self.generators:
            power = g
            found = False
            for _ in range(max_order):
                if power.is_identity(tol):
                    found = True
                    break
                power = power.compose(g)
            flags.append(found)
        return flags

    def has_torsion_generator(self) -> bool:
        return any(self.torsion_flags())


def enumerate_words(spec: GroupSpec, max_length: int,
                    budget: int = DEFAULT_WORD_BUDGET):
    """Yield all freely reduced words of length <= max_length as
    ProjectiveMap values, breadth-first by length, in a deterministic order
    (letters ordered g1, g1^-1, g2, g2^-1, ...).

    Raises EnumerationBudgetError (carrying everything emitted so far) when
    the enumeration would exceed ``budget`` words.
    """
    if max_length < 0:
        raise UsageError("max_length must be >= 0")
    letters: list[int] = []
    for i in range(len(spec.generators)):
        letters.extend([i + 1, -(i + 1)])
    emitted: list[ProjectiveMap] = []

    def emit(pm: ProjectiveMap) -> ProjectiveMap:
        if len(emitted) >= budget:
            raise EnumerationBudgetError(
                f"word budget of {budget} exceeded at length {pm.word_length()}",
                partial=list(emitted))
        emitted.append(pm)
        return pm

    frontier = [emit(ProjectiveMap.identity(spec.n))]
    yield frontier[0]
    for _ in range(max_length):
        next_frontier: list[ProjectiveMap] = []
        for pm in frontier:
            last = pm.word[-1] if pm.word else 0
            for letter in letters:
                if last == -letter:
                    continue  # would cancel: not freely reduced
                child = ProjectiveMap(rep=normalize(pm.rep @ spec.letter_map(letter).rep),
                                      word=pm.word + (letter,), n=spec.n)
                next_frontier.append(emit(child))
                yield child
        frontier = next_frontier
        if not frontier:
            break


def words_up_to(spec: GroupSpec, max_length: int,
                budget: int = DEFAULT_WORD_BUDGET) -> list[ProjectiveMap]:
    return list(enumerate_words(spec, max_length, budget=budget))


def c_inverse_norm(g: ProjectiveMap) -> float:
    """||C_g^{-1}|| for the |det| = 1 representative, via 1/sigma_min(C).

    Returns inf when C is numerically singular (sigma_min <= 1e-12 sigma_max).
    """
    if g.word == ():
        raise UsageError("the identity has no isometric-sphere radius")
    _, _, c, _ = g.blocks_sl
    s = np.linalg.svd(c, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= 1e-12 * s[0]:
        return float("inf")
    return float(1.0 / s[-1])

"""
Random linear codes, duals and coset machinery for the QDP lab.

A code C is the row space of a generator matrix G over F_q. Its dual C_perp
is the kernel of G. Syndromes label the cosets s + C_perp: the syndrome of y
is B y^T where B is the reduced row echelon basis of C, so the syndrome
space is F_q^r with r = rank(G) and |C| = q^r.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

import config
from fq_core import FieldSpec, all_vectors, as_vector, dot, make_field, to_ints, vector_index
from schemas import CodeRecord
from utils import check_cap

logger = logging.getLogger(__name__)


class CodeError(ValueError):
    """Raised for invalid code parameters or queries."""

    pass


class RankDeficientError(CodeError):
    """Raised in strict mode when a drawn generator matrix is rank deficient."""

    pass


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Immutable linear code with its dual basis and syndrome map."""

    field: FieldSpec
    n: int
    k: int
    G: np.ndarray
    rank: int
    basis: np.ndarray
    pivots: tuple[int, ...]
    H: np.ndarray
    seed: Optional[int] = None

    @property
    def size(self) -> int:
        """|C| = q^rank."""
        return self.field.q**self.rank

    @property
    def dual_size(self) -> int:
        """|C_perp| = q^(n - rank)."""
        return self.field.q ** (self.n - self.rank)

    @property
    def num_syndromes(self) -> int:
        """Number of cosets of C_perp, equal to |C|."""
        return self.size

    def syndrome(self, y) -> np.ndarray:
        """Syndrome vector B y^T of y, length rank."""
        y = as_vector(self.field, y)
        if y.size != self.n:
            raise CodeError(f"expected a vector of length {self.n}, got {y.size}")
        if self.rank == 0:
            return np.zeros(0, dtype=np.int64)
        return dot(self.field, self.basis, y)

    def syndrome_index(self, y) -> int:
        """Mixed-radix index of the syndrome of y."""
        return int(vector_index(self.field.q, self.syndrome(y)[None, :])[0]) if self.rank else 0

    @functools.cached_property
    def syndrome_table(self) -> np.ndarray:
        """Syndrome index of every vector of F_q^n, in vector index order."""
        q = self.field.q
        check_cap(q**self.n, config.CAP_PRODUCT, "syndrome table")
        if self.rank == 0:
            return np.zeros(q**self.n, dtype=np.int64)
        syndromes = dot(self.field, all_vectors(q, self.n), self.basis.T)
        table = vector_index(q, syndromes)
        table.setflags(write=False)
        return table

    def coset_representative(self, s) -> np.ndarray:
        """
        Deterministic representative u_s of the coset with syndrome s.

        u_s places the syndrome entries at the pivot columns of the echelon
        basis, so B u_s^T = s and u_0 = 0.

        Args:
            s: Syndrome vector of length rank, or its integer index.

        Returns:
            Vector of length n.
        """
        sigma = self._syndrome_vector(s)
        rep = np.zeros(self.n, dtype=np.int64)
        rep[list(self.pivots)] = sigma
        return rep

    def _syndrome_vector(self, s) -> np.ndarray:
        q = self.field.q
        if np.isscalar(s):
            index = int(s)
            if not 0 <= index < self.num_syndromes:
                raise CodeError(f"syndrome index {index} out of range 0..{self.num_syndromes - 1}")
            return all_vectors(q, self.rank)[index] if self.rank else np.zeros(0, dtype=np.int64)
        sigma = np.asarray(s, dtype=np.int64)
        if sigma.shape != (self.rank,) or (sigma.size and (sigma.min() < 0 or sigma.max() >= q)):
            raise CodeError(f"syndrome must be a vector of {self.rank} elements of F_{q}")
        return sigma

    def codewords(self) -> np.ndarray:
        """All codewords of C in lexicographic order."""
        return _span(self.field, self.basis, self.n)

    def dual_codewords(self) -> np.ndarray:
        """All codewords of C_perp in lexicographic order."""
        return _span(self.field, self.H, self.n)

    def in_dual(self, y) -> bool:
        """Membership in C_perp via the syndrome map."""
        return not self.syndrome(y).any()


def _span(field: FieldSpec, rows: np.ndarray, n: int) -> np.ndarray:
    q = field.q
    dim = rows.shape[0]
    check_cap(q**dim, config.CAP_PRODUCT, "codeword enumeration")
    if dim == 0:
        return np.zeros((1, n), dtype=np.int64)
    words = dot(field, all_vectors(q, dim), rows)
    order = np.argsort(vector_index(q, words), kind="stable")
    return words[order]


def from_generator(field: FieldSpec, G, seed: Optional[int] = None) -> LinearCode:
    """
    Build a LinearCode from any generator matrix, rank deficient or not.

    Args:
        field: Ambient field.
        G: (k, n) matrix over F_q.
        seed: Seed that produced G, kept for serialization.

    Returns:
        LinearCode with echelon basis, pivots and parity-check matrix.
    """
    G = np.atleast_2d(np.asarray(G, dtype=np.int64))
    k, n = G.shape
    if n < 1:
        raise CodeError("code length must be positive")
    if G.size and (G.min() < 0 or G.max() >= field.q):
        raise CodeError(f"generator entries must lie in 0..{field.q - 1}")

    if k and G.any():
        rref = to_ints(field.gf(G).row_reduce())
        basis = rref[rref.any(axis=1)]
    else:
        basis = np.zeros((0, n), dtype=np.int64)
    rank = basis.shape[0]
    pivots = tuple(int(np.flatnonzero(row)[0]) for row in basis)

    if rank == 0:
        H = np.eye(n, dtype=np.int64)
    elif rank == n:
        H = np.zeros((0, n), dtype=np.int64)
    else:
        H = to_ints(field.gf(basis).null_space())

    for array in (G, basis, H):
        array.setflags(write=False)

    if rank < k:
        logger.debug("Generator matrix has rank %d < k=%d; |C| = %d^%d", rank, k, field.q, rank)

    return LinearCode(
        field=field,
        n=n,
        k=k,
        G=G,
        rank=rank,
        basis=basis,
        pivots=pivots,
        H=H,
        seed=seed,
    )


def random_code(
    field: FieldSpec,
    n: int,
    k: int,
    seed: int,
    strict: bool = False,
) -> LinearCode:
    """
    Draw a code with i.i.d. uniform generator matrix G in F_q^{k x n}.

    Args:
        field: Ambient field.
        n: Code length.
        k: Number of generator rows, 1 <= k < n.
        seed: Seed for numpy's default generator.
        strict: Reject rank-deficient draws instead of keeping them.

    Returns:
        LinearCode; |C| = q^rank(G).
    """
    if not 1 <= k < n:
        raise CodeError(f"need 1 <= k < n, got k={k}, n={n}")
    check_cap(field.q**n, config.CAP_CODE, "random code")
    rng = np.random.default_rng(seed)
    G = rng.integers(0, field.q, size=(k, n), dtype=np.int64)
    code = from_generator(field, G, seed=seed)
    if strict and code.rank < k:
        raise RankDeficientError(f"seed {seed} drew a generator of rank {code.rank} < {k}")
    return code


def nested_codes(field: FieldSpec, n: int, seed: int) -> dict[int, LinearCode]:
    """
    Codes C_1 <= C_2 <= ... <= C_(n-1) from the leading rows of one uniform G.

    Each prefix of a uniform G is itself uniform, so C_k has the law of
    random_code(field, n, k, ...) while every C_k is a subcode of C_(k+1).

    Args:
        field: Ambient field.
        n: Code length, n >= 2.
        seed: Seed for the single (n-1) x n draw.

    Returns:
        Mapping k -> C_k for k = 1..n-1.
    """
    if n < 2:
        raise CodeError(f"nested codes need n >= 2, got {n}")
    check_cap(field.q**n, config.CAP_CODE, "nested codes")
    rng = np.random.default_rng(seed)
    G = rng.integers(0, field.q, size=(n - 1, n), dtype=np.int64)
    return {k: from_generator(field, G[:k], seed=seed) for k in range(1, n)}


def systematic_code(field: FieldSpec, n: int, k: int, seed: int) -> LinearCode:
    """Full-rank code with generator [I_k | M] for a seeded uniform M."""
    if not 1 <= k < n:
        raise CodeError(f"need 1 <= k < n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    M = rng.integers(0, field.q, size=(k, n - k), dtype=np.int64)
    return from_generator(field, np.hstack([np.eye(k, dtype=np.int64), M]), seed=seed)


def dual(code: LinearCode) -> LinearCode:
    """Return C_perp as a LinearCode generated by the parity-check matrix."""
    return from_generator(code.field, code.H)


def coset_representative(code: LinearCode, s) -> np.ndarray:
    """Deterministic u_s with syndrome s (pivot rule)."""
    return code.coset_representative(s)


def coset_representatives(code: LinearCode, shift_seed: Optional[int] = None) -> np.ndarray:
    """
    Table of representatives u_s for every syndrome index.

    With shift_seed, every u_s (s != 0) is shifted by a seeded random dual
    codeword, giving a different but equally valid representative rule.

    Args:
        code: The code.
        shift_seed: Optional seed for the perturbed rule.

    Returns:
        (|C|, n) array, row s is u_s.
    """
    reps = np.zeros((code.num_syndromes, code.n), dtype=np.int64)
    if code.rank:
        reps[:, list(code.pivots)] = all_vectors(code.field.q, code.rank)
    if shift_seed is not None and code.H.shape[0]:
        rng = np.random.default_rng(shift_seed)
        messages = rng.integers(0, code.field.q, size=(code.num_syndromes, code.H.shape[0]))
        shifts = dot(code.field, messages, code.H)
        shifts[0] = 0
        reps = code.field.add[reps, shifts]
    return reps


def enumerate_coset(code: LinearCode, s) -> np.ndarray:
    """
    All vectors of the coset u_s + C_perp.

    Args:
        code: The code.
        s: Syndrome vector or index.

    Returns:
        (|C_perp|, n) array without duplicates.
    """
    rep = code.coset_representative(s)
    return code.field.add[rep[None, :], code.dual_codewords()]


def min_weight_codeword(
    code: LinearCode,
    weight: Callable[[np.ndarray], np.ndarray],
) -> tuple[np.ndarray, float]:
    """
    Brute-force nonzero codeword of minimum weight.

    Args:
        code: The code to search.
        weight: Vectorized weight, maps an (N, n) array to N weights.

    Returns:
        Tuple of (codeword, weight); ties go to the lexicographically first.
    """
    words = code.codewords()[1:]
    if len(words) == 0:
        raise CodeError("code is {0}: no nonzero codeword")
    weights = np.asarray(weight(words), dtype=float)
    best = int(np.argmin(weights))
    return words[best], float(weights[best])


def code_to_record(code: LinearCode) -> CodeRecord:
    """Serialize a code as a JSON-ready record."""
    return CodeRecord(
        q=code.field.q,
        p=code.field.p,
        s=code.field.s,
        n=code.n,
        k=code.k,
        G=code.G.tolist(),
        seed=code.seed,
    )


def code_from_record(record: CodeRecord) -> LinearCode:
    """Rebuild a code from its record."""
    field = make_field(record.p, record.s)
    if field.q != record.q:
        raise CodeError(f"record q={record.q} does not match p^s={field.q}")
    G = np.asarray(record.G, dtype=np.int64).reshape(record.k, record.n)
    return from_generator(field, G, seed=record.seed)


# Exhaustive ensembles


@dataclass(frozen=True)
class EnsembleMoments:
    """Mean and variance of a statistic over every matrix of an ensemble."""

    mean: float
    variance: float
    count: int


def orthogonality_table(field: FieldSpec, n: int, targets: np.ndarray) -> np.ndarray:
    """Boolean (q^n, len(targets)) table of [h . t = 0] over all rows h."""
    targets = np.atleast_2d(targets)
    return dot(field, all_vectors(field.q, n), targets.T) == 0


def iter_row_tuples(q: int, n: int, rows: int, chunk: int = config.CHUNK_SIZE) -> Iterator[np.ndarray]:
    """
    Enumerate every rows x n matrix as a tuple of row indices.

    Args:
        q: Alphabet size.
        n: Row length.
        rows: Number of rows.
        chunk: Matrices per yielded block.

    Yields:
        (m, rows) int arrays; row j of a matrix is all_vectors(q, n)[t[j]].
    """
    total = q ** (n * rows)
    check_cap(total, config.CAP_ENSEMBLE, "matrix ensemble")
    radix = q**n
    powers = radix ** np.arange(rows - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        indices = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (indices[:, None] // powers[None, :]) % radix


def ensemble_kernel_sums(
    field: FieldSpec,
    n: int,
    rows: int,
    targets: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """
    For every rows x n matrix M, sum of weights[t] over targets t in ker M.

    Args:
        field: Ambient field.
        n: Vector length.
        rows: Number of matrix rows.
        targets: (T, n) vectors.
        weights: T weights.

    Returns:
        Array of length q^(n*rows), one value per matrix in enumeration order.
    """
    table = orthogonality_table(field, n, targets)
    weights = np.asarray(weights, dtype=float)
    sums = []
    for block in iter_row_tuples(field.q, n, rows):
        inside = np.logical_and.reduce(table[block], axis=1)
        sums.append(inside @ weights)
    return np.concatenate(sums)


def intersection_moments(field: FieldSpec, n: int, k: int, subset: np.ndarray) -> EnsembleMoments:
    """
    Moments of |C cap E| over every parity-check matrix H in F_q^{(n-k) x n}.

    Args:
        field: Ambient field.
        n: Code length.
        k: Nominal dimension; C = ker H.
        subset: (|E|, n) vectors of E.

    Returns:
        EnsembleMoments over all q^{(n-k)n} matrices.
    """
    subset = np.atleast_2d(subset)
    counts = ensemble_kernel_sums(field, n, n - k, subset, np.ones(len(subset)))
    moments = EnsembleMoments(mean=float(counts.mean()), variance=float(counts.var()), count=len(counts))
    logger.debug("Intersection moments n=%d k=%d |E|=%d: %s", n, k, len(subset), moments)
    return moments


def dual_membership_probability(field: FieldSpec, n: int, k: int, y, s) -> float:
    """Pr over all G in F_q^{k x n} that y lies in s + ker G."""
    diff = field.add[as_vector(field, y), field.neg[as_vector(field, s)]]
    inside = ensemble_kernel_sums(field, n, k, diff[None, :], np.ones(1))
    return float(inside.mean())

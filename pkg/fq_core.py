"""
Finite-field core for the QDP lab.

Arithmetic tables for F_q = F_{p^s}, the trace map, additive characters
chi_y(x) = exp(2*pi*i*tr(x*y)/p), vector helpers and the matrix view of
vectors with their rank weight. Elements are the integers 0..q-1 of the
polynomial basis (galois integer representation). Vectors of F_q^n are
indexed big-endian, so index order is lexicographic order of entries.
"""

import functools
import logging
from dataclasses import dataclass

import galois
import numpy as np
import numpy.typing as npt

import config
from utils import check_cap

logger = logging.getLogger(__name__)

FqVector = npt.NDArray[np.int64]


class FieldError(ValueError):
    """Raised for invalid field parameters or malformed field elements."""

    pass


class FieldConsistencyError(RuntimeError):
    """Raised when the constructed field tables violate a field identity."""

    pass


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """Immutable description of F_{p^s} with precomputed tables."""

    p: int
    s: int
    q: int
    gf: type[galois.FieldArray]
    modulus: tuple[int, ...]
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    trace: np.ndarray
    chars: np.ndarray

    @property
    def descriptor(self) -> dict:
        """Field descriptor {p, s} used in JSON records."""
        return {"p": self.p, "s": self.s}

    def __repr__(self) -> str:
        return f"FieldSpec(p={self.p}, s={self.s})"


def _int_table(values: galois.FieldArray) -> np.ndarray:
    table = np.asarray(values.view(np.ndarray), dtype=np.int64)
    table.setflags(write=False)
    return table


@functools.lru_cache(maxsize=None)
def make_field(p: int, s: int = 1) -> FieldSpec:
    """
    Build F_{p^s} with trace and character tables.

    The modulus is galois' default (Conway) polynomial for (p, s).

    Args:
        p: Field characteristic, must be prime.
        s: Extension degree, s >= 1.

    Returns:
        FieldSpec shared by all callers with the same (p, s).
    """
    if s < 1:
        raise FieldError(f"extension degree must be >= 1, got {s}")
    if p < 2 or not galois.is_prime(p):
        raise FieldError(f"characteristic must be prime, got {p}")
    q = p**s
    check_cap(q, config.CAP_FIELD, "field order")
    check_cap(q * q, config.CAP_PRODUCT, "field tables")

    gf = galois.GF(q)
    modulus = gf.irreducible_poly
    if modulus.degree != s or not modulus.is_irreducible():
        raise FieldConsistencyError(f"modulus {modulus} of GF({p}^{s}) is not irreducible of degree {s}")

    elements = gf.elements
    add = _int_table(elements[:, None] + elements[None, :])
    mul = _int_table(elements[:, None] * elements[None, :])
    neg = _int_table(-elements)
    trace = _int_table(elements.field_trace())

    # tr is F_p-linear
    lhs = trace[add]
    rhs = (trace[:, None] + trace[None, :]) % p
    if not np.array_equal(lhs, rhs):
        raise FieldConsistencyError(f"trace of GF({p}^{s}) is not additive")

    chars = np.exp(2j * np.pi * trace[mul] / p)
    chars.setflags(write=False)

    field = FieldSpec(
        p=p,
        s=s,
        q=q,
        gf=gf,
        modulus=tuple(int(c) for c in modulus.coeffs),
        add=add,
        mul=mul,
        neg=neg,
        trace=trace,
        chars=chars,
    )
    logger.debug("Built GF(%d^%d) with modulus %s", p, s, modulus)
    return field


def as_vector(field: FieldSpec, x) -> FqVector:
    """
    Convert x to an integer vector over field, checking every entry.

    Args:
        field: Ambient field.
        x: Sequence of field elements.

    Returns:
        1-D int64 array.
    """
    vec = np.asarray(x, dtype=np.int64)
    if vec.ndim != 1:
        raise FieldError(f"expected a 1-D vector, got shape {vec.shape}")
    if vec.size and (vec.min() < 0 or vec.max() >= field.q):
        raise FieldError(f"vector entries must lie in 0..{field.q - 1}")
    return vec


def character(field: FieldSpec, y: int, x: int) -> complex:
    """Return chi_y(x) for single elements."""
    return complex(field.chars[int(y), int(x)])


def character_vec(field: FieldSpec, y, x) -> complex:
    """
    Return chi_y(x) = prod_i chi_{y_i}(x_i) for vectors.

    Args:
        field: Ambient field.
        y: Frequency vector.
        x: Point vector.

    Returns:
        Unit complex number exp(2*pi*i*tr(x.y)/p).
    """
    y = as_vector(field, y)
    x = as_vector(field, x)
    if y.shape != x.shape:
        raise FieldError(f"length mismatch: {y.size} vs {x.size}")
    return complex(field.chars[1, int(dot(field, y, x))])


def dot(field: FieldSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Field inner product over the last axis (matrix product for 2-D inputs)."""
    return to_ints(field.gf(x) @ field.gf(y))


def characters(field: FieldSpec, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """
    Character matrix chi_{ys[i]}(xs[j]).

    Args:
        field: Ambient field.
        ys: (N, n) frequency vectors.
        xs: (M, n) point vectors.

    Returns:
        (N, M) complex array.
    """
    ys = np.atleast_2d(ys)
    xs = np.atleast_2d(xs)
    return field.chars[1][dot(field, ys, xs.T)]


def to_ints(values: galois.FieldArray) -> np.ndarray:
    """Integer representation of a galois array."""
    return np.asarray(values.view(np.ndarray), dtype=np.int64)


@functools.lru_cache(maxsize=32)
def all_vectors(q: int, n: int) -> np.ndarray:
    """
    All q^n vectors of length n in index order.

    Args:
        q: Alphabet size.
        n: Vector length.

    Returns:
        Read-only (q^n, n) int64 array; row i is the vector with index i.
    """
    check_cap(q**n, config.CAP_CODE, "vector enumeration")
    indices = np.arange(q**n, dtype=np.int64)
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    vectors = (indices[:, None] // powers[None, :]) % q
    vectors.setflags(write=False)
    return vectors


def vector_index(q: int, vectors: np.ndarray) -> np.ndarray:
    """Big-endian mixed-radix index of each row of vectors."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
    n = vectors.shape[1]
    powers = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return vectors @ powers


def matv(x, a: int, b: int) -> np.ndarray:
    """
    Arrange a length a*b vector as an a x b matrix, entry (i, j) = x[i*b + j].

    Args:
        x: Vector of length a*b.
        a: Number of rows.
        b: Number of columns.

    Returns:
        (a, b) int64 array.
    """
    x = np.asarray(x, dtype=np.int64)
    if x.ndim != 1 or x.size != a * b:
        raise FieldError(f"cannot view a vector of length {x.size} as a {a}x{b} matrix")
    return x.reshape(a, b)


def rank_weight(field: FieldSpec, x, a: int, b: int) -> int:
    """
    Rank of matv(x, a, b) over F_q.

    Args:
        field: Ambient field.
        x: Vector of length a*b.
        a: Number of rows.
        b: Number of columns.

    Returns:
        Integer in 0..min(a, b).
    """
    matrix = matv(as_vector(field, x), a, b)
    if not matrix.any():
        return 0
    return int(np.linalg.matrix_rank(field.gf(matrix)))


def rank_weights(field: FieldSpec, vectors: np.ndarray, a: int, b: int) -> np.ndarray:
    """Rank weight of every row of vectors."""
    vectors = np.atleast_2d(vectors)
    return np.fromiter(
        (rank_weight(field, row, a, b) for row in vectors),
        dtype=np.int64,
        count=len(vectors),
    )


@functools.lru_cache(maxsize=16)
def rank_weight_table(p: int, s: int, a: int, b: int) -> np.ndarray:
    """Rank weight of every vector of F_q^{ab}, in index order."""
    field = make_field(p, s)
    table = rank_weights(field, all_vectors(field.q, a * b), a, b)
    table.setflags(write=False)
    return table


def hamming_weights(vectors: np.ndarray) -> np.ndarray:
    """Number of nonzero entries of every row."""
    return np.count_nonzero(np.atleast_2d(vectors), axis=1).astype(np.int64)

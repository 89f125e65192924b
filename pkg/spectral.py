"""
Fourier transform over F_q^n for the QDP lab.

f_hat(y) = q^(-n/2) sum_x chi_y(x) f(x). Dense transforms apply the q x q
character matrix along each of the n axes of the (q,)*n tensor, cost
n*q^(n+1). The inverse uses the conjugate matrix.
"""

import functools
import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

import config
from fq_core import FieldSpec, all_vectors, as_vector, dot, rank_weight_table, vector_index
from utils import check_cap

logger = logging.getLogger(__name__)

INPUT_NORM_TOL = 1e-9


class NormError(ValueError):
    """Raised when an amplitude function is not unit norm."""

    pass


def fourier_matrix(field: FieldSpec, inverse: bool = False) -> np.ndarray:
    """Unitary single-symbol transform q^(-1/2) chi_y(x) (conjugated for the inverse)."""
    matrix = field.chars / np.sqrt(field.q)
    return matrix.conj() if inverse else matrix


def _symbolwise(matrix: np.ndarray, values: np.ndarray, q: int, n: int) -> np.ndarray:
    tensor = np.asarray(values, dtype=complex).reshape((q,) * n)
    for axis in range(n):
        tensor = np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(-1)


def _tensor_power(g: np.ndarray, n: int) -> np.ndarray:
    return functools.reduce(np.kron, [g] * n, np.ones(1, dtype=complex))


@dataclass(frozen=True, eq=False)
class AmplitudeFn:
    """
    Unit-norm complex function on F_q^n.

    kind "product" stores the symbol function g (f = g^{(x)n}), "dense"
    stores all q^n values, "rank" stores one amplitude per rank weight of
    the a x b matrix view. Dense values are materialized lazily.
    """

    field: FieldSpec
    n: int
    kind: Literal["product", "dense", "rank"]
    g: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    shape: Optional[tuple[int, int]] = None
    radial: Optional[np.ndarray] = None
    label: str = ""

    @classmethod
    def product(cls, field: FieldSpec, n: int, g, label: str = "") -> "AmplitudeFn":
        g = np.asarray(g, dtype=complex)
        if g.shape != (field.q,):
            raise NormError(f"symbol function needs {field.q} values, got {g.shape}")
        _check_norm(g, "symbol function")
        return cls(field=field, n=n, kind="product", g=g, label=label)

    @classmethod
    def dense_values(cls, field: FieldSpec, n: int, values, label: str = "") -> "AmplitudeFn":
        values = np.asarray(values, dtype=complex)
        if values.shape != (field.q**n,):
            raise NormError(f"dense function needs {field.q ** n} values, got {values.shape}")
        _check_norm(values, "dense function")
        return cls(field=field, n=n, kind="dense", values=values, label=label)

    @classmethod
    def rank(cls, field: FieldSpec, a: int, b: int, radial, label: str = "") -> "AmplitudeFn":
        radial = np.asarray(radial, dtype=complex)
        return cls(field=field, n=a * b, kind="rank", shape=(a, b), radial=radial, label=label)

    @property
    def dim(self) -> int:
        return self.field.q**self.n

    @functools.cached_property
    def dense(self) -> np.ndarray:
        """All q^n amplitudes in vector index order."""
        if self.kind == "dense":
            return self.values
        check_cap(self.dim, config.CAP_PRODUCT, "dense amplitude")
        if self.kind == "product":
            return _tensor_power(self.g, self.n)
        a, b = self.shape
        ranks = rank_weight_table(self.field.p, self.field.s, a, b)
        return self.radial[ranks]

    @functools.cached_property
    def spectrum(self) -> np.ndarray:
        """Dense f_hat in vector index order."""
        check_cap(self.dim, config.CAP_PRODUCT, "dense spectrum")
        if self.kind == "product":
            return _tensor_power(dft_product(self.field, self.g), self.n)
        return _symbolwise(fourier_matrix(self.field), self.dense, self.field.q, self.n)

    @functools.cached_property
    def power_spectrum(self) -> np.ndarray:
        """|f_hat|^2 in vector index order."""
        return np.abs(self.spectrum) ** 2

    @functools.cached_property
    def symbol_power(self) -> Optional[np.ndarray]:
        """|g_hat|^2 for product functions, None otherwise."""
        if self.kind != "product":
            return None
        return np.abs(dft_product(self.field, self.g)) ** 2

    def power_at(self, vectors: np.ndarray) -> np.ndarray:
        """|f_hat(y)|^2 for each row y, without densifying product functions."""
        vectors = np.atleast_2d(vectors)
        if self.kind == "product":
            return np.prod(self.symbol_power[vectors], axis=1)
        return self.power_spectrum[vector_index(self.field.q, vectors)]

    def norm(self) -> float:
        if self.kind == "product":
            return float(np.linalg.norm(self.g)) ** self.n
        return float(np.linalg.norm(self.dense))


@dataclass(frozen=True, eq=False)
class DenseState:
    """q^n complex amplitudes of a unit vector."""

    field: FieldSpec
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_norm(self.amplitudes, "state", config.NORM_TOL * 100)

    def overlap(self, other: "DenseState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_norm(values: np.ndarray, what: str, tol: float = INPUT_NORM_TOL) -> None:
    norm = float(np.linalg.norm(values))
    if abs(norm - 1.0) > tol:
        raise NormError(f"{what} has norm {norm:.15g}, expected 1")


def dft(f: AmplitudeFn) -> AmplitudeFn:
    """
    Fourier transform of f.

    Product functions stay in product form; the others are transformed densely.

    Args:
        f: Amplitude function.

    Returns:
        f_hat as an AmplitudeFn.
    """
    if f.kind == "product":
        return AmplitudeFn.product(f.field, f.n, dft_product(f.field, f.g), label=f"dft({f.label})")
    return AmplitudeFn.dense_values(f.field, f.n, f.spectrum, label=f"dft({f.label})")


def inverse_dft_values(field: FieldSpec, n: int, values: np.ndarray) -> np.ndarray:
    """Inverse transform of dense values."""
    check_cap(field.q**n, config.CAP_PRODUCT, "dense inverse transform")
    return _symbolwise(fourier_matrix(field, inverse=True), values, field.q, n)


def dft_values(field: FieldSpec, n: int, values: np.ndarray) -> np.ndarray:
    """Forward transform of dense values."""
    check_cap(field.q**n, config.CAP_PRODUCT, "dense transform")
    return _symbolwise(fourier_matrix(field), values, field.q, n)


def dft_product(field: FieldSpec, g) -> np.ndarray:
    """
    Per-symbol transform g_hat(y) = q^(-1/2) sum_x chi_y(x) g(x).

    Args:
        field: Ambient field.
        g: q complex values of unit norm.

    Returns:
        q complex values.
    """
    g = np.asarray(g, dtype=complex)
    _check_norm(g, "symbol function")
    return fourier_matrix(field) @ g


def inverse_dft_product(field: FieldSpec, g_hat) -> np.ndarray:
    """Per-symbol inverse transform."""
    g_hat = np.asarray(g_hat, dtype=complex)
    _check_norm(g_hat, "symbol spectrum")
    return fourier_matrix(field, inverse=True) @ g_hat


def shifted_state(c, f: AmplitudeFn) -> DenseState:
    """
    |psi_c> = sum_e f(e) |c + e>.

    Args:
        c: Shift vector of length n.
        f: Noise amplitude function.

    Returns:
        DenseState with amplitude f(e) at index c + e.
    """
    field = f.field
    c = as_vector(field, c)
    vectors = all_vectors(field.q, f.n)
    amplitudes = np.zeros(f.dim, dtype=complex)
    amplitudes[vector_index(field.q, field.add[c[None, :], vectors])] = f.dense
    return DenseState(field=field, n=f.n, amplitudes=amplitudes)


def qft_shifted_closed_form(c, f: AmplitudeFn) -> DenseState:
    """Fourier image of |psi_c>: sum_y f_hat(y) chi_c(y) |y>."""
    field = f.field
    c = as_vector(field, c)
    phases = field.chars[1][dot(field, all_vectors(field.q, f.n), c)]
    return DenseState(field=field, n=f.n, amplitudes=f.spectrum * phases)


def qft_state(state: DenseState) -> DenseState:
    """Dense Fourier transform of a state."""
    return DenseState(
        field=state.field,
        n=state.n,
        amplitudes=dft_values(state.field, state.n, state.amplitudes),
    )


def periodic_state(codewords: np.ndarray, f: AmplitudeFn) -> DenseState:
    """Normalized sum_{c in C} |psi_c>, the state whose transform lives on C_perp."""
    field = f.field
    total = np.zeros(f.dim, dtype=complex)
    for c in np.atleast_2d(codewords):
        total += shifted_state(c, f).amplitudes
    norm = np.linalg.norm(total)
    if norm == 0:
        raise NormError("periodic superposition vanishes")
    return DenseState(field=field, n=f.n, amplitudes=total / norm)

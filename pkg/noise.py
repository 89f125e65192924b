"""
Noise amplitude constructors for the QDP lab.

q-ary symmetric (Bernoulli) noise, Gibbs distributions induced by a symbol
weight, user tables, and the rank-metric amplitude f_t on a x b matrices
together with its subspace-superposition construction.
"""

import functools
import itertools
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import TypeAdapter, ValidationError
from scipy.optimize import bisect

import config
from fq_core import FieldSpec, all_vectors, dot, hamming_weights, make_field, rank_weights, vector_index
from schemas import (
    BernoulliNoiseSpec,
    GibbsNoiseSpec,
    NoiseSpec,
    RankNoiseSpec,
    TableNoiseSpec,
)
from spectral import AmplitudeFn, DenseState, inverse_dft_product
from utils import check_cap

logger = logging.getLogger(__name__)

SUBSPACE_ORACLE_CAP = 2**16


class NoiseSpecError(ValueError):
    """Raised for invalid noise parameters or specs."""

    pass


class InfeasibleNormalizationError(NoiseSpecError):
    """Raised when F(lambda) = 1 has no solution for the given weights."""

    pass


# q-ary symmetric noise


def bernoulli_g(field: FieldSpec, crossover: float) -> np.ndarray:
    """
    Symbol amplitudes of the q-ary symmetric channel.

    Args:
        field: Ambient field.
        crossover: Error probability p, 0 <= p < 1.

    Returns:
        g with g(0) = sqrt(1-p) and g(a) = sqrt(p/(q-1)) for a != 0.
    """
    if not 0.0 <= crossover < 1.0:
        raise NoiseSpecError(f"crossover must lie in [0, 1), got {crossover}")
    g = np.full(field.q, np.sqrt(crossover / (field.q - 1)), dtype=complex)
    g[0] = np.sqrt(1.0 - crossover)
    return g


def uniform_g(field: FieldSpec) -> np.ndarray:
    """Flat symbol amplitudes, whose transform is the point mass at 0."""
    return np.full(field.q, 1.0 / np.sqrt(field.q), dtype=complex)


# Gibbs noise


@dataclass(frozen=True, eq=False)
class GibbsNoise:
    """Per-symbol distribution r(a) = q^(-lam*|a|)/F(lam) placed on the dual side."""

    field_order: int
    weights: np.ndarray
    lam: float
    normalizer: float
    distribution: np.ndarray

    def symbol_amplitudes(self, field: FieldSpec) -> np.ndarray:
        """g whose transform is sqrt(r), so |g_hat|^2 = r."""
        return inverse_dft_product(field, np.sqrt(self.distribution))

    def weight_of(self, vectors: np.ndarray) -> np.ndarray:
        """|x| = sum_i |x_i| for every row."""
        return self.weights[np.atleast_2d(vectors)].sum(axis=1)

    def log_prob(self, vectors: np.ndarray) -> np.ndarray:
        """log_q p(x) for p = r^{(x)n}."""
        n = np.atleast_2d(vectors).shape[1]
        return -self.lam * self.weight_of(vectors) - n * np.log(self.normalizer) / np.log(self.field_order)


def _partition_sum(weights: np.ndarray, q: int, lam: float) -> float:
    return float(np.sum(np.power(float(q), -lam * weights)))


def solve_lambda(
    weights,
    mode: Literal["gibbs", "unit-sum"] = "gibbs",
    lam: Optional[float] = None,
) -> GibbsNoise:
    """
    Normalize the weight-induced distribution q^(-lam*|a|).

    Mode "gibbs" takes the user lam and divides by F(lam). Mode
    "unit-sum" solves F(lam) = 1 by bisection, which is only possible
    when every weight is positive (a zero weight keeps F(lam) >= 1).

    Args:
        weights: q nonnegative symbol weights, at least one positive.
        mode: Normalization mode.
        lam: Rate for mode "gibbs".

    Returns:
        GibbsNoise with the rate used and the normalized distribution.
    """
    weights = np.asarray(weights, dtype=float)
    q = len(weights)
    if q < 2 or np.any(weights < 0) or not np.any(weights > 0):
        raise NoiseSpecError("weights must be nonnegative with at least one positive entry")

    if mode == "gibbs":
        if lam is None or lam <= 0:
            raise NoiseSpecError(f"gibbs mode needs lambda > 0, got {lam}")
    elif mode == "unit-sum":
        if np.any(weights == 0):
            raise InfeasibleNormalizationError(
                "F(lambda) > 1 for every lambda when a symbol has weight 0; "
                "use the gibbs normalization instead"
            )
        high = 1.0
        while _partition_sum(weights, q, high) >= 1.0:
            high *= 2.0
        lam = bisect(lambda x: _partition_sum(weights, q, x) - 1.0, 0.0, high, xtol=1e-15)
        logger.debug("Solved F(lambda) = 1 at lambda=%.15g", lam)
    else:
        raise NoiseSpecError(f"unknown normalization mode {mode!r}")

    unnormalized = np.power(float(q), -lam * weights)
    normalizer = float(unnormalized.sum())
    return GibbsNoise(
        field_order=q,
        weights=weights,
        lam=float(lam),
        normalizer=normalizer,
        distribution=unnormalized / normalizer,
    )


def gibbs_weight_threshold(gibbs: GibbsNoise, n: int, log_threshold: float) -> float:
    """
    Weight bound equivalent to a probability threshold.

    p(y) >= q^(-tau) holds exactly when |y| <= (tau - n*log_q F(lam)) / lam,
    since log_q p(y) = -lam*|y| - n*log_q F(lam).

    Args:
        gibbs: The Gibbs family.
        n: Vector length.
        log_threshold: tau, e.g. n*(H + eps).

    Returns:
        Largest admissible weight (real).
    """
    log_f = np.log(gibbs.normalizer) / np.log(gibbs.field_order)
    return (log_threshold - n * log_f) / gibbs.lam


# Rank-metric noise


def gaussian_binomial(b: int, t: int, field: FieldSpec) -> int:
    """
    Number of t-dimensional subspaces of F_q^b.

    Args:
        b: Ambient dimension.
        t: Subspace dimension, t >= 0.
        field: Supplies q.

    Returns:
        prod_{i<t} (q^b - q^i)/(q^t - q^i), or 0 when t > b.
    """
    if t < 0:
        raise NoiseSpecError(f"subspace dimension must be >= 0, got {t}")
    if t > b:
        return 0
    q = field.q
    numerator = 1
    denominator = 1
    for i in range(t):
        numerator *= q**b - q**i
        denominator *= q**t - q**i
    return numerator // denominator


def sphere_size_rank(a: int, b: int, u: int, field: FieldSpec) -> int:
    """Number of a x b matrices over F_q of rank u."""
    if not 0 <= u <= min(a, b):
        return 0
    q = field.q
    count = gaussian_binomial(b, u, field)
    for i in range(u):
        count *= q**a - q**i
    return count


@dataclass(frozen=True, eq=False)
class RankNoiseParams:
    """
    Rank noise f_t on a x b matrices.

    rows x cols is the caller's matrix layout; a >= b are the swapped
    dimensions the amplitude formula uses. Z is kept exactly.
    """

    field: FieldSpec
    rows: int
    cols: int
    t: int
    z_exact: Fraction

    @property
    def a(self) -> int:
        return max(self.rows, self.cols)

    @property
    def b(self) -> int:
        return min(self.rows, self.cols)

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def transposed(self) -> bool:
        return self.rows < self.cols

    @property
    def Z(self) -> float:
        return float(self.z_exact)

    def binomial(self, top: int, bottom: int) -> int:
        return _gaussian_binomial_cached(self.field.p, self.field.s, top, bottom)

    def sphere_sizes(self) -> list[int]:
        """S_u for u = 0..b."""
        return [sphere_size_rank(self.a, self.b, u, self.field) for u in range(self.b + 1)]

    def radial(self) -> np.ndarray:
        """f_t as a function of rank weight 0..b."""
        return _rank_radial(self.field, self.a, self.b, self.t)

    def dual(self) -> "RankNoiseParams":
        """Parameters of f_{b-t}."""
        return make_rank_params(self.field, self.rows, self.cols, self.b - self.t)


@functools.lru_cache(maxsize=None)
def _gaussian_binomial_cached(p: int, s: int, top: int, bottom: int) -> int:
    return gaussian_binomial(top, bottom, make_field(p, s))


def _rank_numerators(field: FieldSpec, a: int, b: int, t: int) -> list[int]:
    return [
        _gaussian_binomial_cached(field.p, field.s, b - u, t - u) if u <= t else 0
        for u in range(b + 1)
    ]


def _rank_radial(field: FieldSpec, a: int, b: int, t: int) -> np.ndarray:
    numerators = _rank_numerators(field, a, b, t)
    spheres = [sphere_size_rank(a, b, u, field) for u in range(b + 1)]
    total = sum(s * c * c for s, c in zip(spheres, numerators))
    return np.array(numerators, dtype=float) / np.sqrt(float(total))


def make_rank_params(field: FieldSpec, rows: int, cols: int, t: int) -> RankNoiseParams:
    """
    Validate rank-noise parameters and compute the exact normalizer Z.

    Z is defined by sum_e |f_t(e)|^2 = 1, i.e.
    q^(a t) Z = sum_u S_u [b-u choose t-u]_q^2, summed over rank shells.

    Args:
        field: Ambient field.
        rows: Rows of the matrix view.
        cols: Columns of the matrix view.
        t: Target rank, 0 <= t <= min(rows, cols).

    Returns:
        RankNoiseParams.
    """
    if rows < 1 or cols < 1:
        raise NoiseSpecError(f"matrix shape must be positive, got {rows}x{cols}")
    a, b = max(rows, cols), min(rows, cols)
    if not 0 <= t <= b:
        raise NoiseSpecError(f"target rank must lie in 0..{b}, got {t}")
    numerators = _rank_numerators(field, a, b, t)
    total = sum(sphere_size_rank(a, b, u, field) * c * c for u, c in enumerate(numerators))
    return RankNoiseParams(
        field=field,
        rows=rows,
        cols=cols,
        t=t,
        z_exact=Fraction(total, field.q ** (a * t)),
    )


def rank_noise(params: RankNoiseParams) -> AmplitudeFn:
    """
    Radial amplitude f_t(e) = [b-|e| choose t-|e|]_q / sqrt(q^(a t) Z).

    Args:
        params: Rank noise parameters.

    Returns:
        AmplitudeFn of kind "rank"; dense values are materialized on demand.
    """
    return AmplitudeFn.rank(
        params.field,
        params.rows,
        params.cols,
        params.radial(),
        label=f"rank(a={params.rows},b={params.cols},t={params.t})",
    )


def enumerate_subspaces(field: FieldSpec, b: int, t: int):
    """
    Yield a reduced echelon basis of every t-dimensional subspace of F_q^b.

    Args:
        field: Ambient field.
        b: Ambient dimension.
        t: Subspace dimension.

    Yields:
        (t, b) int arrays.
    """
    q = field.q
    for pivots in itertools.combinations(range(b), t):
        free = [(i, j) for i in range(t) for j in range(pivots[i] + 1, b) if j not in pivots]
        for entries in itertools.product(range(q), repeat=len(free)):
            basis = np.zeros((t, b), dtype=np.int64)
            basis[np.arange(t), list(pivots)] = 1
            for (i, j), value in zip(free, entries):
                basis[i, j] = value
            yield basis


def rank_noise_subspace_oracle(params: RankNoiseParams) -> DenseState:
    """
    Build f_t as a normalized superposition over t-dimensional subspaces.

    Each subspace V of F_q^b contributes |pi_V>, the a-fold tensor power of
    the uniform superposition over V, placed on the rows of the a x b view.

    Args:
        params: Rank noise parameters.

    Returns:
        DenseState in the caller's matrix layout.
    """
    field = params.field
    q, a, b, t = field.q, params.a, params.b, params.t
    check_cap(q ** (a * b), min(SUBSPACE_ORACLE_CAP, config.CAP_PRODUCT), "subspace oracle")

    total = np.zeros(q ** (a * b), dtype=complex)
    count = 0
    for basis in enumerate_subspaces(field, b, t):
        members = dot(field, all_vectors(q, t), basis) if t else np.zeros((1, b), dtype=np.int64)
        row_state = np.zeros(q**b, dtype=complex)
        row_state[vector_index(q, members)] = q ** (-t / 2)
        total += functools.reduce(np.kron, [row_state] * a)
        count += 1
    logger.debug("Subspace oracle summed %d subspaces of dimension %d in F_%d^%d", count, t, q, b)

    amplitudes = total / np.linalg.norm(total)
    if params.transposed:
        # internal layout is a x b; the caller reads b x a
        tensor = amplitudes.reshape((q,) * (a * b))
        perm = [j * b + i for i in range(b) for j in range(a)]
        amplitudes = np.transpose(tensor, perm).reshape(-1)
    return DenseState(field=field, n=a * b, amplitudes=amplitudes)


# Noise specs


def parse_noise_spec(text: str) -> NoiseSpec:
    """
    Parse a noise spec from JSON or a preset string.

    Presets: preset:noiseless, preset:uniform, preset:bernoulli:<p>,
    preset:gibbs-hamming:<lambda>, preset:rank:<a>:<b>:<t>.

    Args:
        text: JSON object or preset.

    Returns:
        Validated NoiseSpec model.
    """
    text = text.strip()
    if text.startswith("preset:"):
        parts = text.split(":")[1:]
        name, args = parts[0], parts[1:]
        try:
            if name == "noiseless":
                return BernoulliNoiseSpec(p=0.0)
            if name == "uniform":
                return TableNoiseSpec(re=[], im=[], uniform=True)
            if name == "bernoulli":
                return BernoulliNoiseSpec(p=float(args[0]))
            if name == "gibbs-hamming":
                return GibbsNoiseSpec(weights=None, lam=float(args[0]))
            if name == "rank":
                return RankNoiseSpec(a=int(args[0]), b=int(args[1]), t=int(args[2]))
        except (IndexError, ValueError, ValidationError) as e:
            raise NoiseSpecError(f"bad preset {text!r}: {e}") from e
        raise NoiseSpecError(f"unknown preset {name!r}")
    try:
        return TypeAdapter(NoiseSpec).validate_python(json.loads(text))
    except (json.JSONDecodeError, ValidationError) as e:
        raise NoiseSpecError(f"bad noise spec {text!r}: {e}") from e


def gibbs_from_spec(field: FieldSpec, spec: GibbsNoiseSpec) -> GibbsNoise:
    """Gibbs family of a spec; missing weights mean Hamming weight."""
    weights = spec.weights if spec.weights is not None else [0] + [1] * (field.q - 1)
    if len(weights) != field.q:
        raise NoiseSpecError(f"gibbs weights need {field.q} entries, got {len(weights)}")
    return solve_lambda(weights, mode=spec.mode, lam=spec.lam)


def noise_from_spec(field: FieldSpec, n: int, spec: NoiseSpec) -> AmplitudeFn:
    """
    Amplitude function described by a noise spec.

    Args:
        field: Ambient field.
        n: Vector length; rank specs require n = a*b.
        spec: Parsed noise spec.

    Returns:
        AmplitudeFn (product kind except for rank noise).
    """
    if isinstance(spec, BernoulliNoiseSpec):
        return AmplitudeFn.product(field, n, bernoulli_g(field, spec.p), label=f"bernoulli({spec.p})")
    if isinstance(spec, TableNoiseSpec):
        if spec.uniform:
            return AmplitudeFn.product(field, n, uniform_g(field), label="uniform")
        if len(spec.re) != field.q or len(spec.im) not in (0, field.q):
            raise NoiseSpecError(f"table needs {field.q} real (and imaginary) parts")
        g = np.asarray(spec.re, dtype=float) + 1j * np.asarray(spec.im or [0.0] * field.q, dtype=float)
        return AmplitudeFn.product(field, n, g, label="table")
    if isinstance(spec, GibbsNoiseSpec):
        gibbs = gibbs_from_spec(field, spec)
        return AmplitudeFn.product(field, n, gibbs.symbol_amplitudes(field), label=f"gibbs({gibbs.lam:g})")
    if isinstance(spec, RankNoiseSpec):
        if spec.a * spec.b != n:
            raise NoiseSpecError(f"rank noise {spec.a}x{spec.b} needs n={spec.a * spec.b}, got n={n}")
        return rank_noise(make_rank_params(field, spec.a, spec.b, spec.t))
    raise NoiseSpecError(f"unsupported noise spec {spec!r}")


def noise_weight_function(field: FieldSpec, spec: NoiseSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Weight under which the noise's dual distribution is decreasing."""
    if isinstance(spec, RankNoiseSpec):
        return lambda vectors: rank_weights(field, vectors, spec.a, spec.b)
    if isinstance(spec, GibbsNoiseSpec):
        return gibbs_from_spec(field, spec).weight_of
    return hamming_weights


def describe_noise(spec: NoiseSpec) -> tuple[str, str]:
    """(noise_kind, noise_param) strings for CSV rows."""
    if isinstance(spec, BernoulliNoiseSpec):
        return "bernoulli", f"p={spec.p:g}"
    if isinstance(spec, TableNoiseSpec):
        return "table", "uniform" if spec.uniform else "custom"
    if isinstance(spec, GibbsNoiseSpec):
        return "gibbs", f"lambda={spec.lam:g}" if spec.lam is not None else f"lambda=solved;mode={spec.mode}"
    return "rank", f"a={spec.a};b={spec.b};t={spec.t}"

"""
Pretty Good Measurement for the quantum decoding problem.

The states |psi_c> = sum_e f(e)|c+e> of a code C are discriminated in the
Fourier basis, where |psi_hat_c> = sum_s chi_c(u_s) Z_s |W_s> splits over
the cosets s + C_perp. The success probability has the closed form
P_PGM = (sum_s Z_s)^2 / |C|; a dense eigendecomposition oracle checks it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import scipy.linalg

import config
from analysis import TypicalSetSpec, extract_family_constants, typical_set_for
from codes import LinearCode, coset_representatives, ensemble_kernel_sums
from fq_core import FieldSpec, all_vectors, as_vector, dot, vector_index
from spectral import AmplitudeFn, qft_shifted_closed_form
from utils import check_cap, derive_seed

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
MASS_TOL = 1e-10


class PreconditionError(ValueError):
    """Raised when an operation's parameter preconditions do not hold."""

    pass


class ConsistencyError(RuntimeError):
    """Raised when two computations of the same quantity disagree."""

    pass


@dataclass(frozen=True, eq=False)
class PgmReport:
    """Coset masses and the closed-form PGM success probability."""

    code: LinearCode
    noise: AmplitudeFn
    masses: np.ndarray
    success: float

    @property
    def k_eff(self) -> int:
        return self.code.rank

    @property
    def guessing(self) -> float:
        """q^(-k_eff), the success of a blind guess."""
        return 1.0 / self.code.size

    @property
    def codeword_success(self) -> float:
        """Per-codeword success p_c; the same for every c by geometric uniformity."""
        return self.success

    @property
    def mass_residual(self) -> float:
        """|sum_s Z_s^2 - 1|."""
        return abs(float(np.sum(self.masses**2)) - 1.0)


def _check_compatible(code: LinearCode, f: AmplitudeFn) -> None:
    if code.field.q != f.field.q or code.n != f.n:
        raise PreconditionError(
            f"code over F_{code.field.q}^{code.n} does not match noise over F_{f.field.q}^{f.n}"
        )


def coset_masses(code: LinearCode, f: AmplitudeFn) -> np.ndarray:
    """
    Z_s = sqrt(sum over s + C_perp of |f_hat|^2) for every syndrome index.

    Index s corresponds to the syndrome vector all_vectors(q, rank)[s].

    Args:
        code: The code.
        f: Noise amplitude.

    Returns:
        Array of |C| nonnegative masses.
    """
    _check_compatible(code, f)
    check_cap(f.dim, config.CAP_PRODUCT, "coset masses")
    squared = np.bincount(code.syndrome_table, weights=f.power_spectrum, minlength=code.num_syndromes)
    return np.sqrt(squared)


def pgm_success(code: LinearCode, f: AmplitudeFn) -> PgmReport:
    """
    Closed-form PGM success probability (sum_s Z_s)^2 / |C|.

    Args:
        code: The code.
        f: Noise amplitude.

    Returns:
        PgmReport.
    """
    masses = coset_masses(code, f)
    success = float(masses.sum() ** 2 / code.size)
    report = PgmReport(code=code, noise=f, masses=masses, success=success)
    if report.mass_residual > MASS_TOL:
        logger.warning("Coset masses sum to %.15g instead of 1", 1.0 - report.mass_residual)
    logger.debug("P_PGM=%.12g for n=%d rank=%d (%s)", success, code.n, code.rank, f.label)
    return report


def _fourier_states(code: LinearCode, f: AmplitudeFn) -> tuple[np.ndarray, np.ndarray]:
    """Codewords and the matrix whose row c is psi_hat_c(y) = f_hat(y) chi_c(y)."""
    field = code.field
    words = code.codewords()
    phases = field.chars[1][dot(field, words, all_vectors(field.q, code.n).T)]
    return words, phases * f.spectrum[None, :]


def pgm_dense_per_codeword(code: LinearCode, f: AmplitudeFn) -> np.ndarray:
    """
    Per-codeword success <psi_c|M_c|psi_c> from an explicit rho^(-1/2).

    rho = sum_c |psi_hat_c><psi_hat_c| is diagonalized with scipy.linalg.eigh;
    eigenvalues at or below KERNEL_TOL are treated as kernel.

    Args:
        code: The code.
        f: Noise amplitude.

    Returns:
        Array of |C| success probabilities in codeword order.
    """
    _check_compatible(code, f)
    check_cap(f.dim, config.CAP_DENSE, "dense PGM oracle")
    _, states = _fourier_states(code, f)
    rho = states.T @ states.conj()
    asymmetry = float(np.max(np.abs(rho - rho.conj().T)))
    if asymmetry > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(rho)))):
        raise ConsistencyError(f"rho is not Hermitian: max asymmetry {asymmetry:.3g}")

    eigenvalues, vectors = scipy.linalg.eigh(rho)
    support = eigenvalues > config.KERNEL_TOL
    inv_sqrt = (vectors[:, support] / np.sqrt(eigenvalues[support])) @ vectors[:, support].conj().T
    overlaps = np.einsum("ci,ij,cj->c", states.conj(), inv_sqrt, states)
    return np.abs(overlaps) ** 2


def pgm_dense_oracle(code: LinearCode, f: AmplitudeFn) -> float:
    """Mean per-codeword success of the dense PGM."""
    return float(np.mean(pgm_dense_per_codeword(code, f)))


def coset_basis(code: LinearCode, f: AmplitudeFn, representatives: np.ndarray) -> np.ndarray:
    """
    Dense orthonormal coset vectors W_s as columns.

    W_s is f_hat restricted to s + C_perp and normalized; a coset of zero
    mass gets |u_s> instead.

    Args:
        code: The code.
        f: Noise amplitude.
        representatives: (|C|, n) table, row s is u_s.

    Returns:
        (q^n, |C|) complex array.
    """
    masses = coset_masses(code, f)
    table = code.syndrome_table
    basis = np.zeros((f.dim, code.num_syndromes), dtype=complex)
    positions = np.arange(f.dim)
    nonzero = masses[table] > 0
    basis[positions[nonzero], table[nonzero]] = f.spectrum[nonzero] / masses[table[nonzero]]
    empty = np.flatnonzero(masses == 0)
    if len(empty):
        basis[vector_index(code.field.q, representatives[empty]), empty] = 1.0
    return basis


def pgm_success_from_representatives(
    code: LinearCode,
    f: AmplitudeFn,
    representatives: Optional[np.ndarray] = None,
) -> float:
    """
    P_PGM through rho^(-1/2)|psi_hat_c> = |C|^(-1/2) sum_s chi_c(u_s) |W_s>.

    The overlaps <psi_hat_c|W_s> are evaluated densely, so the result depends
    on the representative table only through phases and must not change
    when the table does.

    Args:
        code: The code.
        f: Noise amplitude.
        representatives: Table from codes.coset_representatives; pivot rule when omitted.

    Returns:
        Mean per-codeword success.
    """
    _check_compatible(code, f)
    check_cap(f.dim, config.CAP_DENSE, "representative reconstruction")
    field = code.field
    reps = coset_representatives(code) if representatives is None else np.asarray(representatives)
    if reps.shape != (code.num_syndromes, code.n):
        raise PreconditionError(f"representative table must have shape {(code.num_syndromes, code.n)}")
    if np.any(code.syndrome_table[vector_index(field.q, reps)] != np.arange(code.num_syndromes)):
        raise PreconditionError("representative table does not match the syndrome map")

    words, states = _fourier_states(code, f)
    basis = coset_basis(code, f, reps)
    overlaps = states.conj() @ basis
    phases = field.chars[1][dot(field, words, reps.T)]
    amplitudes = (phases * overlaps).sum(axis=1) / math.sqrt(code.size)
    return float(np.mean(np.abs(amplitudes) ** 2))


# Code ensembles


@dataclass(frozen=True)
class ZtildeMoments:
    """Ensemble moments of the truncated coset mass Z_s(eps)^2."""

    mean: float
    variance: float
    exact_mean: float
    variance_bound: float
    count: int


def _typical_table(f: AmplitudeFn, spec: TypicalSetSpec) -> tuple[np.ndarray, np.ndarray]:
    check_cap(f.dim, config.CAP_PRODUCT, "typical set enumeration")
    vectors = all_vectors(f.field.q, f.n)
    inside = spec.contains(vectors)
    return vectors[inside], f.power_spectrum[inside]


def _family_constants(spec: TypicalSetSpec) -> tuple[float, float, float, float]:
    alpha = spec.alpha if spec.alpha is not None else spec.eps
    beta = spec.beta if spec.beta is not None else spec.eps
    if spec.K1 is not None and spec.K2 is not None:
        return alpha, beta, spec.K1, spec.K2
    k1, k2 = extract_family_constants([spec], spec.rate, alpha, beta)
    return alpha, beta, k1, k2


def ztilde_moments(
    field: FieldSpec,
    n: int,
    k: int,
    f: AmplitudeFn,
    eps: float,
    s,
    mode: Literal["exhaustive", "montecarlo"] = "exhaustive",
    trials: int = 10_000,
    seed: int = 0,
) -> ZtildeMoments:
    """
    Mean and variance of Z_s(eps)^2 = sum over T cap (s + C_perp) of p(y).

    C_perp = ker G for a uniform G in F_q^{k x n}. The exact mean is
    (p(T) - [s in T] p(s)) / q^k + [s in T] p(s); the variance bound is
    (q K2^2 / K1) q^(-n(H - 2 beta - alpha)) / q^k.

    Args:
        field: Ambient field.
        n: Code length.
        k: Generator rows.
        f: Noise amplitude (product or rank) with p = |f_hat|^2.
        eps: Typical-set slack.
        s: Coset shift, a vector of F_q^n.
        mode: "exhaustive" enumerates every G; "montecarlo" samples trials of them.
        trials: Monte Carlo trials.
        seed: Monte Carlo master seed.

    Returns:
        ZtildeMoments.
    """
    if f.n != n or f.field.q != field.q:
        raise PreconditionError("noise does not live on F_q^n")
    spec = typical_set_for(f, eps)
    members, weights = _typical_table(f, spec)
    s = as_vector(field, s)
    targets = field.add[members, field.neg[s][None, :]]

    if mode == "exhaustive":
        sums = ensemble_kernel_sums(field, n, k, targets, weights)
    elif mode == "montecarlo":
        sums = np.empty(trials)
        for trial in range(trials):
            rng = np.random.default_rng(derive_seed(seed, trial))
            G = rng.integers(0, field.q, size=(k, n), dtype=np.int64)
            inside = ~dot(field, targets, G.T).any(axis=1)
            sums[trial] = weights[inside].sum()
    else:
        raise PreconditionError(f"unknown mode {mode!r}")

    p_typical = float(weights.sum())
    s_inside = bool(spec.contains(s[None, :])[0])
    p_s = float(f.power_at(s[None, :])[0]) if s_inside else 0.0
    exact_mean = (p_typical - p_s) / field.q**k + p_s

    alpha, beta, k1, k2 = _family_constants(spec)
    variance_bound = (field.q * k2**2 / k1) * field.q ** (-n * (spec.rate - 2 * beta - alpha)) / field.q**k
    moments = ZtildeMoments(
        mean=float(sums.mean()),
        variance=float(sums.var()),
        exact_mean=exact_mean,
        variance_bound=float(variance_bound),
        count=len(sums),
    )
    logger.debug("Ztilde moments n=%d k=%d eps=%g mode=%s: %s", n, k, eps, mode, moments)
    return moments


def concentration_check(
    field: FieldSpec,
    n: int,
    k: int,
    f: AmplitudeFn,
    eps: float,
    trials: int,
    seed: int,
    s=None,
) -> float:
    """
    Fraction of sampled G with Z_s(eps)^2 >= (1 - delta - q^(-(H-R)n/8)) / q^k.

    Args:
        field: Ambient field.
        n: Code length.
        k: Generator rows, R = k/n.
        f: Noise amplitude.
        eps: Typical-set slack; needs 2 beta + alpha <= (H - R)/2.
        trials: Sampled generator matrices.
        seed: Master seed.
        s: Coset shift; the zero vector when omitted.

    Returns:
        Fraction of trials meeting the threshold.
    """
    spec = typical_set_for(f, eps)
    alpha, beta, _, _ = _family_constants(spec)
    gap = spec.rate - k / n
    if gap <= 0:
        raise PreconditionError(f"rate {k / n:.4g} is not below the entropy rate {spec.rate:.4g}")
    if 2 * beta + alpha > gap / 2:
        raise PreconditionError(f"eps={eps} too large: 2*beta + alpha = {2 * beta + alpha:.4g} > {gap / 2:.4g}")

    members, weights = _typical_table(f, spec)
    shift = np.zeros(n, dtype=np.int64) if s is None else as_vector(field, s)
    targets = field.add[members, field.neg[shift][None, :]]
    threshold = (1.0 - spec.defect - field.q ** (-gap * n / 8)) / field.q**k

    hits = 0
    for trial in range(trials):
        rng = np.random.default_rng(derive_seed(seed, trial))
        G = rng.integers(0, field.q, size=(k, n), dtype=np.int64)
        inside = ~dot(field, targets, G.T).any(axis=1)
        hits += weights[inside].sum() >= threshold
    fraction = hits / trials
    logger.info("Concentration n=%d k=%d eps=%g: %.4f of %d codes above threshold", n, k, eps, fraction, trials)
    return fraction


# Converse


def truncated_fidelity(code: LinearCode, f: AmplitudeFn, T: TypicalSetSpec, c) -> float:
    """
    <psi_hat_c|psi_tilde_c>, psi_tilde_c being psi_hat_c restricted to T and renormalized.

    Equals sqrt(1 - delta) for every codeword c.

    Args:
        code: The code.
        f: Noise amplitude.
        T: Typical set of |f_hat|^2.
        c: A codeword.

    Returns:
        Real fidelity.
    """
    _check_compatible(code, f)
    c = as_vector(code.field, c)
    if code.H.shape[0] and dot(code.field, code.H, c).any():
        raise PreconditionError("c is not a codeword")
    amplitudes = qft_shifted_closed_form(c, f).amplitudes
    restricted = np.where(T.contains(all_vectors(code.field.q, code.n)), amplitudes, 0.0)
    mass = float(np.vdot(restricted, restricted).real)
    if mass == 0.0:
        raise PreconditionError("typical set carries no mass")
    return float(np.vdot(amplitudes, restricted / math.sqrt(mass)).real)


def distinguishability_bound(N: int, K: int) -> float:
    """Success bound min(1, K/N) for N states in a K-dimensional space."""
    if N < 1 or K < 0:
        raise PreconditionError(f"need N >= 1 and K >= 0, got N={N}, K={K}")
    return min(1.0, K / N)


def converse_bound(code: LinearCode, f: AmplitudeFn, eps: float, p_pgm: Optional[float] = None) -> float:
    """
    Upper bound min(1, |T|/|C|) + sqrt(delta) on any measurement's success.

    Args:
        code: The code.
        f: Noise amplitude (product or rank).
        eps: Typical-set slack.
        p_pgm: Optional closed-form P_PGM, checked against the bound.

    Returns:
        The bound.
    """
    _check_compatible(code, f)
    spec = typical_set_for(f, eps)
    bound = distinguishability_bound(code.size, spec.cardinality) + math.sqrt(spec.defect)
    if p_pgm is not None and p_pgm > bound + 1e-10:
        raise ConsistencyError(f"P_PGM={p_pgm:.12g} exceeds the converse bound {bound:.12g}")
    return bound

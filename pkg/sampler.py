"""
Dual-codeword sampler: Regev's reduction driven by a tweaked PGM.

When the first register reads 0 the pipeline leaves the state |U_0>, the
normalized restriction of f_hat to the nonzero dual codewords, so a final
measurement returns y in (C_perp)* with probability
q(y) = |f_hat(y)|^2 / sum over (C_perp)* of |f_hat|^2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

import config
from analysis import TypicalSetSpec, typical_set_for
from codes import LinearCode, coset_representatives, dual, min_weight_codeword, random_code
from fq_core import FieldSpec, all_vectors, dot, vector_index
from pgm import ConsistencyError, PreconditionError, coset_basis, pgm_success
from spectral import AmplitudeFn
from utils import check_cap, derive_seed

logger = logging.getLogger(__name__)

__all__ = [
    "ConsistencyError",
    "DualSamplerModel",
    "PipelineResult",
    "ScanResult",
    "SeedOutcome",
    "ZeroDualMassError",
    "dual_distribution",
    "ensemble_typical_mass",
    "max_prob_dual_scan",
    "min_weight_experiment",
    "min_weight_trial",
    "most_likely_dual",
    "regev_pipeline_oracle",
    "sample_dual",
    "success_floor",
    "typicality_of_samples",
    "zero_branch_probability",
]

ZERO_MASS_TOL = 1e-24
ORACLE_TOL = 1e-10


class ZeroDualMassError(ValueError):
    """Raised when f_hat vanishes on every nonzero dual codeword."""

    pass


@dataclass(frozen=True, eq=False)
class DualSamplerModel:
    """Exact output law q(y) of the tweaked sampler on (C_perp)*."""

    code: LinearCode
    noise: AmplitudeFn
    support: np.ndarray
    probabilities: np.ndarray
    dual_mass: float
    p_pgm: float
    success_floor: float

    def dense(self) -> np.ndarray:
        """q(y) scattered over all of F_q^n."""
        check_cap(self.noise.dim, config.CAP_PRODUCT, "dense dual distribution")
        out = np.zeros(self.noise.dim)
        out[vector_index(self.code.field.q, self.support)] = self.probabilities
        return out


def _floor(p_pgm: float, size: int) -> float:
    return float(np.clip((math.sqrt(p_pgm) - size**-0.5) ** 2, 0.0, 1.0))


def success_floor(code: LinearCode, f: AmplitudeFn, p_pgm: Optional[float] = None) -> float:
    """
    (sqrt(P_PGM) - q^(-k_eff/2))^2 clamped to [0, 1].

    Args:
        code: The code.
        f: Noise amplitude.
        p_pgm: Precomputed P_PGM, computed when omitted.

    Returns:
        Lower bound on the probability of reaching |U_0>.
    """
    if p_pgm is None:
        p_pgm = pgm_success(code, f).success
    return _floor(p_pgm, code.size)


def dual_distribution(code: LinearCode, f: AmplitudeFn) -> DualSamplerModel:
    """
    Exact sampler law q(y) over the nonzero dual codewords.

    Args:
        code: The code; C_perp must be enumerable.
        f: Noise amplitude.

    Returns:
        DualSamplerModel with the support in lexicographic order.
    """
    support = code.dual_codewords()[1:]
    weights = f.power_at(support) if len(support) else np.zeros(0)
    mass = float(weights.sum())
    if mass <= ZERO_MASS_TOL:
        raise ZeroDualMassError(f"f_hat has no mass on the {len(support)} nonzero dual codewords")
    p_pgm = pgm_success(code, f).success
    return DualSamplerModel(
        code=code,
        noise=f,
        support=support,
        probabilities=weights / mass,
        dual_mass=mass,
        p_pgm=p_pgm,
        success_floor=_floor(p_pgm, code.size),
    )


def zero_branch_probability(code: LinearCode, f: AmplitudeFn) -> float:
    """
    q^(-k_eff) (sum_s Z_s - Z_0 + sqrt(M))^2, the chance the first register reads 0.

    M is the mass of |f_hat|^2 on (C_perp)*. The value is never below the success floor.
    """
    report = pgm_success(code, f)
    support = code.dual_codewords()[1:]
    mass = float(f.power_at(support).sum()) if len(support) else 0.0
    return float((report.masses.sum() - report.masses[0] + math.sqrt(mass)) ** 2 / code.size)


def sample_dual(model: DualSamplerModel, count: int, seed: int) -> np.ndarray:
    """
    Draw count i.i.d. dual codewords from q(y).

    Args:
        model: Sampler model.
        count: Number of draws.
        seed: Generator seed.

    Returns:
        (count, n) array.
    """
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(model.probabilities), size=count, p=model.probabilities)
    return model.support[picks]


def most_likely_dual(model: DualSamplerModel) -> np.ndarray:
    """argmax of q(y); ties go to the lexicographically first codeword."""
    return model.support[int(np.argmax(model.probabilities))]


def typicality_of_samples(model: DualSamplerModel, T: TypicalSetSpec) -> float:
    """Exact q-mass of T cap (C_perp)*, i.e. p(T cap (C_perp)*) / p((C_perp)*)."""
    if T.n != model.code.n or T.q != model.code.field.q:
        raise PreconditionError("typical set and code live on different spaces")
    return float(model.probabilities[T.contains(model.support)].sum())


def ensemble_typical_mass(f: AmplitudeFn, T: TypicalSetSpec) -> float:
    """
    p(T minus 0) / p(F_q^n minus 0), the ratio of ensemble means.

    Every nonzero y lies in C_perp with probability q^(-k) over uniform G, so
    the factor cancels and the value does not depend on k.
    """
    zero = np.zeros((1, f.n), dtype=np.int64)
    p_zero = float(f.power_at(zero)[0])
    inside = p_zero if bool(T.contains(zero)[0]) else 0.0
    return (T.mass - inside) / (1.0 - p_zero)


# Dense pipeline


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Outcome of the dense pipeline simulation."""

    p_zero: float
    distribution: np.ndarray
    gram_residual: float
    span_residual: float


def _outside_code(code: LinearCode) -> np.ndarray:
    vectors = all_vectors(code.field.q, code.n)
    outside = np.flatnonzero(dot(code.field, vectors, code.H.T).any(axis=1)) if code.H.shape[0] else []
    if len(outside) == 0:
        raise ZeroDualMassError("C is the whole space; no extra outcome exists")
    return vectors[outside[0]]


def measurement_basis(
    code: LinearCode,
    f: AmplitudeFn,
    representatives: Optional[np.ndarray] = None,
    tweaked: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Rows of the coherent measurement basis and their outcome labels.

    Untweaked: Y_c = q^(-k/2) sum_s chi_c(u_s) W_s. Tweaked: Z_c replaces W_0
    by U_0 and the extra outcome u carries |0>.

    Args:
        code: The code.
        f: Noise amplitude.
        representatives: Coset representative table; pivot rule when omitted.
        tweaked: Use the Z_c basis.

    Returns:
        Tuple of (basis rows, label vectors); labels are the codewords, then u when tweaked.
    """
    field = code.field
    reps = coset_representatives(code) if representatives is None else representatives
    words = code.codewords()
    basis = coset_basis(code, f, reps).T
    phases = field.chars[1][dot(field, words, reps.T)]
    labels = words

    if tweaked:
        dual_mask = code.syndrome_table == 0
        dual_mask[0] = False
        restricted = np.where(dual_mask, f.spectrum, 0.0)
        norm = np.linalg.norm(restricted)
        if norm ** 2 <= ZERO_MASS_TOL:
            raise ZeroDualMassError("f_hat has no mass on the nonzero dual codewords")
        basis[0] = restricted / norm
        zero_state = np.zeros(f.dim, dtype=complex)
        zero_state[0] = 1.0
        rows = np.vstack([phases @ basis / math.sqrt(code.size), zero_state[None, :]])
        labels = np.vstack([words, _outside_code(code)[None, :]])
        return rows, labels
    return phases @ basis / math.sqrt(code.size), labels


def regev_pipeline_oracle(
    code: LinearCode,
    f: AmplitudeFn,
    representatives: Optional[np.ndarray] = None,
    tweaked: bool = True,
    check: bool = True,
) -> PipelineResult:
    """
    Dense simulation of the reduction with a coherent PGM.

    Register 1 holds c, register 2 the Fourier state psi_hat_c, register 3 the
    measurement label c'. After register 1 <- c - c' and uncomputing
    register 3, the branch where register 1 reads 0 is kept.

    Args:
        code: The code.
        f: Noise amplitude.
        representatives: Coset representative table.
        tweaked: Measure in the Z_c basis (zero codeword removed).
        check: Raise ConsistencyError if the outcome disagrees with q(y) or the floor.

    Returns:
        PipelineResult with the zero-branch probability and the final
        distribution over F_q^n.
    """
    check_cap(f.dim, config.CAP_DENSE, "pipeline oracle")
    field = code.field
    words = code.codewords()
    states = field.chars[1][dot(field, words, all_vectors(field.q, code.n).T)] * f.spectrum[None, :]

    rows, labels = measurement_basis(code, f, representatives, tweaked)
    gram = rows.conj() @ rows.T
    gram_residual = float(np.max(np.abs(gram - np.eye(len(rows)))))

    # alpha[c, j] = <B_j|psi_hat_c>
    alpha = states @ rows.conj().T
    span_residual = float(np.max(np.abs(alpha @ rows - states)))

    # register 1 after subtracting the label
    first = field.add[words[:, None, :], field.neg[labels][None, :, :]]
    zero = ~first.any(axis=2)
    branch = (alpha * zero) @ rows / math.sqrt(code.size)
    p_zero = float(np.vdot(branch, branch).real)
    distribution = np.abs(branch) ** 2 / p_zero if p_zero > 0 else np.zeros(f.dim)
    result = PipelineResult(
        p_zero=p_zero,
        distribution=distribution,
        gram_residual=gram_residual,
        span_residual=span_residual,
    )
    logger.debug(
        "Pipeline n=%d rank=%d tweaked=%s: p_zero=%.12g gram=%.3g span=%.3g",
        code.n,
        code.rank,
        tweaked,
        p_zero,
        gram_residual,
        span_residual,
    )

    if check and tweaked:
        model = dual_distribution(code, f)
        residual = float(np.max(np.abs(distribution - model.dense())))
        if residual > ORACLE_TOL:
            raise ConsistencyError(f"pipeline distribution differs from q(y) by {residual:.3g}")
        if p_zero < model.success_floor - ORACLE_TOL:
            raise ConsistencyError(f"p_zero={p_zero:.12g} below the floor {model.success_floor:.12g}")
    return result


# Experiments


@dataclass(frozen=True)
class ScanResult:
    """Fraction of codes whose dual holds an overly likely nonzero word."""

    fraction: float
    envelope: float
    trials: int


def max_prob_dual_scan(
    field: FieldSpec,
    n: int,
    R: float,
    f: AmplitudeFn,
    eps: float,
    trials: int,
    seed: int,
) -> ScanResult:
    """
    Fraction of random codes with some y in (C_perp)* of p(y) > q^(-n(R - eps)).

    The envelope is the union bound min(1, #{y != 0 : p(y) > tau} q^(-k)).

    Args:
        field: Ambient field.
        n: Code length.
        R: Rate, k = floor(R n).
        f: Noise amplitude with p = |f_hat|^2.
        eps: Slack below the rate.
        trials: Sampled codes.
        seed: Master seed.

    Returns:
        ScanResult.
    """
    if not 0.0 < R < 1.0:
        raise PreconditionError(f"rate must lie in (0, 1), got {R}")
    k = int(math.floor(R * n))
    if not 1 <= k < n:
        raise PreconditionError(f"rate {R} gives k={k} at n={n}")
    tau = field.q ** (-n * (R - eps))

    heavy = np.flatnonzero(f.power_spectrum[1:] > tau)
    envelope = min(1.0, len(heavy) * field.q ** (-k))

    hits = 0
    for trial in range(trials):
        code = random_code(field, n, k, derive_seed(seed, trial))
        duals = code.dual_codewords()[1:]
        hits += bool(len(duals)) and bool(np.any(f.power_at(duals) > tau))
    fraction = hits / trials
    logger.info("Max-probability scan n=%d k=%d: fraction %.4f, envelope %.4g", n, k, fraction, envelope)
    return ScanResult(fraction=fraction, envelope=envelope, trials=trials)


@dataclass(frozen=True)
class SeedOutcome:
    """Per-seed statistics of the minimum-weight experiment."""

    seed: int
    n: int
    k: int
    d_min: Optional[float]
    expected_weight: Optional[float]
    frac_within_margin: Optional[float]
    success_floor: Optional[float]
    p_zero_branch: Optional[float]
    exact_within_margin: Optional[float]
    typical_mass: Optional[float]
    status: str


def min_weight_trial(
    field: FieldSpec,
    n: int,
    k: int,
    f: AmplitudeFn,
    weight: Callable[[np.ndarray], np.ndarray],
    master_seed: int,
    index: int,
    samples: int,
    margin: int = config.WEIGHT_MARGIN,
    eps: Optional[float] = None,
) -> SeedOutcome:
    """
    One seed: draw a code, find the minimum dual weight and sample from q(y).

    The code seed is derive_seed(master_seed, index); sampling uses
    derive_seed(master_seed, index, 1).

    Args:
        field: Ambient field.
        n: Code length.
        k: Generator rows.
        f: Noise amplitude.
        weight: Weight in which |f_hat|^2 decreases.
        master_seed: Master seed.
        index: Seed index.
        samples: Draws from q(y).
        margin: Weight slack above d_min.
        eps: Typical-set slack; typical_mass is None when omitted.

    Returns:
        SeedOutcome; status "zero_dual_mass" when q(y) is undefined.
    """
    code_seed = derive_seed(master_seed, index)
    code = random_code(field, n, k, code_seed)
    _, d_min = min_weight_codeword(dual(code), weight)
    try:
        model = dual_distribution(code, f)
    except ZeroDualMassError:
        logger.warning("Seed %d: f_hat vanishes on the nonzero dual codewords", code_seed)
        return SeedOutcome(code_seed, n, k, d_min, None, None, None, None, None, None, "zero_dual_mass")

    weights = np.asarray(weight(model.support), dtype=float)
    drawn = np.asarray(weight(sample_dual(model, samples, derive_seed(master_seed, index, 1))), dtype=float)
    typical_mass = None
    if eps is not None and f.kind in ("product", "rank"):
        typical_mass = typicality_of_samples(model, typical_set_for(f, eps))
    return SeedOutcome(
        seed=code_seed,
        n=n,
        k=k,
        d_min=d_min,
        expected_weight=float(model.probabilities @ weights),
        frac_within_margin=float(np.mean(drawn <= d_min + margin)),
        success_floor=model.success_floor,
        p_zero_branch=zero_branch_probability(code, f),
        exact_within_margin=float(model.probabilities[weights <= d_min + margin].sum()),
        typical_mass=typical_mass,
        status="ok",
    )


def min_weight_experiment(
    field: FieldSpec,
    n: int,
    k: int,
    f: AmplitudeFn,
    weight: Callable[[np.ndarray], np.ndarray],
    seeds: int,
    samples_per_seed: int,
    master_seed: int = 0,
    margin: int = config.WEIGHT_MARGIN,
    eps: Optional[float] = None,
) -> list[SeedOutcome]:
    """Sequential minimum-weight experiment over seed indices 0..seeds-1."""
    return [
        min_weight_trial(field, n, k, f, weight, master_seed, index, samples_per_seed, margin, eps)
        for index in range(seeds)
    ]

"""
Entropy, capacity and typical-set analysis for the QDP lab.

All entropies are in base q of the ambient field. Typical sets of product
distributions are handled exactly by enumerating symbol-count types; rank
typical sets by summing over rank shells.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import entropy

from fq_core import FieldSpec, rank_weights
from noise import RankNoiseParams, make_rank_params
from spectral import AmplitudeFn, dft_product

logger = logging.getLogger(__name__)

SUM_TOL = 1e-9
WINDOW_TOL = 1e-9


class DistributionError(ValueError):
    """Raised for an invalid probability vector."""

    pass


def _log_q(x, q: int):
    return np.log(x) / np.log(q)


def _check_distribution(dist, size: Optional[int] = None) -> np.ndarray:
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 1 or dist.size == 0:
        raise DistributionError("distribution must be a non-empty 1-D vector")
    if size is not None and dist.size != size:
        raise DistributionError(f"distribution needs {size} entries, got {dist.size}")
    if not np.all(np.isfinite(dist)) or np.any(dist < 0):
        raise DistributionError("distribution entries must be finite and nonnegative")
    if abs(dist.sum() - 1.0) > SUM_TOL:
        raise DistributionError(f"distribution sums to {dist.sum():.12g}, expected 1")
    return dist


def entropy_q(dist, field: FieldSpec) -> float:
    """
    q-ary entropy -sum p log_q p with 0 log 0 = 0.

    Args:
        dist: Probability vector.
        field: Supplies the base q.

    Returns:
        Entropy in [0, log_q(support size)].
    """
    return float(entropy(_check_distribution(dist), base=field.q))


def holevo_capacity(field: FieldSpec, g) -> float:
    """Holevo capacity H_q(|g_hat|^2) of the pure-state channel a -> sum_u g(u)|a+u>."""
    return entropy_q(np.abs(dft_product(field, g)) ** 2, field)


def shannon_capacity(field: FieldSpec, g) -> float:
    """Classical capacity 1 - H_q(|g|^2) of the q-ary channel measured in the computational basis."""
    g = np.asarray(g, dtype=complex)
    return 1.0 - entropy_q(np.abs(g) ** 2, field)


@dataclass(frozen=True)
class HirschmanResult:
    """Entropy sum of g and g_hat with both inequality directions."""

    total: float
    holds: bool
    upper_direction_holds: bool


def hirschman_check(field: FieldSpec, g, tol: float = 1e-12) -> HirschmanResult:
    """
    H_q(|g|^2) + H_q(|g_hat|^2) and whether it is >= 1.

    The "<= 1" direction is also reported; it only holds at the boundary.

    Args:
        field: Ambient field.
        g: Unit-norm symbol function.
        tol: Slack on both comparisons.

    Returns:
        HirschmanResult.
    """
    g = np.asarray(g, dtype=complex)
    total = entropy_q(np.abs(g) ** 2, field) + holevo_capacity(field, g)
    return HirschmanResult(
        total=total,
        holds=total >= 1.0 - tol,
        upper_direction_holds=total <= 1.0 + tol,
    )


# Typical sets


@dataclass(frozen=True, eq=False)
class TypicalSetSpec:
    """
    Exact description of an epsilon-typical set T of a distribution p on F_q^n.

    Every member y satisfies lower <= p(y) <= upper. entropy is the exact
    H_q(p); rate is the per-coordinate entropy H used for the bounds.
    """

    kind: str
    q: int
    n: int
    eps: float
    lower: float
    upper: float
    defect: float
    cardinality: int
    entropy: float
    rate: float
    contains: Callable[[np.ndarray], np.ndarray] = dc_field(repr=False)
    alpha: Optional[float] = None
    beta: Optional[float] = None
    K1: Optional[float] = None
    K2: Optional[float] = None

    @property
    def mass(self) -> float:
        return 1.0 - self.defect


def typical_set_product(field: FieldSpec, r, n: int, eps: float) -> TypicalSetSpec:
    """
    Typical set of r^{(x)n}: strings with |sum_i -log_q r(y_i) - nH| <= n*eps.

    A = q^(-n(H+eps)), B = q^(-n(H-eps)). Defect and cardinality come from
    enumerating the counts of each distinct symbol probability, so they are
    exact. Strings using a zero-probability symbol are never members.

    Args:
        field: Ambient field.
        r: Symbol distribution (q values).
        n: String length.
        eps: Window half-width.

    Returns:
        TypicalSetSpec of kind "product" with alpha = beta = eps, K1 = K2 = 1.
    """
    q = field.q
    r = _check_distribution(r, q)
    if eps <= 0:
        raise DistributionError(f"eps must be positive, got {eps}")
    rate = float(entropy(r, base=q))
    support = r > 0
    surprisal = np.full(q, np.inf)
    surprisal[support] = -_log_q(r[support], q)

    values, sizes = np.unique(r[support], return_counts=True)
    class_surprisal = -_log_q(values, q)
    m = len(values)
    window = n * eps + WINDOW_TOL * max(1, n)

    types = np.array(
        [
            np.diff(np.concatenate(([-1], bars, [n + m - 1]))) - 1
            for bars in map(np.array, itertools.combinations(range(n + m - 1), m - 1))
        ],
        dtype=np.int64,
    ).reshape(-1, m)
    log_mass = (
        gammaln(n + 1)
        - gammaln(types + 1).sum(axis=1)
        + types @ np.log(sizes.astype(float))
        + types @ np.log(values)
    )
    mass = np.exp(log_mass)
    inside = np.abs(types @ class_surprisal - n * rate) <= window

    defect = float(mass[~inside].sum())
    cardinality = 0
    for counts in types[inside]:
        cardinality += _multinomial(n, counts) * math.prod(int(s) ** int(c) for s, c in zip(sizes, counts))

    def contains(vectors: np.ndarray) -> np.ndarray:
        total = surprisal[np.atleast_2d(vectors)].sum(axis=1)
        return np.abs(total - n * rate) <= window

    spec = TypicalSetSpec(
        kind="product",
        q=q,
        n=n,
        eps=eps,
        lower=float(q ** (-n * (rate + eps))),
        upper=float(q ** (-n * (rate - eps))),
        defect=max(defect, 0.0),
        cardinality=cardinality,
        entropy=n * rate,
        rate=rate,
        contains=contains,
        alpha=eps,
        beta=eps,
        K1=1.0,
        K2=1.0,
    )
    logger.debug(
        "Product typical set q=%d n=%d eps=%g: |T|=%d defect=%.6g",
        q,
        n,
        eps,
        cardinality,
        spec.defect,
    )
    return spec


def _multinomial(n: int, counts) -> int:
    result = 1
    remaining = n
    for c in counts:
        result *= math.comb(remaining, int(c))
        remaining -= int(c)
    return result


def hoeffding_bound(field: FieldSpec, r, n: int, eps: float, two_sided: bool = True) -> float:
    """
    Hoeffding bound on the typical-set defect with K = max -log_q r(a).

    Args:
        field: Ambient field.
        r: Symbol distribution.
        n: String length.
        eps: Window half-width.
        two_sided: Include the factor 2 of the two-sided deviation event.

    Returns:
        (2 if two_sided else 1) * exp(-2 n eps^2 / K^2), capped at 1.
    """
    r = _check_distribution(r, field.q)
    K = float(np.max(-_log_q(r[r > 0], field.q)))
    if K == 0.0:
        return 0.0
    factor = 2.0 if two_sided else 1.0
    return min(1.0, factor * math.exp(-2.0 * n * eps**2 / K**2))


def typical_defect_monte_carlo(
    field: FieldSpec,
    r,
    n: int,
    eps: float,
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """
    Sampled estimate of the defect of the product typical set.

    Args:
        field: Ambient field.
        r: Symbol distribution.
        n: String length.
        eps: Window half-width.
        samples: Number of strings drawn.
        seed: Generator seed.

    Returns:
        Tuple of (estimate, binomial standard error).
    """
    spec = typical_set_product(field, r, n, eps)
    rng = np.random.default_rng(seed)
    draws = rng.choice(field.q, size=(samples, n), p=np.asarray(r, dtype=float))
    estimate = float(np.mean(~spec.contains(draws)))
    sigma = math.sqrt(estimate * (1.0 - estimate) / samples)
    return estimate, sigma


# Rank metric


def rank_dual_radial_power(params: RankNoiseParams) -> np.ndarray:
    """p(u) = |f_hat_t|^2 on one matrix of rank u, using f_hat_t = f_(b-t)."""
    return params.dual().radial() ** 2


def rank_shell_masses(params: RankNoiseParams) -> np.ndarray:
    """Mass S_u * p(u) of each rank shell u = 0..b under p = |f_hat_t|^2."""
    spheres = np.array([float(s) for s in params.sphere_sizes()])
    return spheres * rank_dual_radial_power(params)


def _rank_window(params: RankNoiseParams, eps: float) -> tuple[int, int]:
    low = max(0, math.ceil(params.b * (1.0 - eps) - params.t - WINDOW_TOL))
    return low, params.b - params.t


def typical_set_rank(params: RankNoiseParams, eps: float) -> TypicalSetSpec:
    """
    Typical set b(1-eps) - t <= |e|_rk <= b - t of p = |f_hat_t|^2.

    A and B are the smallest and largest point probabilities inside the
    window; they follow the envelopes q^(-nH) and q^(-n(H - 2 eps t/a)).

    Args:
        params: Rank noise parameters.
        eps: Window slack.

    Returns:
        TypicalSetSpec of kind "rank" with H = (1 + t/a)(1 - t/b).
    """
    if eps <= 0:
        raise DistributionError(f"eps must be positive, got {eps}")
    field = params.field
    q, a, b, t = field.q, params.a, params.b, params.t
    low, high = _rank_window(params, eps)
    point = rank_dual_radial_power(params)
    masses = rank_shell_masses(params)
    spheres = params.sphere_sizes()
    ranks = np.arange(b + 1)
    window = (ranks >= low) & (ranks <= high)

    positive = point > 0
    exact_entropy = float(-np.sum(masses[positive] * _log_q(point[positive], q)))

    def contains(vectors: np.ndarray) -> np.ndarray:
        weights = rank_weights(field, vectors, params.rows, params.cols)
        return (weights >= low) & (weights <= high)

    return TypicalSetSpec(
        kind="rank",
        q=q,
        n=a * b,
        eps=eps,
        lower=float(point[window].min()),
        upper=float(point[window].max()),
        defect=float(masses[~window].sum()),
        cardinality=sum(spheres[u] for u in range(low, high + 1)),
        entropy=exact_entropy,
        rate=(1 + t / a) * (1 - t / b),
        contains=contains,
        alpha=0.0,
        beta=2 * eps,
    )


def rank_tail_profile(params: RankNoiseParams, eps: float) -> tuple[float, float]:
    """
    Exact mass of ranks below (1-eps)b - t and the envelope q^(-b^2 eps^2).

    Returns:
        Tuple of (tail mass, envelope).
    """
    masses = rank_shell_masses(params)
    cutoff = (1.0 - eps) * params.b - params.t
    tail = float(sum(m for u, m in enumerate(masses) if u < cutoff - WINDOW_TOL))
    return tail, float(params.field.q ** (-(params.b**2) * eps**2))


def rank_tail_constant(params: RankNoiseParams, eps: float) -> float:
    """Smallest C with tail mass <= C * q^(-b^2 eps^2) at this instance."""
    tail, envelope = rank_tail_profile(params, eps)
    return tail / envelope


def rank_shell_ratios(params: RankNoiseParams) -> np.ndarray:
    """
    Consecutive shell-mass ratios mass(u-1) / mass(u) for u = 1..b-t.

    Every ratio is below q^(-1) * (q/(q-1))^3, so the mass decays at least
    geometrically in v = b - t - u up to that constant.

    Returns:
        Array of b - t ratios, empty when t = b.
    """
    masses = rank_shell_masses(params)
    top = params.b - params.t
    return masses[:top] / masses[1 : top + 1]


def rank_shell_ratio_bound(field: FieldSpec) -> float:
    q = field.q
    return (q / (q - 1)) ** 3 / q


def rank_gv_distance(a: int, b: int, R: float) -> int:
    """
    Largest t >= 1 with R*a*b > a*t + t*(b - t), or 0 when none exists.

    Args:
        a: Matrix rows.
        b: Matrix columns.
        R: Rate, 0 < R < 1.

    Returns:
        Rank Gilbert-Varshamov distance.
    """
    if not 0.0 < R < 1.0:
        raise DistributionError(f"rate must lie in (0, 1), got {R}")
    admissible = [t for t in range(1, min(a, b) + 1) if R * a * b > a * t + t * (b - t)]
    return max(admissible, default=0)


def rank_entropy_per_symbol(params: RankNoiseParams) -> tuple[float, float]:
    """
    Closed-form and exact per-coordinate entropy of |f_hat_t|^2.

    Returns:
        Tuple of ((1 + t/a)(1 - t/b), H_q(|f_hat_t|^2) / (a b)).
    """
    a, b, t = params.a, params.b, params.t
    q = params.field.q
    point = rank_dual_radial_power(params)
    masses = rank_shell_masses(params)
    positive = point > 0
    exact = float(-np.sum(masses[positive] * _log_q(point[positive], q)))
    return (1 + t / a) * (1 - t / b), exact / (a * b)


# Nice families


@dataclass
class NiceFamilyReport:
    """Per-index outcome of the nice-family conditions and entropy sandwich."""

    passed: bool = True
    violations: list[tuple[int, str, float, float]] = dc_field(default_factory=list)
    sandwich: list[tuple[float, float, float]] = dc_field(default_factory=list)

    def fail(self, index: int, condition: str, lhs: float, rhs: float) -> None:
        self.passed = False
        self.violations.append((index, condition, lhs, rhs))
        logger.warning("Nice family index %d violates %s: %.6g vs %.6g", index, condition, lhs, rhs)


def _as_fn(value) -> Callable[[float], float]:
    return value if callable(value) else (lambda _eps: float(value))


def nice_family_check(
    family: Sequence[TypicalSetSpec],
    H: float,
    alpha,
    beta,
    K1: float,
    K2: float,
    tol: float = 1e-9,
) -> NiceFamilyReport:
    """
    Check a sequence of typical sets against the nice-family conditions.

    At each index: the set is non-vacuous (A <= B); A >= K1 q^(-n(H+alpha));
    B <= K2 q^(-n(H-beta)); the defect stays below 1 and does not exceed the
    first member's. The entropy sandwich
    -(1-d) log_q B <= H_q(p) <= -(1-d) log_q A + d n is checked exactly.
    Comparisons are made on log_q values.

    Args:
        family: Typical sets in order of growing n.
        H: Entropy rate of the family.
        alpha: Float or function of eps.
        beta: Float or function of eps.
        K1: Lower-envelope constant.
        K2: Upper-envelope constant.
        tol: Slack on log-domain comparisons.

    Returns:
        NiceFamilyReport listing offending indices.
    """
    alpha_fn, beta_fn = _as_fn(alpha), _as_fn(beta)
    report = NiceFamilyReport()
    first_defect = family[0].defect if family else 0.0
    for i, spec in enumerate(family):
        q, n = spec.q, spec.n
        log_a, log_b = _log_q(spec.lower, q), _log_q(spec.upper, q)
        if spec.lower > spec.upper:
            report.fail(i, "non-vacuous bounds", spec.lower, spec.upper)
        lower_env = _log_q(K1, q) - n * (H + alpha_fn(spec.eps))
        if log_a < lower_env - tol:
            report.fail(i, "lower envelope", log_a, lower_env)
        upper_env = _log_q(K2, q) - n * (H - beta_fn(spec.eps))
        if log_b > upper_env + tol:
            report.fail(i, "upper envelope", log_b, upper_env)
        if spec.defect >= 1.0 or spec.defect > first_defect + tol:
            report.fail(i, "defect", spec.defect, first_defect)

        d = spec.defect
        left = -(1 - d) * log_b
        right = -(1 - d) * log_a + d * n
        report.sandwich.append((left, spec.entropy, right))
        if not left - tol <= spec.entropy <= right + tol:
            report.fail(i, "entropy sandwich", spec.entropy, left if spec.entropy < left else right)
    return report


def extract_family_constants(
    family: Sequence[TypicalSetSpec],
    H: float,
    alpha,
    beta,
) -> tuple[float, float]:
    """
    Tightest (K1, K2) for which every member meets its exponent envelopes.

    Returns:
        Tuple of (min_i A_i q^(n_i(H+alpha)), max_i B_i q^(n_i(H-beta))).
    """
    alpha_fn, beta_fn = _as_fn(alpha), _as_fn(beta)
    k1 = min(s.q ** (_log_q(s.lower, s.q) + s.n * (H + alpha_fn(s.eps))) for s in family)
    k2 = max(s.q ** (_log_q(s.upper, s.q) + s.n * (H - beta_fn(s.eps))) for s in family)
    return float(k1), float(k2)


def rank_params_of(f: AmplitudeFn) -> RankNoiseParams:
    """Recover (a, b, t) of a rank amplitude: f_t is nonzero exactly on ranks <= t."""
    if f.kind != "rank":
        raise DistributionError(f"expected a rank amplitude, got kind {f.kind!r}")
    rows, cols = f.shape
    t = int(np.flatnonzero(np.abs(f.radial) > 0).max())
    return make_rank_params(f.field, rows, cols, t)


def typical_set_for(f: AmplitudeFn, eps: float) -> TypicalSetSpec:
    """
    Typical set of p = |f_hat|^2 for a product or rank amplitude.

    Args:
        f: Noise amplitude.
        eps: Window slack.

    Returns:
        TypicalSetSpec on F_q^n.
    """
    if f.kind == "product":
        return typical_set_product(f.field, f.symbol_power, f.n, eps)
    if f.kind == "rank":
        return typical_set_rank(rank_params_of(f), eps)
    raise DistributionError("typical sets need a product or rank amplitude")

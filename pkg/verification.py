# verification.py
"""
Invariant suites behind `qdp-lab verify`.

Every suite takes a VerificationReport and the fields to check, and records
one CheckRecord per comparison. Failures are collected, never raised, so a
single run lists every identity that does not hold.
"""

import logging
import math
from typing import Callable, Iterable, Optional

import numpy as np

from analysis import (
    TypicalSetSpec,
    entropy_q,
    extract_family_constants,
    hirschman_check,
    hoeffding_bound,
    holevo_capacity,
    nice_family_check,
    rank_entropy_per_symbol,
    rank_gv_distance,
    rank_shell_masses,
    rank_shell_ratio_bound,
    rank_shell_ratios,
    rank_tail_constant,
    rank_tail_profile,
    shannon_capacity,
    typical_defect_monte_carlo,
    typical_set_for,
    typical_set_product,
    typical_set_rank,
)
from codes import (
    coset_representatives,
    dual,
    dual_membership_probability,
    enumerate_coset,
    from_generator,
    intersection_moments,
    min_weight_codeword,
    nested_codes,
    random_code,
    systematic_code,
)
from fq_core import (
    FieldSpec,
    all_vectors,
    dot,
    hamming_weights,
    make_field,
    matv,
    rank_weight,
    rank_weights,
    vector_index,
)
from noise import (
    InfeasibleNormalizationError,
    bernoulli_g,
    enumerate_subspaces,
    gaussian_binomial,
    gibbs_weight_threshold,
    make_rank_params,
    rank_noise,
    rank_noise_subspace_oracle,
    solve_lambda,
    uniform_g,
)
from pgm import (
    ConsistencyError,
    coset_basis,
    converse_bound,
    pgm_dense_oracle,
    pgm_dense_per_codeword,
    pgm_success,
    pgm_success_from_representatives,
    truncated_fidelity,
    ztilde_moments,
)
from sampler import (
    ZeroDualMassError,
    dual_distribution,
    ensemble_typical_mass,
    max_prob_dual_scan,
    min_weight_experiment,
    most_likely_dual,
    regev_pipeline_oracle,
    sample_dual,
    typicality_of_samples,
    zero_branch_probability,
)
from schemas import VerificationReport
from spectral import (
    AmplitudeFn,
    dft,
    dft_product,
    fourier_matrix,
    periodic_state,
    qft_shifted_closed_form,
    qft_state,
    shifted_state,
)

logger = logging.getLogger(__name__)

Fields = dict[int, FieldSpec]
Suite = Callable[[VerificationReport, Fields], None]

DEFAULT_FIELDS = ((2, 1), (3, 1), (2, 2), (5, 1))
RANK_DUALITY_CASES = ((2, 2, 2, 0), (2, 2, 2, 1), (2, 2, 2, 2), (2, 3, 2, 1), (3, 2, 2, 1))


def default_fields() -> Fields:
    """F_2, F_3, F_4 and F_5 keyed by their order."""
    return {p**s: make_field(p, s) for p, s in DEFAULT_FIELDS}


def _close(report: VerificationReport, name: str, instance: str, lhs, rhs, tol: float) -> None:
    lhs, rhs = float(lhs), float(rhs)
    report.add_check(name, instance, lhs, rhs, tol, abs(lhs - rhs) <= tol)


def _at_most(report: VerificationReport, name: str, instance: str, lhs, rhs, tol: float = 0.0) -> None:
    lhs, rhs = float(lhs), float(rhs)
    report.add_check(name, instance, lhs, rhs, tol, lhs <= rhs + tol)


def _raises(report: VerificationReport, name: str, instance: str, fn: Callable[[], object], error: type) -> None:
    try:
        fn()
        raised = False
    except error:
        raised = True
    report.add_check(name, instance, float(raised), 1.0, 0.0, raised)


def _random_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    g = rng.normal(size=size) + 1j * rng.normal(size=size)
    return g / np.linalg.norm(g)


def _field_label(field: FieldSpec) -> str:
    return f"q={field.q}" if field.s == 1 else f"q={field.p}^{field.s}"


# Field


def check_field(report: VerificationReport, fields: Fields) -> None:
    """Character orthogonality, trace additivity and the unitary symbol transform."""
    for field in fields.values():
        label = _field_label(field)
        q = field.q
        gram = field.chars @ field.chars.conj().T
        _close(report, "field.character_orthogonality", label, np.max(np.abs(gram - q * np.eye(q))), 0.0, 1e-10)
        _close(report, "field.character_symmetry", label, np.max(np.abs(field.chars - field.chars.T)), 0.0, 1e-12)

        expected = np.exp(2j * np.pi * field.trace[field.mul] / field.p)
        _close(report, "field.character_formula", label, np.max(np.abs(field.chars - expected)), 0.0, 1e-12)

        summed = field.trace[field.add]
        split = (field.trace[:, None] + field.trace[None, :]) % field.p
        _close(report, "field.trace_additivity", label, np.count_nonzero(summed != split), 0, 0.0)
        _at_most(report, "field.trace_range", label, field.trace.max(), field.p - 1)

        product = field.chars[1][field.add]
        factored = field.chars[1][:, None] * field.chars[1][None, :]
        _close(report, "field.character_additivity", label, np.max(np.abs(product - factored)), 0.0, 1e-12)

        unitary = fourier_matrix(field)
        _close(
            report,
            "field.fourier_unitary",
            label,
            np.max(np.abs(unitary @ unitary.conj().T - np.eye(q))),
            0.0,
            1e-12,
        )

    field = fields.get(2) or next(iter(fields.values()))
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(20):
        x = rng.integers(0, field.q, size=6)
        transposed = matv(x, 2, 3).T.reshape(-1)
        mismatches += rank_weight(field, x, 2, 3) != rank_weight(field, transposed, 3, 2)
    _close(report, "field.rank_weight_transpose", f"{_field_label(field)} 2x3", mismatches, 0, 0.0)


# Codes


def check_codes(report: VerificationReport, fields: Fields) -> None:
    """Duality, coset partition, representatives and exhaustive ensemble identities."""
    for q in (2, 3):
        field = fields.get(q, make_field(q))
        for seed in range(3):
            code = random_code(field, 5, 2, seed)
            label = f"q={q} n=5 k=2 seed={seed}"
            residual = dot(field, code.G, code.H.T) if code.H.shape[0] else np.zeros(1)
            _close(report, "codes.parity_check", label, np.count_nonzero(residual), 0, 0.0)
            _close(report, "codes.dual_size", label, code.size * code.dual_size, q**code.n, 0.0)

            dual_words = code.dual_codewords()
            phases = field.chars[1][dot(field, code.codewords(), dual_words.T)]
            _close(report, "codes.dual_characters", label, np.max(np.abs(phases - 1.0)), 0.0, 1e-12)

            twice = dual(dual(code)).codewords()
            same = twice.shape == code.codewords().shape and np.array_equal(twice, code.codewords())
            report.add_check("codes.double_dual", label, float(same), 1.0, 0.0, same)

            cosets = np.concatenate([enumerate_coset(code, s) for s in range(code.num_syndromes)])
            covered = np.sort(vector_index(q, cosets))
            _close(
                report,
                "codes.coset_partition",
                label,
                np.count_nonzero(covered != np.arange(q**code.n)),
                0,
                0.0,
            )

            for shift_seed in (None, seed + 100):
                reps = coset_representatives(code, shift_seed)
                found = code.syndrome_table[vector_index(q, reps)]
                _close(
                    report,
                    "codes.representative_syndromes",
                    f"{label} shift={shift_seed}",
                    np.count_nonzero(found != np.arange(code.num_syndromes)),
                    0,
                    0.0,
                )

    field = fields.get(2, make_field(2))
    generators = all_vectors(2, 3)
    sizes = [from_generator(field, g[None, :]).size for g in generators]
    _close(report, "codes.exhaustive_one_row", "q=2 n=3 k=1", sum(s == 2 for s in sizes), 7, 0.0)

    rng = np.random.default_rng(11)
    for index in range(20):
        n, k = (4, 2) if index % 2 == 0 else (5, 3)
        vectors = all_vectors(2, n)
        size = int(rng.integers(1, 9))
        subset = vectors[rng.choice(len(vectors), size=size, replace=False)]
        moments = intersection_moments(field, n, k, subset)
        label = f"q=2 n={n} k={k} |E|={size} set={index}"
        scale = 2.0 ** (n - k)
        _at_most(report, "codes.intersection_mean_lower", label, size / scale, moments.mean, 1e-12)
        _at_most(report, "codes.intersection_mean_upper", label, moments.mean, (size - 1) / scale + 1, 1e-12)
        _at_most(report, "codes.intersection_variance", label, moments.variance, (field.q - 1) * moments.mean, 1e-12)

    for n, k in ((4, 2), (5, 3)):
        vectors = all_vectors(2, n)
        for y_index, s_index in ((1, 0), (5, 3), (len(vectors) - 1, 2)):
            probability = dual_membership_probability(field, n, k, vectors[y_index], vectors[s_index])
            _close(
                report,
                "codes.dual_membership",
                f"q=2 n={n} k={k} y={y_index} s={s_index}",
                probability,
                2.0**-k,
                1e-12,
            )


# Spectral


def check_spectral(report: VerificationReport, fields: Fields) -> None:
    """Parseval, product transforms, reflection, shifted states and periodicity."""
    rng = np.random.default_rng(3)
    for q, n in ((2, 6), (3, 4), (4, 3)):
        field = fields.get(q, make_field(*((2, 2) if q == 4 else (q, 1))))
        label = f"q={field.q} n={n}"
        values = _random_unit(rng, field.q**n)
        f = AmplitudeFn.dense_values(field, n, values)
        _close(report, "spectral.parseval", label, np.linalg.norm(f.spectrum), 1.0, 1e-12)

        g = _random_unit(rng, field.q)
        product = AmplitudeFn.product(field, n, g)
        densified = AmplitudeFn.dense_values(field, n, product.dense)
        _close(
            report,
            "spectral.product_transform",
            label,
            np.max(np.abs(dft(densified).dense - product.spectrum)),
            0.0,
            1e-12,
        )
        twice = dft_product(field, dft_product(field, g))
        _close(report, "spectral.reflection", label, np.max(np.abs(twice - g[field.neg])), 0.0, 1e-12)

        c = rng.integers(0, field.q, size=n)
        dense_image = qft_state(shifted_state(c, product)).amplitudes
        closed = qft_shifted_closed_form(c, product).amplitudes
        _close(report, "spectral.shifted_closed_form", label, np.max(np.abs(dense_image - closed)), 0.0, 1e-12)

    field = fields.get(2, make_field(2))
    f = AmplitudeFn.product(field, 6, bernoulli_g(field, 0.2))
    for seed in range(3):
        code = random_code(field, 6, 3, seed)
        label = f"q=2 n=6 k=3 seed={seed}"
        basis = coset_basis(code, f, coset_representatives(code))
        _close(
            report,
            "spectral.coset_basis_orthonormal",
            label,
            np.max(np.abs(basis.conj().T @ basis - np.eye(code.size))),
            0.0,
            1e-12,
        )
        image = qft_state(periodic_state(code.codewords(), f)).amplitudes
        off_dual = np.abs(image[code.syndrome_table != 0])
        _close(report, "spectral.periodic_support", label, off_dual.max() if off_dual.size else 0.0, 0.0, 1e-10)


# Noise


def check_noise(report: VerificationReport, fields: Fields) -> None:
    """Rank duality, the subspace oracle, sphere sizes and the Gibbs family."""
    for q, a, b, t in RANK_DUALITY_CASES:
        field = fields.get(q, make_field(q))
        params = make_rank_params(field, a, b, t)
        label = f"q={q} a={a} b={b} t={t}"
        f = rank_noise(params)
        _close(report, "noise.rank_norm", label, f.norm(), 1.0, 1e-12)
        residual = np.max(np.abs(dft(f).dense - rank_noise(params.dual()).dense))
        _close(report, "noise.rank_duality", label, residual, 0.0, 1e-10)
        _close(report, "noise.sphere_sizes", label, sum(params.sphere_sizes()), q ** (a * b), 0.0)
        subspaces = sum(1 for _ in enumerate_subspaces(field, params.b, t))
        _close(report, "noise.subspace_count", label, subspaces, gaussian_binomial(params.b, t, field), 0.0)

    for q, a, b, t in ((2, 2, 2, 1), (2, 2, 2, 0), (2, 2, 2, 2), (2, 3, 2, 1)):
        field = fields.get(q, make_field(q))
        params = make_rank_params(field, a, b, t)
        oracle = rank_noise_subspace_oracle(params).amplitudes
        residual = np.max(np.abs(oracle - rank_noise(params).dense))
        _close(report, "noise.subspace_oracle", f"q={q} a={a} b={b} t={t}", residual, 0.0, 1e-10)

    field = fields.get(2, make_field(2))
    params = make_rank_params(field, 3, 3, 1)
    tail, _ = rank_tail_profile(params, 1 / 3)
    _close(report, "noise.rank_tail_defect", "q=2 a=3 b=3 t=1", tail, typical_set_rank(params, 1 / 3).defect, 1e-15)
    _close(report, "noise.rank_shell_total", "q=2 a=3 b=3 t=1", rank_shell_masses(params).sum(), 1.0, 1e-12)

    _check_rank_ladders(report, fields)

    field = fields.get(3, make_field(3))
    gibbs = solve_lambda([0, 1, 1], "gibbs", 0.7)
    f = AmplitudeFn.product(field, 5, gibbs.symbol_amplitudes(field))
    vectors = all_vectors(3, 5)
    weights = gibbs.weight_of(vectors)
    power = f.power_spectrum
    gaps = [power[weights == w].min() - power[weights == w + 1].max() for w in range(5)]
    report.add_check("noise.gibbs_decreasing", "q=3 n=5 lambda=0.7", min(gaps), 0.0, 0.0, min(gaps) > 0)
    _close(
        report,
        "noise.gibbs_log_prob",
        "q=3 n=5 lambda=0.7",
        np.max(np.abs(np.log(power) / np.log(3) - gibbs.log_prob(vectors))),
        0.0,
        1e-10,
    )

    literal = solve_lambda([1, 1], "unit-sum")
    _close(report, "noise.literal_normalization", "weights=(1,1)", literal.normalizer, 1.0, 1e-12)
    _close(report, "noise.literal_rate", "weights=(1,1)", literal.lam, 1.0, 1e-12)
    _raises(
        report,
        "noise.literal_infeasible",
        "weights=(0,1,1)",
        lambda: solve_lambda([0, 1, 1], "unit-sum"),
        InfeasibleNormalizationError,
    )


def _check_rank_ladders(report: VerificationReport, fields: Fields) -> None:
    for q, sizes in ((2, range(2, 7)), (3, range(2, 5))):
        field = fields.get(q, make_field(q))
        bound = rank_shell_ratio_bound(field)
        for a in sizes:
            for t in range(a):
                params = make_rank_params(field, a, a, t)
                label = f"q={q} a=b={a} t={t}"
                _at_most(report, "noise.rank_shell_ratio", label, rank_shell_ratios(params).max(), bound, 1e-12)
            # Z / [b choose 1]_q = (q/(q-1))(1 - q^-a) sits in [1, q/(q-1)]
            params = make_rank_params(field, a, a, 1)
            ratio = params.Z / params.binomial(a, 1)
            label = f"q={q} a=b={a} t=1"
            _at_most(report, "noise.rank_normalizer_lower", label, 1.0, ratio, 1e-12)
            _at_most(report, "noise.rank_normalizer_upper", label, ratio, q / (q - 1), 1e-12)

    for q, sizes in ((2, range(3, 8)), (3, range(3, 6))):
        field = fields.get(q, make_field(q))
        smallest = rank_tail_constant(make_rank_params(field, sizes[0], sizes[0], 1), 0.5)
        for a in sizes[1:]:
            constant = rank_tail_constant(make_rank_params(field, a, a, 1), 0.5)
            _at_most(report, "noise.rank_tail_constant", f"q={q} a=b={a} t=1 eps=1/2", constant, smallest, 1e-12)


# Analysis


def check_analysis(report: VerificationReport, fields: Fields) -> None:
    """Entropies, Hirschman, typical-set defects and nice families."""
    field = fields.get(2, make_field(2))
    _close(report, "analysis.binary_entropy", "r=(0.8,0.2)", entropy_q([0.8, 0.2], field), 0.7219280949, 1e-9)
    g = bernoulli_g(field, 0.1)
    _close(report, "analysis.holevo_capacity", "bernoulli p=0.1", holevo_capacity(field, g), 0.7219280949, 1e-9)
    _close(report, "analysis.shannon_capacity", "bernoulli p=0.1", shannon_capacity(field, g), 0.5310044064, 1e-9)

    rng = np.random.default_rng(5)
    for q in (2, 3, 5):
        fq = fields.get(q, make_field(q))
        totals = [hirschman_check(fq, _random_unit(rng, q)).total for _ in range(1000)]
        _at_most(report, "analysis.hirschman", f"q={q} random=1000", 1.0, min(totals), 1e-12)
        delta = np.zeros(q, dtype=complex)
        delta[0] = 1.0
        for name, g in (("delta", delta), ("uniform", uniform_g(fq))):
            _close(report, "analysis.hirschman_boundary", f"q={q} {name}", hirschman_check(fq, g).total, 1.0, 1e-12)

        g = _random_unit(rng, q)
        shifted = np.roll(g, 1) * np.exp(0.3j)
        _close(
            report,
            "analysis.holevo_shift_invariance",
            f"q={q}",
            holevo_capacity(fq, shifted),
            holevo_capacity(fq, g),
            1e-12,
        )

    r = [0.9, 0.1]
    for eps in (0.05, 0.1, 0.2):
        for n in (8, 16, 32, 64):
            spec = typical_set_product(field, r, n, eps)
            label = f"r=(0.9,0.1) n={n} eps={eps}"
            _at_most(report, "analysis.typical_hoeffding", label, spec.defect, hoeffding_bound(field, r, n, eps), 1e-12)
            _at_most(report, "analysis.typical_size_upper", label, spec.cardinality * spec.lower, 1.0, 1e-9)
            _at_most(report, "analysis.typical_size_lower", label, spec.mass, spec.cardinality * spec.upper, 1e-9)

    spec = typical_set_product(field, r, 16, 0.1)
    samples = 100_000
    estimate, _ = typical_defect_monte_carlo(field, r, 16, 0.1, samples, seed=17)
    sigma = math.sqrt(spec.defect * (1 - spec.defect) / samples)
    _close(report, "analysis.typical_monte_carlo", "r=(0.9,0.1) n=16 eps=0.1", estimate, spec.defect, 4 * sigma)

    r = [0.8, 0.2]
    family = [typical_set_product(field, r, n, 0.1) for n in (16, 32, 64)]
    H = entropy_q(r, field)
    nice = nice_family_check(family, H, 0.1, 0.1, 1.0, 1.0)
    report.add_check("analysis.nice_family_product", "r=(0.8,0.2) n=16,32,64 eps=0.1", len(nice.violations), 0, 0, nice.passed)
    k1, k2 = extract_family_constants(family, H, 0.1, 0.1)
    _close(report, "analysis.product_constants_lower", "r=(0.8,0.2) eps=0.1", k1, 1.0, 1e-9)
    _close(report, "analysis.product_constants_upper", "r=(0.8,0.2) eps=0.1", k2, 1.0, 1e-9)

    eps = 1 / 3
    rank_family = [typical_set_rank(make_rank_params(field, a, a, a // 2), eps) for a in (2, 4)]
    H = rank_family[0].rate
    k1, k2 = extract_family_constants(rank_family, H, 0.0, lambda e: 2 * e)
    nice = nice_family_check(rank_family, H, 0.0, lambda e: 2 * e, k1, k2)
    label = "q=2 (a,b,t)=(2,2,1),(4,4,2) eps=1/3"
    report.add_check("analysis.nice_family_rank", label, len(nice.violations), 0, 0, nice.passed)
    _at_most(report, "analysis.rank_upper_constant", label, k2, 1.0, 1e-12)

    degenerate = TypicalSetSpec(
        kind="product",
        q=2,
        n=4,
        eps=0.1,
        lower=0.5,
        upper=0.1,
        defect=0.0,
        cardinality=0,
        entropy=1.0,
        rate=0.25,
        contains=lambda v: np.zeros(len(np.atleast_2d(v)), dtype=bool),
    )
    flagged = not nice_family_check([degenerate], 0.25, 0.1, 0.1, 1.0, 1.0).passed
    report.add_check("analysis.nice_family_rejects_vacuous", "lower > upper", float(flagged), 1.0, 0.0, flagged)

    params = make_rank_params(field, 3, 3, 1)
    spec = typical_set_rank(params, eps)
    shells = rank_shell_masses(params)
    _close(report, "analysis.rank_typical_defect", "q=2 a=b=3 t=1 eps=1/3", spec.defect, shells[0], 1e-15)
    _close(report, "analysis.rank_typical_size", "q=2 a=b=3 t=1 eps=1/3", spec.cardinality, 49 + 294, 0.0)

    _close(report, "analysis.rank_gv", "a=b=4 R=0.5", rank_gv_distance(4, 4, 0.5), 1, 0.0)
    closed, exact = rank_entropy_per_symbol(make_rank_params(field, 2, 2, 2))
    _close(report, "analysis.rank_entropy_full", "q=2 a=b=2 t=2", exact, 0.0, 1e-12)
    _close(report, "analysis.rank_entropy_closed", "q=2 a=b=2 t=1", rank_entropy_per_symbol(make_rank_params(field, 2, 2, 1))[0], 0.75, 1e-12)

    for q, sizes in ((2, range(2, 7)), (3, range(2, 6))):
        ladder_field = fields.get(q, make_field(q))
        gaps = {}
        for a in sizes:
            closed, exact = rank_entropy_per_symbol(make_rank_params(ladder_field, a, a, 1))
            gaps[a] = abs(closed - exact)
        first = sizes[0]
        for a in sizes[1:]:
            label = f"q={q} a=b={a} t=1"
            _at_most(report, "analysis.rank_entropy_gap_decreasing", label, gaps[a], gaps[a - 1])
            _at_most(report, "analysis.rank_entropy_gap_order", label, a * gaps[a], first * gaps[first], 1e-12)

    spec = typical_set_product(field, r, 8, 0.2)
    vectors = all_vectors(2, 8)
    members = vectors[spec.contains(vectors)]
    power = AmplitudeFn.product(field, 8, bernoulli_g(field, 0.1)).power_at(members)
    _at_most(report, "analysis.typical_members_lower", "r=(0.8,0.2) n=8 eps=0.2", spec.lower, power.min(), 1e-15)
    _at_most(report, "analysis.typical_members_upper", "r=(0.8,0.2) n=8 eps=0.2", power.max(), spec.upper, 1e-15)


# PGM


def _noise_instance(field: FieldSpec, n: int, kind: str, rng: np.random.Generator) -> tuple[AmplitudeFn, str]:
    if kind == "bernoulli":
        p = float(rng.uniform(0.05, 0.4))
        return AmplitudeFn.product(field, n, bernoulli_g(field, p)), f"bernoulli p={p:.3f}"
    if kind == "table":
        return AmplitudeFn.product(field, n, _random_unit(rng, field.q)), "table"
    if kind == "gibbs":
        lam = float(rng.uniform(0.3, 1.5))
        weights = [0] + [1] * (field.q - 1)
        gibbs = solve_lambda(weights, "gibbs", lam)
        return AmplitudeFn.product(field, n, gibbs.symbol_amplitudes(field)), f"gibbs lambda={lam:.3f}"
    t = int(rng.integers(0, 3))
    return rank_noise(make_rank_params(field, 2, 2, t)), f"rank t={t}"


def pgm_instances(fields: Fields, count: int = 50, seed: int = 0) -> Iterable[tuple]:
    """
    Random small (code, noise, label) instances cycling through the noise kinds.

    Rank instances use the 2 x 2 matrix view, so their length is 4.
    """
    rng = np.random.default_rng(seed)
    kinds = ("bernoulli", "table", "gibbs", "rank")
    for index in range(count):
        q = 2 if index % 3 else 3
        field = fields.get(q, make_field(q))
        kind = kinds[index % len(kinds)]
        if kind == "rank":
            n = 4
        else:
            n = int(rng.integers(3, 7)) if q == 2 else int(rng.integers(3, 5))
        k = int(rng.integers(1, min(3, n - 1) + 1))
        f, noise_label = _noise_instance(field, n, kind, rng)
        code = random_code(field, n, k, seed=int(rng.integers(0, 2**31)))
        yield code, f, f"q={q} n={n} k={k} {noise_label} #{index}"


def check_pgm(report: VerificationReport, fields: Fields) -> None:
    """Closed form against the dense oracle, boundary cases and ensemble identities."""
    for code, f, label in pgm_instances(fields):
        closed = pgm_success(code, f)
        _close(report, "pgm.oracle_equivalence", label, closed.success, pgm_dense_oracle(code, f), 1e-9)
        per_codeword = pgm_dense_per_codeword(code, f)
        _close(report, "pgm.geometric_uniformity", label, np.ptp(per_codeword), 0.0, 1e-9)
        _close(report, "pgm.mass_total", label, closed.mass_residual, 0.0, 1e-12)
        reps = coset_representatives(code, shift_seed=code.seed)
        _close(
            report,
            "pgm.representative_invariance",
            label,
            pgm_success_from_representatives(code, f, reps),
            closed.success,
            1e-12,
        )

    for q, lengths in ((2, (4, 7, 10)), (3, (5,))):
        field = fields.get(q, make_field(q))
        delta = np.zeros(q, dtype=complex)
        delta[0] = 1.0
        for n in lengths:
            for k in range(1, min(4, n - 1) + 1):
                code = random_code(field, n, k, seed=n * 10 + k)
                label = f"q={q} n={n} k={k}"
                noiseless = pgm_success(code, AmplitudeFn.product(field, n, delta)).success
                _close(report, "pgm.noiseless", label, noiseless, 1.0, 1e-12)
                flat = pgm_success(code, AmplitudeFn.product(field, n, uniform_g(field)))
                _close(report, "pgm.uniform_noise", label, flat.success, flat.guessing, 1e-12)

    field = fields.get(2, make_field(2))
    f = AmplitudeFn.product(field, 4, bernoulli_g(field, 0.1))
    for n, k, s in ((4, 2, (1, 0, 0, 0)), (4, 2, (0, 0, 0, 0)), (4, 3, (1, 1, 0, 0))):
        moments = ztilde_moments(field, n, k, f, 0.3, s)
        label = f"q=2 n={n} k={k} s={s}"
        _close(report, "pgm.ztilde_exact_mean", label, moments.mean, moments.exact_mean, 1e-12)
        _at_most(report, "pgm.ztilde_variance", label, moments.variance, moments.variance_bound, 1e-12)

    f = AmplitudeFn.product(field, 5, bernoulli_g(field, 0.1))
    moments = ztilde_moments(field, 5, 3, f, 0.2, (0, 1, 0, 0, 0))
    _close(report, "pgm.ztilde_exact_mean", "q=2 n=5 k=3 s=(0,1,0,0,0)", moments.mean, moments.exact_mean, 1e-12)

    f = AmplitudeFn.product(field, 6, bernoulli_g(field, 0.1))
    code = random_code(field, 6, 2, seed=1)
    spec = typical_set_product(field, f.symbol_power, 6, 0.3)
    for c in code.codewords():
        _close(
            report,
            "pgm.truncated_fidelity",
            f"q=2 n=6 k=2 c={tuple(int(x) for x in c)}",
            truncated_fidelity(code, f, spec, c),
            math.sqrt(1 - spec.defect),
            1e-12,
        )

    _check_threshold_trend(report, field)


def _check_threshold_trend(report: VerificationReport, field: FieldSpec, n: int = 14, seeds: int = 200) -> None:
    f = AmplitudeFn.product(field, n, bernoulli_g(field, 0.1))
    successes = np.zeros((seeds, n - 1))
    violations = 0
    for seed in range(seeds):
        for k, code in nested_codes(field, n, seed=seed).items():
            success = pgm_success(code, f).success
            successes[seed, k - 1] = success
            try:
                converse_bound(code, f, 0.1, p_pgm=success)
            except ConsistencyError:
                violations += 1

    label = f"q=2 n={n} bernoulli p=0.1 seeds={seeds}"
    # C_k is a subcode of C_(k+1), so every row is non-increasing, not just the mean
    increases = int(np.count_nonzero(np.diff(successes, axis=1) > 1e-12))
    _close(report, "pgm.monotone_per_instance", label, increases, 0, 0.0)
    means = successes.mean(axis=0)
    for k in range(1, n - 1):
        _at_most(report, "pgm.monotone_in_k", f"{label} k={k}", means[k], means[k - 1], 1e-12)
    _at_most(report, "pgm.threshold_gap", label, 0.3, means[1] - means[11])
    _close(report, "pgm.converse_every_instance", label, violations, 0, 0.0)

    code = systematic_code(field, 16, 14, seed=0)
    f = AmplitudeFn.product(field, 16, bernoulli_g(field, 0.1))
    success = pgm_success(code, f).success
    bound = converse_bound(code, f, 0.1)
    _at_most(report, "pgm.converse", "q=2 n=16 k=14 bernoulli p=0.1 eps=0.1", success, bound, 1e-10)
    _at_most(report, "pgm.converse_nontrivial", "q=2 n=16 k=14 bernoulli p=0.1 eps=0.1", bound, 1.0)


# Sampler


def check_sampler(report: VerificationReport, fields: Fields) -> None:
    """Dense pipeline against q(y), sampling statistics and minimum-weight claims."""
    field = fields.get(2, make_field(2))
    rng = np.random.default_rng(9)
    for n in (3, 4, 5, 6):
        for k in range(1, min(3, n - 1) + 1):
            for kind in ("bernoulli", "table"):
                f, noise_label = _noise_instance(field, n, kind, rng)
                code = random_code(field, n, k, seed=int(rng.integers(0, 2**31)))
                label = f"q=2 n={n} k={k} {noise_label}"
                result = regev_pipeline_oracle(code, f, check=False)
                model = dual_distribution(code, f)
                _close(report, "sampler.pipeline_law", label, np.max(np.abs(result.distribution - model.dense())), 0.0, 1e-10)
                _close(report, "sampler.tweaked_gram", label, result.gram_residual, 0.0, 1e-10)
                _close(report, "sampler.basis_span", label, result.span_residual, 0.0, 1e-10)
                _at_most(report, "sampler.success_floor", label, model.success_floor, result.p_zero, 1e-10)
                _close(report, "sampler.zero_branch_closed_form", label, result.p_zero, zero_branch_probability(code, f), 1e-10)
                plain = regev_pipeline_oracle(code, f, tweaked=False, check=False)
                _close(report, "sampler.untweaked_is_pgm", label, plain.p_zero, model.p_pgm, 1e-10)

    f = AmplitudeFn.product(field, 6, bernoulli_g(field, 0.2))
    code = random_code(field, 6, 2, seed=4)
    model = dual_distribution(code, f)
    draws = 100_000
    samples = sample_dual(model, draws, seed=23)
    positions = np.searchsorted(vector_index(2, model.support), vector_index(2, samples))
    frequencies = np.bincount(positions, minlength=len(model.support)) / draws
    sigma = np.sqrt(model.probabilities * (1 - model.probabilities) / draws)
    excess = np.max(np.abs(frequencies - model.probabilities) - 4 * sigma)
    _at_most(report, "sampler.empirical_law", "q=2 n=6 k=2 draws=1e5", excess, 0.0, 1e-12)

    _check_argmax(report, fields)
    _check_sample_typicality(report, fields.get(2, make_field(2)))

    f = AmplitudeFn.product(field, 16, bernoulli_g(field, 0.1))
    scan = max_prob_dual_scan(field, 16, 0.5, f, 0.15, 1000, seed=0)
    _at_most(report, "sampler.max_prob_envelope", "q=2 n=16 R=0.5 eps=0.15", scan.fraction, 4 * scan.envelope)

    f = AmplitudeFn.product(field, 10, bernoulli_g(field, 0.1))
    outcomes = min_weight_experiment(field, 10, 5, f, hamming_weights, seeds=20, samples_per_seed=1000, master_seed=3)
    ok = [o for o in outcomes if o.status == "ok"]
    measured = np.mean([o.frac_within_margin for o in ok])
    exact = np.array([o.exact_within_margin for o in ok])
    spread = math.sqrt(float(np.sum(exact * (1 - exact))) / 1000) / len(ok)
    _close(report, "sampler.margin_fraction", "q=2 n=10 k=5 seeds=20", measured, exact.mean(), 4 * spread + 1e-12)
    floors = [o.p_zero_branch - o.success_floor for o in ok]
    _at_most(report, "sampler.zero_branch_floor", "q=2 n=10 k=5 seeds=20", 0.0, min(floors), 1e-12)

    field = fields.get(3, make_field(3))
    gibbs = solve_lambda([0, 1, 2], "gibbs", 0.8)
    vectors = all_vectors(3, 5)
    cutoff = 3.5
    log_threshold = gibbs.lam * cutoff + 5 * math.log(gibbs.normalizer, 3)
    threshold = gibbs_weight_threshold(gibbs, 5, log_threshold)
    by_prob = gibbs.log_prob(vectors) >= -log_threshold
    by_weight = gibbs.weight_of(vectors) <= threshold
    _close(report, "sampler.gibbs_threshold", "q=3 n=5 lambda=0.8", np.count_nonzero(by_prob != by_weight), 0, 0.0)


def _check_sample_typicality(report: VerificationReport, field: FieldSpec, n: int = 14, k: int = 4, seeds: int = 200) -> None:
    f = AmplitudeFn.product(field, n, bernoulli_g(field, 0.1))
    models = [dual_distribution(random_code(field, n, k, seed=seed), f) for seed in range(seeds)]
    # eps=0.15 keeps only weights {2, 3}; eps=0.35 keeps weights 1..5
    for eps in (0.15, 0.35):
        T = typical_set_for(f, eps)
        mean = float(np.mean([typicality_of_samples(model, T) for model in models]))
        label = f"q=2 n={n} k={k} bernoulli p=0.1 eps={eps} seeds={seeds}"
        logger.info("Mean typical mass of dual samples at eps=%g: %.4f", eps, mean)
        _close(report, "sampler.typical_mass_ensemble", label, mean, ensemble_typical_mass(f, T), 0.1)
    # mean and label belong to the wide eps=0.35 window
    _at_most(report, "sampler.typical_mass", label, 0.9, mean)


def _check_argmax(report: VerificationReport, fields: Fields, seeds: int = 50) -> None:
    field2 = fields.get(2, make_field(2))
    field3 = fields.get(3, make_field(3))
    gibbs = solve_lambda([0, 1, 2], "gibbs", 0.8)
    rank_params = make_rank_params(field2, 3, 3, 1)
    cases = (
        ("bernoulli", field2, 10, 5, AmplitudeFn.product(field2, 10, bernoulli_g(field2, 0.1)), hamming_weights),
        ("gibbs", field3, 6, 3, AmplitudeFn.product(field3, 6, gibbs.symbol_amplitudes(field3)), gibbs.weight_of),
        ("rank", field2, 9, 4, rank_noise(rank_params), lambda v: rank_weights(field2, v, 3, 3)),
    )
    for name, field, n, k, f, weight in cases:
        mismatches = skipped = 0
        for seed in range(seeds):
            code = random_code(field, n, k, seed=seed)
            try:
                model = dual_distribution(code, f)
            except ZeroDualMassError:
                skipped += 1
                continue
            _, d_min = min_weight_codeword(dual(code), weight)
            best = float(weight(most_likely_dual(model)[None, :])[0])
            mismatches += best != d_min
        if skipped:
            logger.info("Argmax check %s: %d seeds without dual mass", name, skipped)
        _close(report, "sampler.argmax_min_weight", f"{name} q={field.q} n={n} k={k} seeds={seeds}", mismatches, 0, 0.0)


SUITES: dict[str, Suite] = {
    "field": check_field,
    "codes": check_codes,
    "spectral": check_spectral,
    "noise": check_noise,
    "analysis": check_analysis,
    "pgm": check_pgm,
    "sampler": check_sampler,
}


def run_verification(
    suites: Optional[Iterable[str]] = None,
    fields: Optional[Fields] = None,
) -> VerificationReport:
    """
    Run the named invariant suites, or all of them.

    Args:
        suites: Suite names from SUITES; all suites when None.
        fields: Fields keyed by order, e.g. a perturbed copy for fault injection.

    Returns:
        VerificationReport with every check.
    """
    names = list(SUITES) if suites is None else list(suites)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    fields = default_fields() if fields is None else fields

    report = VerificationReport(suites=names)
    for name in names:
        before = len(report.checks)
        SUITES[name](report, fields)
        failed = sum(not c.passed for c in report.checks[before:])
        logger.info("Suite %s: %d checks, %d failed", name, len(report.checks) - before, failed)
    return report

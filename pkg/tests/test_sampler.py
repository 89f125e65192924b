import dataclasses
import math

import numpy as np
import pytest

from analysis import typical_set_for, typical_set_product
from codes import coset_representatives, from_generator, random_code, systematic_code
from fq_core import hamming_weights, vector_index
from noise import bernoulli_g, uniform_g
from pgm import PreconditionError, pgm_success
from sampler import (
    ZeroDualMassError,
    dual_distribution,
    ensemble_typical_mass,
    max_prob_dual_scan,
    min_weight_experiment,
    most_likely_dual,
    regev_pipeline_oracle,
    sample_dual,
    success_floor,
    typicality_of_samples,
    zero_branch_probability,
)
from spectral import AmplitudeFn


def bernoulli(field, n, p=0.1):
    return AmplitudeFn.product(field, n, bernoulli_g(field, p))


def test_repetition_code_law(F2):
    model = dual_distribution(from_generator(F2, [[1, 1]]), bernoulli(F2, 2))
    np.testing.assert_array_equal(model.support, [[1, 1]])
    np.testing.assert_allclose(model.probabilities, [1.0])


def test_law_is_proportional_to_power(F3):
    code = systematic_code(F3, 4, 2, seed=3)
    f = bernoulli(F3, 4, 0.3)
    model = dual_distribution(code, f)
    assert model.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    assert len(model.support) == 8
    expected = f.power_at(model.support) / f.power_at(model.support).sum()
    np.testing.assert_allclose(model.probabilities, expected, atol=1e-12)
    dense = model.dense()
    assert dense[0] == 0.0
    assert dense.sum() == pytest.approx(1.0, abs=1e-12)


def test_zero_dual_mass(F2):
    code = random_code(F2, 4, 2, seed=0)
    with pytest.raises(ZeroDualMassError):
        dual_distribution(code, AmplitudeFn.product(F2, 4, uniform_g(F2)))


def test_zero_branch_above_floor(F2):
    for seed in range(10):
        code = random_code(F2, 8, 4, seed=seed)
        f = bernoulli(F2, 8, 0.1)
        assert zero_branch_probability(code, f) >= success_floor(code, f) - 1e-12


def test_floor_formula(F2):
    code = systematic_code(F2, 6, 3, seed=1)
    f = bernoulli(F2, 6)
    p = pgm_success(code, f).success
    assert success_floor(code, f) == pytest.approx((np.sqrt(p) - 2**-1.5) ** 2, abs=1e-12)
    assert success_floor(code, f, p_pgm=0.0) == pytest.approx(1 / 8)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pipeline_matches_law(F2, seed):
    code = random_code(F2, 6, 3, seed=seed)
    f = bernoulli(F2, 6, 0.2)
    result = regev_pipeline_oracle(code, f)
    assert result.gram_residual < 1e-10
    assert result.span_residual < 1e-10
    assert result.p_zero == pytest.approx(zero_branch_probability(code, f), abs=1e-10)
    np.testing.assert_allclose(result.distribution, dual_distribution(code, f).dense(), atol=1e-10)


def test_pipeline_with_shifted_representatives(F3):
    code = systematic_code(F3, 4, 2, seed=0)
    f = bernoulli(F3, 4, 0.2)
    plain = regev_pipeline_oracle(code, f)
    shifted = regev_pipeline_oracle(code, f, coset_representatives(code, shift_seed=5))
    assert shifted.p_zero == pytest.approx(plain.p_zero, abs=1e-10)


def test_untweaked_pipeline_is_the_pgm(F2):
    code = random_code(F2, 5, 2, seed=4)
    f = bernoulli(F2, 5, 0.2)
    result = regev_pipeline_oracle(code, f, tweaked=False)
    assert result.p_zero == pytest.approx(pgm_success(code, f).success, abs=1e-10)
    power = np.where(code.syndrome_table == 0, f.power_spectrum, 0.0)
    np.testing.assert_allclose(result.distribution, power / power.sum(), atol=1e-10)


def test_sampling_follows_the_law(F2):
    code = systematic_code(F2, 6, 3, seed=2)
    model = dual_distribution(code, bernoulli(F2, 6, 0.2))
    draws = 20000
    samples = sample_dual(model, draws, seed=7)
    assert samples.any(axis=1).all()
    index = vector_index(2, samples)
    counts = np.bincount(index, minlength=64)[vector_index(2, model.support)]
    p = model.probabilities
    sigma = np.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(counts - draws * p) <= 5 * sigma + 1)


def test_sampling_is_seeded(F2):
    model = dual_distribution(systematic_code(F2, 6, 3, seed=2), bernoulli(F2, 6))
    np.testing.assert_array_equal(sample_dual(model, 50, seed=1), sample_dual(model, 50, seed=1))


def test_sampling_skips_zero_mass_codewords(F2):
    model = dual_distribution(systematic_code(F2, 6, 3, seed=2), bernoulli(F2, 6))
    probabilities = np.zeros(len(model.support))
    probabilities[:3] = 1 / 3
    truncated = dataclasses.replace(model, probabilities=probabilities)
    samples = sample_dual(truncated, 5000, seed=11)
    allowed = set(vector_index(2, model.support[:3]).tolist())
    assert set(vector_index(2, samples).tolist()) <= allowed


def test_most_likely_dual_has_min_weight(F2):
    # the power spectrum decreases in Hamming weight
    code = systematic_code(F2, 8, 4, seed=6)
    model = dual_distribution(code, bernoulli(F2, 8, 0.1))
    best = most_likely_dual(model)
    assert hamming_weights(best)[0] == hamming_weights(model.support).min()


def test_typicality_of_samples(F2):
    code = systematic_code(F2, 6, 2, seed=0)
    f = bernoulli(F2, 6)
    model = dual_distribution(code, f)
    mass = typicality_of_samples(model, typical_set_product(F2, f.symbol_power, 6, 0.3))
    assert 0.0 <= mass <= 1.0
    with pytest.raises(PreconditionError):
        typicality_of_samples(model, typical_set_product(F2, f.symbol_power, 5, 0.3))


def test_ensemble_typical_mass(F2):
    f = bernoulli(F2, 14)
    p = [math.comb(14, w) * 0.8 ** (14 - w) * 0.2**w for w in range(15)]
    # eps=0.15 keeps weights 2 and 3, eps=0.35 keeps weights 1..5
    assert ensemble_typical_mass(f, typical_set_for(f, 0.15)) == pytest.approx((p[2] + p[3]) / (1 - p[0]), rel=1e-9)
    assert ensemble_typical_mass(f, typical_set_for(f, 0.35)) == pytest.approx(sum(p[1:6]) / (1 - p[0]), rel=1e-9)


@pytest.mark.slow
def test_dual_samples_are_mostly_typical(F2):
    f = bernoulli(F2, 14)
    models = [dual_distribution(random_code(F2, 14, 4, seed=seed), f) for seed in range(200)]
    for eps in (0.15, 0.35):
        T = typical_set_for(f, eps)
        mean = np.mean([typicality_of_samples(model, T) for model in models])
        assert mean == pytest.approx(ensemble_typical_mass(f, T), abs=0.1)
    assert mean >= 0.9


def test_max_prob_scan_noiseless(F2):
    # p(y) = 2^-n for every y, never above 2^(-n(R - eps))
    f = bernoulli(F2, 8, 0.0)
    result = max_prob_dual_scan(F2, 8, 0.5, f, 0.1, trials=10, seed=0)
    assert result.fraction == 0.0
    assert result.envelope == 0.0


def test_max_prob_scan_above_envelope_rate(F2):
    f = bernoulli(F2, 8, 0.1)
    result = max_prob_dual_scan(F2, 8, 0.5, f, 0.45, trials=20, seed=0)
    assert 0.0 <= result.fraction <= 1.0
    assert result.trials == 20


def test_max_prob_scan_preconditions(F2):
    f = bernoulli(F2, 4)
    with pytest.raises(PreconditionError):
        max_prob_dual_scan(F2, 4, 1.5, f, 0.1, trials=1, seed=0)
    with pytest.raises(PreconditionError):
        max_prob_dual_scan(F2, 4, 0.1, f, 0.05, trials=1, seed=0)


def test_min_weight_experiment(F2):
    f = bernoulli(F2, 10)
    outcomes = min_weight_experiment(F2, 10, 5, f, hamming_weights, seeds=5, samples_per_seed=200, eps=0.3)
    assert len(outcomes) == 5
    for outcome in outcomes:
        assert outcome.status == "ok"
        assert outcome.d_min >= 1
        assert 0.0 <= outcome.frac_within_margin <= 1.0
        assert outcome.p_zero_branch >= outcome.success_floor - 1e-12
        assert outcome.typical_mass is not None
    again = min_weight_experiment(F2, 10, 5, f, hamming_weights, seeds=5, samples_per_seed=200, eps=0.3)
    assert outcomes == again


def test_min_weight_experiment_zero_mass(F2):
    f = AmplitudeFn.product(F2, 6, uniform_g(F2))
    outcomes = min_weight_experiment(F2, 6, 3, f, hamming_weights, seeds=2, samples_per_seed=10)
    assert [o.status for o in outcomes] == ["zero_dual_mass", "zero_dual_mass"]
    assert outcomes[0].expected_weight is None

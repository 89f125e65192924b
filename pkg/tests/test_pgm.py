import math

import numpy as np
import pytest

from analysis import typical_set_product
from codes import coset_representatives, from_generator, nested_codes, random_code, systematic_code
from fq_core import make_field
from noise import bernoulli_g, make_rank_params, rank_noise, uniform_g
from pgm import (
    ConsistencyError,
    PreconditionError,
    concentration_check,
    coset_masses,
    converse_bound,
    distinguishability_bound,
    pgm_dense_oracle,
    pgm_dense_per_codeword,
    pgm_success,
    pgm_success_from_representatives,
    truncated_fidelity,
    ztilde_moments,
)
from spectral import AmplitudeFn


def bernoulli(field, n, p=0.1):
    return AmplitudeFn.product(field, n, bernoulli_g(field, p))


def test_noiseless_is_perfect(F3):
    code = random_code(F3, 4, 2, seed=0)
    assert pgm_success(code, bernoulli(F3, 4, 0.0)).success == pytest.approx(1.0, abs=1e-12)


def test_uniform_noise_is_guessing(F2):
    code = random_code(F2, 5, 3, seed=1)
    report = pgm_success(code, AmplitudeFn.product(F2, 5, uniform_g(F2)))
    assert report.success == pytest.approx(report.guessing, abs=1e-12)


def test_masses_cover_unit_norm(F2):
    code = random_code(F2, 6, 3, seed=2)
    masses = coset_masses(code, bernoulli(F2, 6))
    assert len(masses) == code.size
    assert np.sum(masses**2) == pytest.approx(1.0, abs=1e-12)
    assert pgm_success(code, bernoulli(F2, 6)).mass_residual < 1e-12


@pytest.mark.parametrize(
    "q_s,n,k,seed",
    [((2, 1), 6, 3, 0), ((2, 1), 5, 1, 4), ((3, 1), 4, 2, 1), ((2, 2), 3, 1, 2)],
)
def test_dense_oracle_matches_closed_form(q_s, n, k, seed):
    field = make_field(*q_s)
    code = random_code(field, n, k, seed=seed)
    f = bernoulli(field, n, 0.2)
    assert pgm_dense_oracle(code, f) == pytest.approx(pgm_success(code, f).success, abs=1e-9)


def test_every_codeword_succeeds_equally(F2):
    code = random_code(F2, 6, 2, seed=3)
    per_codeword = pgm_dense_per_codeword(code, bernoulli(F2, 6, 0.15))
    np.testing.assert_allclose(per_codeword, per_codeword[0], atol=1e-9)


def test_rank_noise_oracle(F2):
    f = rank_noise(make_rank_params(F2, 2, 2, 1))
    code = random_code(F2, 4, 2, seed=5)
    assert pgm_dense_oracle(code, f) == pytest.approx(pgm_success(code, f).success, abs=1e-9)


def test_representative_choice_does_not_matter(F2):
    code = random_code(F2, 6, 3, seed=6)
    f = bernoulli(F2, 6, 0.2)
    expected = pgm_success(code, f).success
    assert pgm_success_from_representatives(code, f) == pytest.approx(expected, abs=1e-12)
    shifted = coset_representatives(code, shift_seed=17)
    assert pgm_success_from_representatives(code, f, shifted) == pytest.approx(expected, abs=1e-12)


def test_representative_table_is_validated(F2):
    code = from_generator(F2, [[1, 1, 0], [0, 1, 1]])
    f = bernoulli(F2, 3)
    with pytest.raises(PreconditionError):
        pgm_success_from_representatives(code, f, np.zeros((4, 3), dtype=int))
    with pytest.raises(PreconditionError):
        pgm_success_from_representatives(code, f, np.zeros((2, 3), dtype=int))


def test_incompatible_noise(F2, F3):
    code = random_code(F2, 4, 2, seed=0)
    with pytest.raises(PreconditionError):
        pgm_success(code, bernoulli(F2, 5))
    with pytest.raises(PreconditionError):
        pgm_success(code, bernoulli(F3, 4))


def test_low_rate_beats_high_rate(F2):
    def mean_success(k):
        return np.mean([pgm_success(random_code(F2, 8, k, seed), bernoulli(F2, 8)).success for seed in range(20)])

    assert mean_success(1) > mean_success(7)


def test_subcodes_never_do_worse(F2):
    f = bernoulli(F2, 8)
    for seed in range(10):
        codes = nested_codes(F2, 8, seed=seed)
        successes = [pgm_success(codes[k], f).success for k in range(1, 8)]
        assert all(later <= earlier + 1e-12 for earlier, later in zip(successes, successes[1:]))


def test_ztilde_exhaustive_mean_whole_space(F2):
    # eps large enough that T is all of F_2^3
    moments = ztilde_moments(F2, 3, 1, bernoulli(F2, 3), 10.0, [0, 0, 0])
    assert moments.count == 8
    assert moments.exact_mean == pytest.approx((1 + 0.8**3) / 2, abs=1e-12)
    assert moments.mean == pytest.approx(moments.exact_mean, abs=1e-12)


def test_ztilde_exhaustive_moments(F2):
    f = bernoulli(F2, 4)
    for s in ([0, 0, 0, 0], [1, 0, 1, 0]):
        moments = ztilde_moments(F2, 4, 2, f, 0.3, s)
        assert moments.mean == pytest.approx(moments.exact_mean, abs=1e-12)
        assert moments.variance <= moments.variance_bound + 1e-12


def test_ztilde_montecarlo_is_close(F2):
    f = bernoulli(F2, 4)
    exact = ztilde_moments(F2, 4, 2, f, 0.3, [0, 0, 0, 0])
    sampled = ztilde_moments(F2, 4, 2, f, 0.3, [0, 0, 0, 0], mode="montecarlo", trials=4000, seed=1)
    assert sampled.count == 4000
    sigma = math.sqrt(exact.variance / 4000)
    assert abs(sampled.mean - exact.mean) <= 5 * sigma + 1e-12


def test_ztilde_rejects_bad_inputs(F2):
    with pytest.raises(PreconditionError):
        ztilde_moments(F2, 4, 2, bernoulli(F2, 5), 0.3, [0, 0, 0, 0])
    with pytest.raises(PreconditionError):
        ztilde_moments(F2, 4, 2, bernoulli(F2, 4), 0.3, [0, 0, 0, 0], mode="other")


def test_concentration_low_rate(F2):
    assert concentration_check(F2, 10, 1, bernoulli(F2, 10), 0.1, trials=20, seed=0) == 1.0


def test_concentration_preconditions(F2):
    f = bernoulli(F2, 10)
    with pytest.raises(PreconditionError):
        concentration_check(F2, 10, 8, f, 0.1, trials=5, seed=0)
    with pytest.raises(PreconditionError):
        concentration_check(F2, 10, 1, f, 0.2, trials=5, seed=0)


def test_truncated_fidelity(F2):
    f = bernoulli(F2, 6)
    code = random_code(F2, 6, 2, seed=1)
    spec = typical_set_product(F2, f.symbol_power, 6, 0.3)
    for c in code.codewords():
        assert truncated_fidelity(code, f, spec, c) == pytest.approx(math.sqrt(1 - spec.defect), abs=1e-12)


def test_truncated_fidelity_needs_codeword(F2):
    code = from_generator(F2, [[1, 1, 0, 0]])
    f = bernoulli(F2, 4)
    spec = typical_set_product(F2, f.symbol_power, 4, 0.3)
    with pytest.raises(PreconditionError):
        truncated_fidelity(code, f, spec, [1, 0, 0, 0])


def test_distinguishability_bound():
    assert distinguishability_bound(4, 2) == 0.5
    assert distinguishability_bound(2, 8) == 1.0
    with pytest.raises(PreconditionError):
        distinguishability_bound(0, 1)


def test_converse_above_capacity(F2):
    code = systematic_code(F2, 16, 14, seed=0)
    f = bernoulli(F2, 16)
    success = pgm_success(code, f).success
    bound = converse_bound(code, f, 0.1, p_pgm=success)
    # |T| = C(16,3) + C(16,4) and delta is the mass outside j in {3, 4}
    spec = typical_set_product(F2, f.symbol_power, 16, 0.1)
    assert spec.cardinality == 560 + 1820
    assert bound == pytest.approx(2380 / 2**14 + math.sqrt(spec.defect), abs=1e-12)
    assert success <= bound < 1.0
    with pytest.raises(ConsistencyError):
        converse_bound(code, f, 0.1, p_pgm=0.99)

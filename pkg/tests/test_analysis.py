import numpy as np
import pytest

from analysis import (
    DistributionError,
    entropy_q,
    extract_family_constants,
    hirschman_check,
    hoeffding_bound,
    holevo_capacity,
    nice_family_check,
    rank_entropy_per_symbol,
    rank_gv_distance,
    rank_params_of,
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
from fq_core import all_vectors, make_field, rank_weights
from noise import bernoulli_g, make_rank_params, rank_noise
from spectral import AmplitudeFn


def test_entropy_values(F2, F3):
    assert entropy_q([0.8, 0.2], F2) == pytest.approx(0.7219280949, abs=1e-9)
    assert entropy_q([1 / 3] * 3, F3) == pytest.approx(1.0, abs=1e-12)
    assert entropy_q([1.0, 0.0, 0.0], F3) == 0.0


def test_entropy_rejects_bad_distributions(F2):
    with pytest.raises(DistributionError):
        entropy_q([0.5, 0.6], F2)
    with pytest.raises(DistributionError):
        entropy_q([1.5, -0.5], F2)
    with pytest.raises(DistributionError):
        entropy_q([], F2)


def test_bernoulli_capacities(F2):
    g = bernoulli_g(F2, 0.1)
    assert holevo_capacity(F2, g) == pytest.approx(0.7219280949, abs=1e-9)
    assert shannon_capacity(F2, g) == pytest.approx(0.5310044064, abs=1e-9)


def test_hirschman_sum(F2):
    result = hirschman_check(F2, np.sqrt([0.9, 0.1]))
    assert result.total == pytest.approx(1.19093, abs=1e-5)
    assert result.holds
    assert not result.upper_direction_holds


def test_hirschman_boundary(F2, F5):
    for field in (F2, F5):
        delta = np.zeros(field.q)
        delta[0] = 1.0
        result = hirschman_check(field, delta)
        assert result.total == pytest.approx(1.0, abs=1e-12)
        assert result.holds and result.upper_direction_holds


def test_hirschman_random_functions(F3):
    rng = np.random.default_rng(5)
    for _ in range(200):
        g = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert hirschman_check(F3, g / np.linalg.norm(g)).holds


def test_uniform_product_typical_set(F2):
    spec = typical_set_product(F2, [0.5, 0.5], 6, 0.1)
    assert spec.cardinality == 64
    assert spec.defect == pytest.approx(0.0, abs=1e-12)
    assert spec.lower == pytest.approx(2.0 ** (-6 * 1.1))


def test_small_product_typical_set(F2):
    spec = typical_set_product(F2, [0.9, 0.1], 2, 0.5)
    assert spec.cardinality == 1
    assert spec.defect == pytest.approx(0.19, abs=1e-12)
    assert list(spec.contains(np.array([[0, 0], [0, 1], [1, 1]]))) == [True, False, False]


def test_typical_members_obey_bounds(F3):
    r = np.array([0.6, 0.3, 0.1])
    spec = typical_set_product(F3, r, 5, 0.2)
    vectors = all_vectors(3, 5)
    probs = np.prod(r[vectors], axis=1)
    members = spec.contains(vectors)
    assert members.sum() == spec.cardinality
    assert probs[members].min() >= spec.lower * (1 - 1e-7)
    assert probs[members].max() <= spec.upper * (1 + 1e-7)
    assert probs[~members].sum() == pytest.approx(spec.defect, abs=1e-12)


def test_hoeffding_bounds_the_defect(F2):
    r = [0.9, 0.1]
    for n, eps in ((20, 0.3), (50, 0.3), (80, 0.4)):
        assert typical_set_product(F2, r, n, eps).defect <= hoeffding_bound(F2, r, n, eps)
    two = hoeffding_bound(F2, r, 200, 0.3)
    one = hoeffding_bound(F2, r, 200, 0.3, two_sided=False)
    assert two == pytest.approx(2 * one)
    assert hoeffding_bound(F2, [1.0, 0.0], 10, 0.1) == 0.0


def test_monte_carlo_agrees_with_exact_defect(F2):
    exact = typical_set_product(F2, [0.8, 0.2], 20, 0.1).defect
    estimate, sigma = typical_defect_monte_carlo(F2, [0.8, 0.2], 20, 0.1, samples=20000, seed=0)
    assert abs(estimate - exact) <= 4 * sigma + 1e-3


def test_product_family_is_nice(F2):
    r = [0.8, 0.2]
    family = [typical_set_product(F2, r, n, 0.1) for n in (16, 32, 64)]
    H = family[0].rate
    report = nice_family_check(family, H, 0.1, 0.1, 1.0, 1.0)
    assert report.passed, report.violations
    assert len(report.sandwich) == 3
    k1, k2 = extract_family_constants(family, H, 0.1, 0.1)
    assert k1 == pytest.approx(1.0, abs=1e-9)
    assert k2 == pytest.approx(1.0, abs=1e-9)


def test_nice_family_flags_a_violation(F2):
    family = [typical_set_product(F2, [0.8, 0.2], 16, 0.1)]
    report = nice_family_check(family, family[0].rate, 0.1, 0.1, 2.0, 1.0)
    assert not report.passed
    assert report.violations[0][1] == "lower envelope"


def test_rank_shells_three_by_three(F2):
    params = make_rank_params(F2, 3, 3, 1)
    masses = rank_shell_masses(params)
    np.testing.assert_allclose(masses, np.array([49, 441, 294, 0]) / 784, atol=1e-12)


def test_rank_typical_set(F2):
    params = make_rank_params(F2, 3, 3, 1)
    spec = typical_set_rank(params, 1 / 3)
    assert spec.cardinality == 343
    assert spec.defect == pytest.approx(0.0625, abs=1e-12)
    assert spec.rate == pytest.approx((4 / 3) * (2 / 3))
    members = spec.contains(all_vectors(2, 9))
    assert members.sum() == 343


def test_rank_typical_members_obey_bounds(F2):
    params = make_rank_params(F2, 3, 3, 1)
    spec = typical_set_rank(params, 1 / 3)
    vectors = all_vectors(2, 9)
    point = params.dual().radial() ** 2
    probs = point[rank_weights(F2, vectors, 3, 3)]
    members = spec.contains(vectors)
    assert probs[members].min() >= spec.lower * (1 - 1e-12)
    assert probs[members].max() <= spec.upper * (1 + 1e-12)


def test_rank_typical_set_needs_positive_eps(F2):
    params = make_rank_params(F2, 3, 3, 1)
    for eps in (0.0, -0.2):
        with pytest.raises(DistributionError):
            typical_set_rank(params, eps)


def test_rank_tail_profile(F2):
    tail, envelope = rank_tail_profile(make_rank_params(F2, 3, 3, 1), 1 / 3)
    assert tail == pytest.approx(0.0625, abs=1e-12)
    assert envelope == pytest.approx(0.5)


def test_rank_tail_constant(F2):
    assert rank_tail_constant(make_rank_params(F2, 3, 3, 1), 0.5) == pytest.approx(0.0625 * 2**2.25, rel=1e-12)


@pytest.mark.parametrize("q,sizes", [(2, range(3, 8)), (3, range(3, 6))])
def test_rank_tail_constant_ladder(q, sizes):
    field = make_field(q)
    constants = [rank_tail_constant(make_rank_params(field, a, a, 1), 0.5) for a in sizes]
    assert constants[0] > 0
    assert max(constants[1:]) <= constants[0]


def test_rank_shell_ratios(F2, F3):
    np.testing.assert_allclose(rank_shell_ratios(make_rank_params(F2, 3, 3, 1)), [1 / 9, 1.5], rtol=1e-12)
    np.testing.assert_allclose(rank_shell_ratios(make_rank_params(F3, 2, 2, 1)), [0.5], rtol=1e-12)
    assert rank_shell_ratios(make_rank_params(F2, 2, 2, 2)).size == 0
    assert rank_shell_ratio_bound(F2) == pytest.approx(4.0)
    assert rank_shell_ratio_bound(F3) == pytest.approx(1.125)


@pytest.mark.parametrize("q,top", [(2, 6), (3, 4)])
def test_rank_shell_ratios_are_bounded(q, top):
    field = make_field(q)
    for a in range(2, top + 1):
        for t in range(a):
            assert rank_shell_ratios(make_rank_params(field, a, a, t)).max() <= rank_shell_ratio_bound(field)


def test_rank_entropy_closed_form(F2):
    closed, exact = rank_entropy_per_symbol(make_rank_params(F2, 2, 2, 1))
    assert closed == pytest.approx(0.75)
    assert 0.0 < exact <= 1.0


@pytest.mark.parametrize("q,sizes", [(2, range(2, 7)), (3, range(2, 6))])
def test_rank_entropy_gap_shrinks_like_one_over_a(q, sizes):
    field = make_field(q)
    gaps = []
    for a in sizes:
        closed, exact = rank_entropy_per_symbol(make_rank_params(field, a, a, 1))
        gaps.append(abs(closed - exact))
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
    scaled = [a * gap for a, gap in zip(sizes, gaps)]
    assert max(scaled[1:]) <= scaled[0]


@pytest.mark.parametrize("q,sizes", [(2, range(2, 7)), (3, range(2, 6))])
def test_rank_normalizer_tracks_gaussian_binomial(q, sizes):
    field = make_field(q)
    for a in sizes:
        params = make_rank_params(field, a, a, 1)
        ratio = params.Z / params.binomial(a, 1)
        assert ratio == pytest.approx(q / (q - 1) * (1 - q ** -a), rel=1e-12)
        assert 1.0 <= ratio < q / (q - 1)


def test_rank_gv_distance():
    assert rank_gv_distance(4, 4, 0.5) == 1
    assert rank_gv_distance(3, 3, 0.9) == 2
    assert rank_gv_distance(2, 2, 0.1) == 0
    with pytest.raises(DistributionError):
        rank_gv_distance(3, 3, 1.0)


def test_rank_params_recovered_from_amplitude(F2):
    for t in (0, 1, 3):
        params = make_rank_params(F2, 3, 3, t)
        assert rank_params_of(rank_noise(params)).t == t


def test_typical_set_dispatch(F2):
    product = AmplitudeFn.product(F2, 8, bernoulli_g(F2, 0.1))
    assert typical_set_for(product, 0.1).kind == "product"
    assert typical_set_for(rank_noise(make_rank_params(F2, 3, 3, 1)), 1 / 3).cardinality == 343
    dense = AmplitudeFn.dense_values(F2, 1, [1.0, 0.0])
    with pytest.raises(DistributionError):
        typical_set_for(dense, 0.1)

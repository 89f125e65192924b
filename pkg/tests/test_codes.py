import numpy as np
import pytest

from codes import (
    CodeError,
    RankDeficientError,
    code_from_record,
    code_to_record,
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
from fq_core import all_vectors, dot, hamming_weights, rank_weights, vector_index


def test_random_code_size(F2):
    code = random_code(F2, 4, 2, seed=7)
    assert code.G.shape == (2, 4)
    assert code.size == 2**code.rank
    assert code.size * code.dual_size == 16
    assert code.seed == 7


def test_random_code_is_seeded(F3):
    a = random_code(F3, 5, 2, seed=3)
    b = random_code(F3, 5, 2, seed=3)
    np.testing.assert_array_equal(a.G, b.G)


def test_random_code_bounds(F2):
    with pytest.raises(CodeError):
        random_code(F2, 4, 4, seed=0)
    with pytest.raises(CodeError):
        random_code(F2, 4, 0, seed=0)


def test_zero_generator_is_trivial_code(F2):
    code = from_generator(F2, np.zeros((2, 3), dtype=int))
    assert code.rank == 0
    assert code.size == 1
    assert len(code.dual_codewords()) == 8


def test_strict_rejects_rank_deficient(F2):
    # n=2, k=1: the only rank-deficient draw is G = 0, so search for it
    for seed in range(200):
        if not random_code(F2, 2, 1, seed).G.any():
            with pytest.raises(RankDeficientError):
                random_code(F2, 2, 1, seed, strict=True)
            return
    pytest.skip("no zero generator among the first 200 seeds")


def test_exhaustive_one_row_codes(F2):
    sizes = [from_generator(F2, g[None, :]).size for g in all_vectors(2, 3)]
    assert sum(s == 2 for s in sizes) == 7
    assert sizes[0] == 1


def test_whole_space_dual(F2):
    code = from_generator(F2, np.eye(2, dtype=int))
    np.testing.assert_array_equal(code.dual_codewords(), [[0, 0]])


def test_repetition_code_is_self_dual(F2):
    code = from_generator(F2, [[1, 1]])
    np.testing.assert_array_equal(code.codewords(), [[0, 0], [1, 1]])
    np.testing.assert_array_equal(code.dual_codewords(), [[0, 0], [1, 1]])
    np.testing.assert_array_equal(dual(code).codewords(), [[0, 0], [1, 1]])


def test_ternary_dual_size(F3):
    code = from_generator(F3, [[1, 0, 1, 2], [0, 1, 1, 1]])
    assert code.rank == 2
    assert len(code.dual_codewords()) == 9
    assert not dot(F3, code.G, code.H.T).any()


def test_pivot_representative(F2):
    code = from_generator(F2, [[1, 1]])
    np.testing.assert_array_equal(code.coset_representative(0), [0, 0])
    np.testing.assert_array_equal(code.coset_representative(1), [1, 0])


def test_representatives_have_their_syndromes(F3):
    code = random_code(F3, 4, 2, seed=1)
    for s in range(code.num_syndromes):
        rep = code.coset_representative(s)
        assert code.syndrome_index(rep) == s


def test_shifted_representatives_stay_valid(F2):
    code = random_code(F2, 6, 3, seed=2)
    plain = coset_representatives(code)
    shifted = coset_representatives(code, shift_seed=9)
    np.testing.assert_array_equal(shifted[0], np.zeros(6, dtype=int))
    for reps in (plain, shifted):
        found = code.syndrome_table[vector_index(2, reps)]
        np.testing.assert_array_equal(found, np.arange(code.num_syndromes))
    assert not np.array_equal(plain[1:], shifted[1:])


def test_zero_coset_is_the_dual(F2):
    code = random_code(F2, 5, 2, seed=4)
    np.testing.assert_array_equal(enumerate_coset(code, 0), code.dual_codewords())


def test_cosets_partition_the_space(F3):
    code = random_code(F3, 4, 2, seed=5)
    cosets = np.concatenate([enumerate_coset(code, s) for s in range(code.num_syndromes)])
    np.testing.assert_array_equal(np.sort(vector_index(3, cosets)), np.arange(81))


def test_bad_syndrome_index(F2):
    code = random_code(F2, 4, 2, seed=0)
    with pytest.raises(CodeError):
        code.coset_representative(code.num_syndromes)


def test_min_weight_single_candidate(F2):
    code = from_generator(F2, [[1, 1]])
    word, weight = min_weight_codeword(code, hamming_weights)
    np.testing.assert_array_equal(word, [1, 1])
    assert weight == 2


def test_min_weight_tie_break(F2):
    code = random_code(F2, 5, 3, seed=6)
    word, weight = min_weight_codeword(code, lambda v: np.zeros(len(v)))
    np.testing.assert_array_equal(word, code.codewords()[1])
    assert weight == 0


def test_min_rank_weight_matches_scan(F2):
    code = dual(random_code(F2, 4, 2, seed=8))
    weight = lambda v: rank_weights(F2, v, 2, 2)  # noqa: E731
    _, best = min_weight_codeword(code, weight)
    assert best == weight(code.codewords()[1:]).min()


def test_min_weight_needs_nonzero_word(F2):
    with pytest.raises(CodeError):
        min_weight_codeword(from_generator(F2, [[0, 0]]), hamming_weights)


def test_nested_codes_are_subcodes(F2):
    codes = nested_codes(F2, 6, seed=3)
    assert sorted(codes) == [1, 2, 3, 4, 5]
    for k in range(1, 5):
        smaller, larger = codes[k], codes[k + 1]
        np.testing.assert_array_equal(smaller.G, larger.G[:k])
        assert smaller.rank <= larger.rank
        assert not dot(F2, smaller.codewords(), larger.H.T).any()
    with pytest.raises(CodeError):
        nested_codes(F2, 1, seed=0)


def test_systematic_code_is_full_rank(F2):
    code = systematic_code(F2, 16, 14, seed=0)
    assert code.rank == 14
    np.testing.assert_array_equal(code.G[:, :14], np.eye(14, dtype=int))


def test_code_record_round_trip(F4):
    code = random_code(F4, 4, 2, seed=11)
    record = code_to_record(code)
    assert (record.p, record.s, record.q) == (2, 2, 4)
    restored = code_from_record(record)
    np.testing.assert_array_equal(restored.codewords(), code.codewords())
    assert restored.seed == 11


def test_intersection_moments_all_nonzero_vectors(F2):
    subset = all_vectors(2, 3)[1:]
    moments = intersection_moments(F2, 3, 1, subset)
    assert moments.count == 2**6
    assert moments.mean == pytest.approx(7 / 4, abs=1e-12)
    assert moments.variance == pytest.approx(7 * (1 / 4) * (3 / 4), abs=1e-12)


def test_dual_membership_probability(F2):
    assert dual_membership_probability(F2, 4, 2, [1, 0, 0, 0], [0, 0, 0, 0]) == pytest.approx(0.25, abs=1e-12)
    assert dual_membership_probability(F2, 4, 3, [1, 1, 0, 1], [0, 1, 1, 0]) == pytest.approx(0.125, abs=1e-12)

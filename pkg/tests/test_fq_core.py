import numpy as np
import pytest

from fq_core import (
    FieldError,
    all_vectors,
    as_vector,
    character,
    character_vec,
    characters,
    hamming_weights,
    make_field,
    matv,
    rank_weight,
    rank_weight_table,
    vector_index,
)


def test_prime_field_trace_is_identity(F2, F3):
    assert list(F2.trace) == [0, 1]
    assert list(F3.trace) == [0, 1, 2]


def test_f3_character(F3):
    assert character(F3, 1, 1) == pytest.approx(np.exp(2j * np.pi / 3))


def test_f4_trace_and_character(F4):
    # omega is the integer 2 in the polynomial basis; omega^2 = omega + 1
    assert F4.trace[2] == 1
    assert F4.trace[1] == 0
    assert F4.mul[2, 2] == 3
    assert character(F4, 2, 2) == pytest.approx(-1.0)


def test_basic_characters(F2, F5):
    assert character(F2, 1, 1) == pytest.approx(-1.0)
    np.testing.assert_allclose(F5.chars[0], np.ones(5))


def test_characters_orthogonal(F2, F3, F4, F5):
    for field in (F2, F3, F4, F5):
        gram = field.chars @ field.chars.conj().T
        np.testing.assert_allclose(gram, field.q * np.eye(field.q), atol=1e-12)


def test_vector_characters(F2, F3):
    assert character_vec(F2, [0, 0], [1, 1]) == pytest.approx(1.0)
    assert character_vec(F2, [1, 1], [1, 1]) == pytest.approx(1.0)
    assert character_vec(F3, [1, 1], [1, 2]) == pytest.approx(1.0)
    assert character_vec(F3, [1, 0], [1, 2]) == pytest.approx(np.exp(2j * np.pi / 3))


def test_character_matrix_matches_pointwise(F3):
    ys = all_vectors(3, 2)
    matrix = characters(F3, ys, ys)
    assert matrix.shape == (9, 9)
    assert matrix[4, 7] == pytest.approx(character_vec(F3, ys[4], ys[7]))


def test_character_length_mismatch(F2):
    with pytest.raises(FieldError):
        character_vec(F2, [1, 0], [1, 0, 1])


def test_make_field_rejects_bad_parameters():
    with pytest.raises(FieldError):
        make_field(4)
    with pytest.raises(FieldError):
        make_field(2, 0)


def test_make_field_is_shared():
    assert make_field(3) is make_field(3)


def test_as_vector_checks_entries(F3):
    with pytest.raises(FieldError):
        as_vector(F3, [0, 3])
    with pytest.raises(FieldError):
        as_vector(F3, [[0, 1]])


def test_vector_indexing_is_lexicographic():
    vectors = all_vectors(2, 3)
    assert list(vectors[5]) == [1, 0, 1]
    np.testing.assert_array_equal(vector_index(3, all_vectors(3, 4)), np.arange(81))


def test_matv_row_major():
    np.testing.assert_array_equal(matv([1, 0, 0, 1], 2, 2), np.eye(2, dtype=int))
    np.testing.assert_array_equal(matv([0, 0, 0, 0], 2, 2), np.zeros((2, 2), dtype=int))
    np.testing.assert_array_equal(matv([1, 2, 3, 4, 5, 6], 2, 3), [[1, 2, 3], [4, 5, 6]])
    with pytest.raises(FieldError):
        matv([1, 2, 3], 2, 2)


def test_rank_weight(F2):
    assert rank_weight(F2, [0, 0, 0, 0], 2, 2) == 0
    assert rank_weight(F2, [1, 0, 0, 1], 2, 2) == 2
    assert rank_weight(F2, [1, 1, 1, 1], 2, 2) == 1


def test_rank_shells_of_two_by_two():
    table = rank_weight_table(2, 1, 2, 2)
    assert list(np.bincount(table)) == [1, 9, 6]


def test_hamming_weights():
    assert list(hamming_weights(np.array([[0, 0, 0], [1, 0, 2], [1, 1, 1]]))) == [0, 2, 3]

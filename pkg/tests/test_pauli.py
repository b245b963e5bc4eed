import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamtrans.pauli import (
    PauliSum,
    all_words,
    decompose,
    pauli_matrix,
    pauli_twirl,
    validate_word,
    word_index,
    y_weight,
)

from conftest import random_hermitian, word_matrix

words = st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=3).map(tuple)


def test_pauli_matrix_identity():
    assert np.array_equal(pauli_matrix((0,)), np.eye(2))


def test_pauli_matrix_y():
    assert np.allclose(pauli_matrix((2,)), np.array([[0, -1j], [1j, 0]]))


def test_pauli_matrix_tensor_product():
    got = pauli_matrix((1, 3))
    expected = np.kron(np.array([[0, 1], [1, 0]]), np.diag([1.0, -1.0]))
    assert np.array_equal(got, expected)
    # anti-block-diagonal with +-1 entries
    assert np.all(got[:2, :2] == 0) and np.all(got[2:, 2:] == 0)
    assert set(np.unique(got[:2, 2:])) <= {1.0 + 0j, -1.0 + 0j, 0j}


@given(words)
@settings(max_examples=60, deadline=None)
def test_pauli_matrix_hermitian_unitary_involutory(word):
    m = pauli_matrix(word)
    d = m.shape[0]
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    assert np.max(np.abs(m @ m.conj().T - np.eye(d))) <= 1e-12
    assert np.max(np.abs(m @ m - np.eye(d))) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_orthogonality(n):
    ws = list(all_words(n))
    for a in ws:
        for b in ws:
            tr = np.trace(pauli_matrix(a) @ pauli_matrix(b))
            expected = 2**n if a == b else 0.0
            assert abs(tr - expected) <= 1e-12


def test_validate_word_rejects():
    with pytest.raises(ValueError):
        validate_word(())
    with pytest.raises(ValueError):
        validate_word((4,))
    with pytest.raises(ValueError):
        validate_word((0, 1), n=3)


def test_word_index_lexicographic():
    assert [word_index(w) for w in all_words(2)] == list(range(16))


@pytest.mark.parametrize(
    "word,weight", [((2, 0), 1), ((0, 0, 0), 0), ((2, 2, 1), 2)]
)
def test_y_weight_examples(word, weight):
    assert y_weight(word) == weight


@given(words)
@settings(max_examples=60, deadline=None)
def test_y_weight_counts(word):
    assert y_weight(word) == list(word).count(2)


def test_decompose_basis_element():
    ps = decompose(np.diag([1.0, -1.0]))
    assert ps.terms == {(3,): 1.0}


def test_decompose_identity():
    ps = decompose(np.eye(2))
    assert ps.terms == {(0,): 1.0}


def test_decompose_roundtrip_random(rng):
    for _ in range(10):
        h = random_hermitian(4, rng)
        ps = decompose(h)
        # independent reconstruction from the coefficients
        rebuilt = sum(c * word_matrix(w) for w, c in ps.terms.items())
        assert np.max(np.abs(rebuilt - h)) <= 1e-10
        assert np.max(np.abs(ps.to_matrix() - h)) <= 1e-10


def test_decompose_rejects_non_hermitian():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="not Hermitian") as err:
        decompose(bad)
    # diagnostic carries the maximum asymmetry
    assert "1.000e" in str(err.value)


def test_decompose_reconstruct_identity_on_sums(rng):
    for _ in range(10):
        terms = {w: float(rng.normal()) for w in all_words(2) if rng.random() < 0.5}
        ps = PauliSum(2, terms)
        again = decompose(ps.to_matrix())
        for w in set(ps.terms) | set(again.terms):
            assert ps.terms.get(w, 0.0) == pytest.approx(again.terms.get(w, 0.0), abs=1e-10)


def test_twirl_traceless_to_zero():
    assert np.max(np.abs(pauli_twirl(np.array([[0, 1], [1, 0]], dtype=complex)))) <= 1e-12


def test_twirl_identity_fixed():
    assert np.allclose(pauli_twirl(np.eye(2)), np.eye(2), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_twirl_matches_trace_formula(rng, n):
    d = 2**n
    for _ in range(20):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        expected = np.trace(m) / d * np.eye(d)
        assert np.max(np.abs(pauli_twirl(m) - expected)) <= 1e-12


def test_pauli_sum_validation():
    with pytest.raises(ValueError):
        PauliSum(1, {(0, 1): 1.0})
    with pytest.raises(ValueError):
        PauliSum(1, {(1,): float("nan")})
    with pytest.raises(ValueError):
        PauliSum(0, {})


def test_pauli_sum_traceless_and_identity():
    ps = PauliSum(2, {(0, 0): 0.5, (3, 3): 0.25})
    assert ps.identity_coefficient() == 0.5
    assert ps.traceless().terms == {(3, 3): 0.25}


def test_pauli_sum_json_roundtrip():
    ps = PauliSum(2, {(3, 3): 0.35, (1, 0): -0.2})
    data = ps.to_json_dict()
    assert data == {
        "n": 2,
        "terms": [{"v": [1, 0], "c": -0.2}, {"v": [3, 3], "c": 0.35}],
    }
    assert PauliSum.from_json_dict(data).terms == ps.terms

import numpy as np
import pytest

from hamtrans.pauli import PauliSum, all_words, decompose
from hamtrans.transfer import (
    TransferMap,
    apply,
    build_filter,
    build_negation,
    build_transpose,
    sample_uw,
)

from conftest import random_hermitian


def test_apply_negation_on_x():
    f = build_negation(1)
    out = apply(f, PauliSum(1, {(1,): 1.0}))
    assert out.terms == {(1,): -1.0}


def test_apply_transpose_on_y():
    f = build_transpose(1)
    out = apply(f, PauliSum(1, {(2,): 1.0}))
    assert out.terms == {(2,): -1.0}


def test_apply_filter_routes_coefficient():
    f = build_filter(2, (3, 3))
    h = PauliSum(2, {(3, 3): 0.4, (1, 0): 0.1})
    out = apply(f, h)
    assert out.terms == pytest.approx({(2, 0): 0.4})


def test_negation_full_beta():
    f = build_negation(1)
    assert len(f.entries) == 3
    assert f.beta == pytest.approx(2 * (4**1 - 1))
    f2 = build_negation(2)
    assert f2.beta == pytest.approx(2 * (4**2 - 1))


def test_negation_restricted_support():
    f = build_negation(2, support=[(3, 3)])
    assert len(f.entries) == 1
    assert f.beta == pytest.approx(2.0)


def test_apply_kills_identity():
    f = build_negation(1)
    out = apply(f, PauliSum(1, {(0,): 1.0}))
    assert out.terms == {}


def test_transpose_sign_table():
    f = build_transpose(1)
    assert f.entries[((1,), (1,))] == 1.0
    assert f.entries[((2,), (2,))] == -1.0
    assert f.entries[((3,), (3,))] == 1.0


def test_transpose_fixes_real_symmetric(rng):
    f = build_transpose(2)
    m = rng.normal(size=(4, 4))
    m = m + m.T  # real symmetric, no Y content
    h = decompose(m)
    out = apply(f, h)
    assert np.max(np.abs(out.to_matrix() - h.traceless().to_matrix())) <= 1e-10


def test_transpose_twice_equals_negation_twice(rng):
    n = 2
    trans = build_transpose(n)
    neg = build_negation(n)
    h = decompose(random_hermitian(4, rng))
    via_transpose = apply(trans, apply(trans, h)).to_matrix()
    via_negation = apply(neg, apply(neg, h)).to_matrix()
    assert np.max(np.abs(via_transpose - via_negation)) <= 1e-12
    assert np.max(np.abs(via_transpose - h.traceless().to_matrix())) <= 1e-10


def test_filter_beta_and_zero_coefficient():
    f = build_filter(2, (3, 3))
    assert f.beta == pytest.approx(2.0)
    out = apply(f, PauliSum(2, {(1, 0): 0.3}))
    assert out.terms == {}


def test_builders_reject_identity_word():
    with pytest.raises(ValueError):
        build_filter(2, (0, 0))
    with pytest.raises(ValueError):
        build_negation(2, support=[(0, 0)])
    with pytest.raises(ValueError):
        TransferMap(1, {((1,), (0,)): 1.0})


def test_tiny_gamma_rejected():
    with pytest.raises(ValueError, match="below"):
        TransferMap(1, {((1,), (1,)): 1e-16})


def test_sample_uw_degenerate():
    f = build_filter(2, (3, 3))
    rng = np.random.default_rng(0)
    for _ in range(10):
        u, w, s_f = sample_uw(f, rng)
        assert u == (3, 3) and w == (2, 0) and s_f == 0


def test_sample_uw_negation_uniform():
    f = build_negation(1)
    rng = np.random.default_rng(1)
    counts = {(1,): 0, (2,): 0, (3,): 0}
    draws = 100_000
    for _ in range(draws):
        u, w, s_f = sample_uw(f, rng)
        assert s_f == 1
        assert u == w
        counts[u] += 1
    expected = draws / 3
    sigma = np.sqrt(draws * (1 / 3) * (2 / 3))
    for c in counts.values():
        assert abs(c - expected) <= 3 * sigma


def test_sample_uw_transpose_signs():
    f = build_transpose(1)
    rng = np.random.default_rng(2)
    for _ in range(200):
        u, w, s_f = sample_uw(f, rng)
        assert s_f == (1 if w == (2,) else 0)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: build_negation(1),
        lambda: build_negation(2),
        lambda: build_transpose(2),
        lambda: build_filter(2, (3, 3)),
        lambda: build_negation(2, support=[(1, 1), (2, 3)]),
    ],
)
def test_probabilities_normalized(factory):
    f = factory()
    assert f.pair_probabilities().sum() == pytest.approx(1.0, abs=1e-12)


def test_apply_is_linear(rng):
    f = build_transpose(2)
    h1 = decompose(random_hermitian(4, rng))
    h2 = decompose(random_hermitian(4, rng))
    a, b = 0.7, -1.3
    combo = decompose(a * h1.to_matrix() + b * h2.to_matrix())
    lhs = apply(f, combo)
    rhs_terms = {}
    for w, c in apply(f, h1).terms.items():
        rhs_terms[w] = rhs_terms.get(w, 0.0) + a * c
    for w, c in apply(f, h2).terms.items():
        rhs_terms[w] = rhs_terms.get(w, 0.0) + b * c
    for w in set(lhs.terms) | set(rhs_terms):
        assert lhs.terms.get(w, 0.0) == pytest.approx(rhs_terms.get(w, 0.0), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_apply_preserves_hermiticity(rng, n):
    f = build_transpose(n)
    for _ in range(50):
        h = decompose(random_hermitian(2**n, rng))
        out = apply(f, h).to_matrix()
        assert np.max(np.abs(out - out.conj().T)) <= 1e-12


def test_json_roundtrip():
    f = build_negation(2, support=[(3, 3), (1, 2)])
    data = f.to_json_dict()
    back = TransferMap.from_json_dict(data)
    assert back.entries == f.entries
    assert back.beta == pytest.approx(f.beta)


def test_json_rejects_identity_input_word():
    with pytest.raises(ValueError):
        TransferMap.from_json_dict(
            {"n": 1, "entries": [{"w": [1], "u": [0], "gamma": 1.0}]}
        )

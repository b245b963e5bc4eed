import numpy as np
import pytest

from hamtrans.linalg import partial_trace_ancilla
from hamtrans.oracle import SeedOracle, make_random_klocal
from hamtrans.pauli import PauliSum

from conftest import random_hermitian


def test_rejects_non_positive_time():
    oracle = SeedOracle(PauliSum(1, {(3,): 1.0}))
    state = np.array([1.0, 0.0], dtype=complex)
    with pytest.raises(ValueError, match="negative evolution time not available"):
        oracle.evolve(state, -0.1)
    with pytest.raises(ValueError, match="not available"):
        oracle.evolve(state, 0.0)
    assert oracle.ledger == {"queries": 0, "evolution_time": 0.0}


def test_exact_one_qubit_evolution():
    oracle = SeedOracle(PauliSum(1, {(3,): 1.0}))
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
    # e^{-iZ pi/2} = -iZ maps |+> to |-> up to global phase
    out = oracle.evolve(plus, np.pi / 2)
    assert abs(np.vdot(minus, out)) == pytest.approx(1.0, abs=1e-12)
    # a further quarter turn reaches -|+>: a full Z period is pi, not 2 pi
    out = oracle.evolve(out, np.pi / 2)
    assert abs(np.vdot(plus, out)) == pytest.approx(1.0, abs=1e-12)


def test_ledger_arithmetic():
    oracle = SeedOracle(PauliSum(1, {(3,): 1.0}))
    state = np.array([1.0, 0.0], dtype=complex)
    oracle.evolve(state, 0.3)
    oracle.evolve(state, 0.7)
    assert oracle.query_count == 2
    assert oracle.evolution_time_total == pytest.approx(1.0, abs=0)


def test_evolve_with_ancilla_preserves_ancilla(rng):
    oracle = SeedOracle(PauliSum(1, {(1,): 0.4, (3,): 0.8}))
    rho = random_hermitian(4, rng)
    rho = rho @ rho.conj().T
    rho /= np.trace(rho)
    out = oracle.evolve(rho, 0.9, with_ancilla=True)
    # ancilla marginal: trace out the system (trailing qubit)
    def ancilla_marginal(m):
        return np.einsum("iajb->ij", m.reshape(2, 2, 2, 2))

    assert np.max(np.abs(ancilla_marginal(out) - ancilla_marginal(rho))) <= 1e-12


def test_delta_default_and_validation():
    h = PauliSum(1, {(3,): 1.0})
    assert SeedOracle(h).delta_h == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError, match="spectral range"):
        SeedOracle(h, delta_h=1.0)
    assert SeedOracle(h, delta_h=3.0).delta_h == 3.0


def test_zero_bound_gives_zero_hamiltonian(rng):
    oracle = make_random_klocal(2, 1, 0.0, rng)
    assert oracle.delta_h == 0.0


def test_klocal_support(rng):
    oracle = make_random_klocal(2, 1, 1.0, rng)
    from hamtrans.reference import hidden_hamiltonian

    words = set(hidden_hamiltonian(oracle).terms)
    allowed = {(0, 0)} | {(a, 0) for a in (1, 2, 3)} | {(0, a) for a in (1, 2, 3)}
    assert words <= allowed
    with pytest.raises(ValueError):
        make_random_klocal(2, 3, 1.0, rng)


def test_evolution_operator_cache_and_charging():
    oracle = SeedOracle(PauliSum(1, {(3,): 0.5}))
    u1 = oracle.evolution_operator(0.25, queries=0)
    u2 = oracle.evolution_operator(0.25, queries=4)
    assert u1 is u2  # one eigendecomposition per distinct tau
    assert oracle.ledger == {"queries": 4, "evolution_time": 1.0}
    oracle.evolution_operator(0.25, queries=3, evolution_time=0.5)
    assert oracle.query_count == 7
    assert oracle.evolution_time_total == pytest.approx(1.5, abs=0)
    with pytest.raises(ValueError):
        oracle.evolution_operator(-0.25, queries=1)
    with pytest.raises(ValueError):
        u1[0, 0] = 0.0  # cached operator is read-only


def test_construction_from_json():
    data = {"n": 1, "terms": [{"v": [1], "c": 0.7}, {"v": [3], "c": 0.3}]}
    oracle = SeedOracle(PauliSum.from_json_dict(data))
    assert oracle.n == 1
    assert oracle.delta_h == pytest.approx(2 * np.sqrt(0.58), abs=1e-12)

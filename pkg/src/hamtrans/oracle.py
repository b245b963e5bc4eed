"""Black-box seed Hamiltonian dynamics with query and evolution-time metering.

A `SeedOracle` hides a Hamiltonian and grants only forward time evolution
e^{-iH tau} for tau > 0. The algorithm side of the library must treat the
Hamiltonian as unknown; only the constructor (and the white-box helpers in
`reference`, which exist for verification) may look at it. Every granted
evolution is recorded in a ledger of query count and summed evolution time,
the physical resource the algorithms are accountable for.
"""
from __future__ import annotations

import threading
from typing import Iterable

import numpy as np

from .linalg import expm_hermitian
from .pauli import PauliSum, all_words


class SeedOracle:
    """Forward-only dynamics e^{-iH tau} of a hidden Hamiltonian.

    The unitary for each distinct tau is computed once and cached; a run with
    N identical steps costs one eigendecomposition. Ledger updates are guarded
    by a lock so trajectory workers may share one oracle.
    """

    def __init__(self, hamiltonian: PauliSum, delta_h: float | None = None):
        self._hidden = hamiltonian
        matrix = hamiltonian.to_matrix()
        evals = np.linalg.eigvalsh(matrix)
        spectral_range = float(evals[-1] - evals[0]) if evals.size else 0.0
        if delta_h is None:
            delta_h = spectral_range
        elif delta_h < spectral_range - 1e-12:
            raise ValueError(
                f"delta_h = {delta_h} is below the actual spectral range {spectral_range}"
            )
        self.delta_h = float(delta_h)
        self.query_count = 0
        self.evolution_time_total = 0.0
        self._matrix = matrix
        self._op_cache: dict[float, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self._hidden.n

    @property
    def dim(self) -> int:
        return self._hidden.dim

    @property
    def ledger(self) -> dict:
        return {"queries": self.query_count, "evolution_time": self.evolution_time_total}

    def _charge(self, queries: int, evolution_time: float) -> None:
        with self._lock:
            self.query_count += queries
            self.evolution_time_total += evolution_time

    def _unitary(self, tau: float) -> np.ndarray:
        if tau <= 0:
            raise ValueError(
                f"negative evolution time not available from the black box (tau = {tau}, "
                "only tau > 0 is granted)"
            )
        cached = self._op_cache.get(tau)
        if cached is None:
            cached = expm_hermitian(self._matrix, tau)
            cached.setflags(write=False)
            self._op_cache[tau] = cached
        return cached

    def evolve(self, state: np.ndarray, tau: float, *, with_ancilla: bool = False) -> np.ndarray:
        """Apply e^{-iH tau} (or I x e^{-iH tau} when `with_ancilla`) to a state.

        `state` may be a state vector or a density matrix; the ancilla, when
        present, is the single leading qubit and is left untouched. Each call
        is one metered query of duration tau.
        """
        u = self._unitary(tau)
        if with_ancilla:
            u = np.kron(np.eye(2, dtype=complex), u)
        s = np.asarray(state, dtype=complex)
        if s.shape[0] != u.shape[0]:
            raise ValueError(f"state dimension {s.shape[0]} does not match oracle ({u.shape[0]})")
        if s.ndim == 1:
            out = u @ s
        elif s.ndim == 2:
            out = u @ s @ u.conj().T
        else:
            raise ValueError("state must be a vector or a square matrix")
        self._charge(1, tau)
        return out

    def evolution_operator(
        self, tau: float, *, queries: int, evolution_time: float | None = None
    ) -> np.ndarray:
        """The unitary e^{-iH tau}, metered for `queries` uses.

        Engines that reuse the cached unitary across a run must declare here
        how many queries the run consumes. `evolution_time` overrides the
        default `queries * tau` so a run can record its analytically exact
        total (e.g. beta * t rather than N * (beta * t / N), which float
        rounding can perturb).
        """
        if queries < 0:
            raise ValueError("queries must be >= 0")
        u = self._unitary(tau)
        if queries:
            self._charge(queries, queries * tau if evolution_time is None else evolution_time)
        return u


def make_random_klocal(
    n: int, k: int, coefficient_bound: float, rng: np.random.Generator
) -> SeedOracle:
    """Random oracle supported on Pauli words of Hamming weight <= k.

    Coefficients are drawn uniformly from [-bound, bound]; the spectral-range
    bound is set to the exact value computed at construction.
    """
    if not 1 <= k <= n:
        raise ValueError(f"locality k = {k} must satisfy 1 <= k <= n = {n}")
    if coefficient_bound < 0:
        raise ValueError("coefficient bound must be >= 0")
    terms = {}
    for word in all_words(n):
        if sum(1 for x in word if x != 0) <= k:
            c = float(rng.uniform(-coefficient_bound, coefficient_bound)) if coefficient_bound else 0.0
            if c != 0.0:
                terms[word] = c
    return SeedOracle(PauliSum(n, terms))

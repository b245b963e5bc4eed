"""White-box exact references, used only for verification.

Everything here may look at an oracle's hidden Hamiltonian or enumerate the
whole randomness space; none of it is available to the engine (a lint test
enforces that `engine` neither imports this module nor touches the hidden
field). These functions provide the independent second route for every claim
the randomized engine makes: the exact transformed evolution, the brute-force
weighted-conjugation total, and the stage-by-stage effective-Hamiltonian
chain.
"""
from __future__ import annotations

import numpy as np

from .classt import ClassTMap
from .classt import compose as _compose_maps
from .engine import classt_totals, controlled_pauli
from .linalg import expm_hermitian
from .oracle import SeedOracle
from .pauli import PauliSum, all_words, pauli_matrix, validate_word
from .transfer import TransferMap, apply


def hidden_hamiltonian(oracle: SeedOracle) -> PauliSum:
    """Read the oracle's hidden Hamiltonian. Verification code only."""
    return oracle._hidden


def exact_transformed_evolution(h: PauliSum, f: TransferMap, t: float) -> np.ndarray:
    """The target unitary e^{-i f(H) t}, from the exact transformed operator."""
    return expm_hermitian(apply(f, h).to_matrix(), t)


def classt_apply(g: ClassTMap, hermitian: np.ndarray) -> np.ndarray:
    """Evaluate g(H) = sum_j h_j U_j H U_j^dag."""
    return g.apply(hermitian)


def classt_compose(after: ClassTMap, before: ClassTMap, max_elements: int = 1 << 20) -> ClassTMap:
    """Cartesian-product composition with multiplied weights and unitaries."""
    return _compose_maps(after, before, max_elements=max_elements)


def split_identity_component(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Split M into (M - alpha I, alpha) with alpha = tr(M) / dim.

    The direct-sum identities hold only up to an unconstrained multiple of
    the identity, so comparisons go through the traceless parts.
    """
    m = np.asarray(matrix, dtype=complex)
    alpha = complex(np.trace(m)) / m.shape[0]
    return m - alpha * np.eye(m.shape[0]), float(alpha.real)


def g_total_bruteforce(
    h: PauliSum, f: TransferMap, elements: ClassTMap | None = None
) -> np.ndarray:
    """sum_j h_j V_j (I x H) V_j^dag by full enumeration of the index space.

    Equals diag(f(H), -f(H)) plus a multiple of the identity. Pass a
    precomputed `classt_totals(f)` via `elements` to amortize the enumeration
    over many Hamiltonians.
    """
    if elements is None:
        elements = classt_totals(f)
    joint = np.kron(np.eye(2, dtype=complex), h.to_matrix())
    return elements.apply(joint)


def expected_g_total(h: PauliSum, f: TransferMap) -> np.ndarray:
    """The direct-sum target diag(f(H), -f(H)), traceless by construction of f."""
    fh = apply(f, h).to_matrix()
    d = fh.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = fh
    out[d:, d:] = -fh
    return out


def process_stage(
    k: int,
    matrix: np.ndarray,
    u=None,
    w=None,
    s_f: int | None = None,
) -> np.ndarray:
    """Apply the k-th effective-Hamiltonian stage (k in 1..7) exactly.

    Stages 1 and 4 are the explicit correlated twirls (averages over all 4^n
    controlled-Pauli or system-Pauli conjugations), stage 2 carries its
    factor 2, stages 3, 5, 7 need the parameters u, w, s_f respectively.
    Input and output live on the (ancilla x system) space.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
        raise ValueError(f"expected a square even-dimensional matrix, got shape {m.shape}")
    d = m.shape[0] // 2
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError(f"system dimension {d} is not a power of two")

    def conj(gate: np.ndarray) -> np.ndarray:
        return gate @ m @ gate

    had = np.kron(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2), np.eye(d))
    if k == 1:
        return sum(conj(controlled_pauli(v)) for v in all_words(n)) / 4**n
    if k == 2:
        return 2.0 * conj(had)
    if k == 3:
        if u is None:
            raise ValueError("stage 3 needs the word u")
        return conj(controlled_pauli(validate_word(u, n)))
    if k == 4:
        eye2 = np.eye(2, dtype=complex)
        return sum(conj(np.kron(eye2, pauli_matrix(v))) for v in all_words(n)) / 4**n
    if k == 5:
        if w is None:
            raise ValueError("stage 5 needs the word w")
        return conj(controlled_pauli(validate_word(w, n)))
    if k == 6:
        return conj(had)
    if k == 7:
        if s_f not in (0, 1):
            raise ValueError("stage 7 needs s_f in {0, 1}")
        flip = np.kron(np.array([[0, 1], [1, 0]], dtype=complex), np.eye(d))
        return conj(flip) if s_f else m
    raise ValueError(f"stage index must be in 1..7, got {k}")


def chained_stages(h: PauliSum, u, w, s_f: int) -> np.ndarray:
    """Stages 1 through 7 applied to I x H for fixed (u, w, s_f)."""
    m = np.kron(np.eye(2, dtype=complex), h.to_matrix())
    m = process_stage(1, m)
    m = process_stage(2, m)
    m = process_stage(3, m, u=u)
    m = process_stage(4, m)
    m = process_stage(5, m, w=w)
    m = process_stage(6, m)
    return process_stage(7, m, s_f=s_f)

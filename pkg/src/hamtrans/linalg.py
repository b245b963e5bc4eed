"""Dense complex linear algebra and quantum channel machinery.

Conventions
-----------
Operators are plain complex ndarrays. A channel E is stored as its
superoperator matrix S acting on row-major vectorized operators,

    vec(rho) = rho.reshape(-1),    vec(A rho B) = (A kron B^T) vec(rho),

so a Kraus set {K_i} gives S = sum_i kron(K_i, K_i.conj()) and a unitary
channel rho -> U rho U^dag gives S = kron(U, U.conj()). Superoperators may be
rectangular when input and output dimensions differ (state preparation,
partial trace).

The Choi state of a channel is normalized to trace one, i.e. the channel
applied to half of a maximally entangled state. Half the trace distance
between Choi states lower-bounds half the diamond-norm distance, which makes
it a sound necessary-condition proxy for diamond-norm error guarantees.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np


# ---------------------------------------------------------------------------
# Hermitian primitives


def is_hermitian(matrix: np.ndarray, atol: float = 1e-10) -> bool:
    m = np.asarray(matrix)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= atol


def expm_hermitian(hamiltonian: np.ndarray, t: float) -> np.ndarray:
    """Unitary e^{-iHt} of a Hermitian H via full eigendecomposition.

    `t` may be any real number; positivity of physical evolution times is the
    oracle's contract, not this primitive's.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    if not is_hermitian(h):
        asym = np.max(np.abs(h - h.conj().T))
        raise ValueError(f"expm_hermitian needs a Hermitian matrix (max asymmetry {asym:.3e})")
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(-1j * evals * t)
    return (evecs * phases) @ evecs.conj().T


def trace_norm(matrix: np.ndarray) -> float:
    """Sum of singular values, tr sqrt(A^dag A)."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"trace_norm expects a square matrix, got shape {m.shape}")
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def validate_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Check Hermiticity, positivity (up to -atol) and unit trace. Returns rho."""
    r = np.asarray(rho, dtype=complex)
    if not is_hermitian(r, atol):
        raise ValueError("density matrix is not Hermitian")
    eig_min = float(np.linalg.eigvalsh(r)[0])
    if eig_min < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {eig_min:.3e}")
    tr = complex(np.trace(r))
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix trace {tr} is not 1")
    return r


def partial_trace_ancilla(rho: np.ndarray) -> np.ndarray:
    """Trace out the single leading qubit of a state on 2 * d dimensions."""
    r = np.asarray(rho, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] % 2 != 0:
        raise ValueError(f"expected a square matrix of even dimension, got shape {r.shape}")
    d = r.shape[0] // 2
    return np.einsum("aiaj->ij", r.reshape(2, d, 2, d))


def max_entangled_state(d: int) -> np.ndarray:
    """The canonical maximally entangled vector (1/sqrt d) sum_i |ii> on d*d dims."""
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def matrix_to_json(matrix: np.ndarray) -> list:
    """Complex matrix as nested [re, im] pairs, for JSON fixtures and configs."""
    m = np.asarray(matrix, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def matrix_from_json(data: list) -> np.ndarray:
    """Inverse of `matrix_to_json`."""
    return np.array([[complex(re, im) for re, im in row] for row in data])


# ---------------------------------------------------------------------------
# Haar sampling


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state as a normalized complex Gaussian vector."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# Superoperator algebra


def kraus_channel(kraus_ops: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator of the channel with the given Kraus operators."""
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    rows, cols = ops[0].shape
    s = np.zeros((rows * rows, cols * cols), dtype=complex)
    for k in ops:
        s += np.kron(k, k.conj())
    return s


def unitary_channel(u: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> U rho U^dag."""
    m = np.asarray(u, dtype=complex)
    return np.kron(m, m.conj())


def mixture_channel(pairs: Sequence[tuple[float, np.ndarray]], atol: float = 1e-10) -> np.ndarray:
    """Convex mixture sum_j p_j E_j of superoperators; probabilities must sum to 1."""
    if not pairs:
        raise ValueError("mixture needs at least one component")
    total = sum(p for p, _ in pairs)
    if any(p < -atol for p, _ in pairs) or abs(total - 1.0) > atol:
        raise ValueError(f"mixture probabilities sum to {total}, expected 1")
    out = np.zeros_like(np.asarray(pairs[0][1], dtype=complex))
    for p, e in pairs:
        out = out + p * np.asarray(e, dtype=complex)
    return out


def compose(after: np.ndarray, before: np.ndarray) -> np.ndarray:
    """Superoperator of applying `before` first, then `after`."""
    a = np.asarray(after, dtype=complex)
    b = np.asarray(before, dtype=complex)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot compose superoperators of shapes {a.shape} and {b.shape}")
    return a @ b


def channel_power(channel: np.ndarray, n: int) -> np.ndarray:
    """E applied n times, computed by repeated squaring."""
    e = np.asarray(channel, dtype=complex)
    if e.shape[0] != e.shape[1]:
        raise ValueError("channel_power needs a square superoperator")
    if n < 0:
        raise ValueError("power must be non-negative")
    result = np.eye(e.shape[0], dtype=complex)
    base = e
    k = n
    while k:
        if k & 1:
            result = base @ result
        base = base @ base
        k >>= 1
    return result


def apply_channel(channel: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a superoperator to a density (or any) matrix."""
    s = np.asarray(channel, dtype=complex)
    r = np.asarray(rho, dtype=complex)
    d_out = int(round(np.sqrt(s.shape[0])))
    return (s @ r.reshape(-1)).reshape(d_out, d_out)


def ancilla_prep_channel(d: int) -> np.ndarray:
    """Channel rho -> |0><0| x rho, from d to 2*d dimensions."""
    k = np.kron(np.array([[1.0], [0.0]], dtype=complex), np.eye(d, dtype=complex))
    return kraus_channel([k])


def ancilla_trace_channel(d: int) -> np.ndarray:
    """Channel tracing out the leading qubit, from 2*d to d dimensions."""
    bras = [np.array([[1.0, 0.0]], dtype=complex), np.array([[0.0, 1.0]], dtype=complex)]
    return kraus_channel([np.kron(b, np.eye(d, dtype=complex)) for b in bras])


def extend_with_identity(channel: np.ndarray, extra_dim: int) -> np.ndarray:
    """Superoperator of E tensor Identity on an `extra_dim`-dimensional bystander."""
    s = np.asarray(channel, dtype=complex)
    d_out = int(round(np.sqrt(s.shape[0])))
    d_in = int(round(np.sqrt(s.shape[1])))
    s4 = s.reshape(d_out, d_out, d_in, d_in)
    eye = np.eye(extra_dim)
    ext = np.einsum("abij,pr,qs->apbqirjs", s4, eye, eye)
    return ext.reshape((d_out * extra_dim) ** 2, (d_in * extra_dim) ** 2)


# ---------------------------------------------------------------------------
# Choi representation and distances


def choi_state(channel: np.ndarray) -> np.ndarray:
    """Normalized (trace-1) Choi matrix of a channel."""
    s = np.asarray(channel, dtype=complex)
    d_out = int(round(np.sqrt(s.shape[0])))
    d_in = int(round(np.sqrt(s.shape[1])))
    s4 = s.reshape(d_out, d_out, d_in, d_in)
    choi = s4.transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in)
    return choi / d_in


def assert_cptp(channel: np.ndarray, atol: float = 1e-8) -> None:
    """Raise unless the channel is completely positive and trace preserving.

    Complete positivity: Choi eigenvalues >= -atol. Trace preservation:
    partial trace of the unnormalized Choi over the output equals the
    identity to atol.
    """
    s = np.asarray(channel, dtype=complex)
    d_out = int(round(np.sqrt(s.shape[0])))
    d_in = int(round(np.sqrt(s.shape[1])))
    choi_un = choi_state(s) * d_in
    eig_min = float(np.linalg.eigvalsh((choi_un + choi_un.conj().T) / 2)[0])
    if eig_min < -atol:
        raise ValueError(f"channel is not completely positive: Choi eigenvalue {eig_min:.3e}")
    reduced = np.einsum("aiaj->ij", choi_un.reshape(d_out, d_in, d_out, d_in))
    dev = np.max(np.abs(reduced - np.eye(d_in)))
    if dev > atol:
        raise ValueError(f"channel is not trace preserving: deviation {dev:.3e}")


def choi_distance(channel_a: np.ndarray, channel_b: np.ndarray) -> float:
    """Half the trace distance between normalized Choi states.

    Satisfies choi_distance <= (1/2) * diamond-norm distance, with equality
    reached by the maximally entangled input, so any diamond-norm error
    guarantee implies the same bound on this quantity.
    """
    a = np.asarray(channel_a)
    b = np.asarray(channel_b)
    if a.shape != b.shape:
        raise ValueError(f"channel shapes differ: {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(choi_state(a) - choi_state(b))


def pure_state_error_sup(
    unitary: np.ndarray,
    mixture: Sequence[tuple[float, np.ndarray]],
    trials: int,
    rng: np.random.Generator,
    *,
    ancilla_dim: int = 1,
    probe_states: Sequence[np.ndarray] = (),
) -> tuple[float, np.ndarray]:
    """Sampled lower bound on sup_psi || U psi U^dag - sum_j p_j E_j(psi) ||_1.

    Draws `trials` Haar-random pure states (on the system extended by an
    `ancilla_dim`-dimensional bystander when ancilla_dim > 1) and returns the
    running maximum together with the state achieving it. Explicit candidate
    states can be supplied via `probe_states`; they are evaluated first.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    u = np.asarray(unitary, dtype=complex)
    avg = mixture_channel(mixture)
    if ancilla_dim > 1:
        u = np.kron(u, np.eye(ancilla_dim, dtype=complex))
        avg = extend_with_identity(avg, ancilla_dim)
    dim = u.shape[0]
    best = -1.0
    best_state: np.ndarray | None = None
    candidates = list(probe_states) + [haar_state(dim, rng) for _ in range(trials)]
    for psi in candidates:
        psi = np.asarray(psi, dtype=complex)
        target = u @ psi
        diff = np.outer(target, target.conj()) - apply_channel(avg, np.outer(psi, psi.conj()))
        err = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
        if err > best:
            best = err
            best_state = psi
    return best, best_state

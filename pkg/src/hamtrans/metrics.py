"""Quantitative error and variance checks for randomized simulation protocols.

Three layers: the analytic error bound of the randomized product formula
(which drives the iteration-count formula), empirical variance estimation
against an exact channel, and the pointwise error-to-variance property of
random unitary-approximation protocols (at every pure state, the mixture's
mean squared 1-norm deviation is at most twice its mean deviation bound).
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .linalg import apply_channel, haar_state, mixture_channel, trace_norm


def qdrift_error_bound(lam: float, t: float, n_steps: int) -> float:
    """Analytic bound (2 lam^2 t^2 / N) e^{2 lam t / N} on the channel error.

    `lam` is the total conjugation weight and `t` the target time, with the
    seed Hamiltonian normalized to unit spectral seminorm; at the engine's
    iteration count the bound is at most (2 eps / 5) e^{4/5} <= eps.
    """
    if lam <= 0 or t <= 0 or n_steps <= 0:
        raise ValueError("qdrift_error_bound needs positive lam, t, n_steps")
    x = lam * t
    return (2.0 * x * x / n_steps) * math.exp(2.0 * x / n_steps)


def empirical_variance(
    exact_channel: np.ndarray,
    trajectory_outputs: Sequence[np.ndarray],
    input_state: np.ndarray,
) -> tuple[float, float]:
    """Sample mean and standard error of || E(psi) - rho_k ||_1^2.

    `trajectory_outputs` are density matrices produced by independent runs on
    `input_state` (a vector, possibly on system x reference with the channel
    extended accordingly). Needs at least 30 samples for the standard error
    to mean anything.
    """
    outputs = np.asarray(trajectory_outputs, dtype=complex)
    if outputs.ndim != 3 or outputs.shape[0] < 30:
        raise ValueError("need at least 30 trajectory outputs")
    psi = np.asarray(input_state, dtype=complex).reshape(-1)
    target = apply_channel(exact_channel, np.outer(psi, psi.conj()))
    diffs = outputs - target
    # diffs are Hermitian, so the trace norm is the sum of |eigenvalues|
    eigs = np.linalg.eigvalsh((diffs + diffs.conj().transpose(0, 2, 1)) / 2)
    norms_sq = np.sum(np.abs(eigs), axis=1) ** 2
    mean = float(np.mean(norms_sq))
    stderr = float(np.std(norms_sq, ddof=1) / math.sqrt(len(norms_sq)))
    return mean, stderr


def theorem2_check(
    unitary: np.ndarray,
    mixture: Sequence[tuple[float, np.ndarray]],
    trials: int,
    rng: np.random.Generator,
    *,
    slack: float = 1e-9,
) -> dict:
    """Check variance(psi) <= 2 * Delta_pure at each of `trials` sampled states.

    Delta_pure is the sampled maximum of || U psi U^dag - sum_j p_j F_j(psi) ||_1
    and variance(psi) = sum_j p_j || U psi U^dag - F_j(psi) ||_1^2, both over
    the same Haar-random pure states. Returns the estimates and the verdict.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    u = np.asarray(unitary, dtype=complex)
    d = u.shape[0]
    probs = np.array([p for p, _ in mixture])
    if abs(probs.sum() - 1.0) > 1e-10 or np.any(probs < -1e-12):
        raise ValueError(f"mixture probabilities sum to {probs.sum()}, expected 1")
    channels = np.stack([np.asarray(e, dtype=complex) for _, e in mixture])

    states = np.stack([haar_state(d, rng) for _ in range(trials)])
    rhos = np.einsum("ta,tb->tab", states, states.conj())
    targets = np.einsum("ab,tbc,dc->tad", u, rhos, u.conj())

    outs = np.einsum("kxy,ty->tkx", channels, rhos.reshape(trials, d * d))
    outs = outs.reshape(trials, len(mixture), d, d)

    per_diffs = targets[:, None, :, :] - outs
    per_diffs = (per_diffs + per_diffs.conj().transpose(0, 1, 3, 2)) / 2
    per_norms = np.sum(np.abs(np.linalg.eigvalsh(per_diffs)), axis=2)
    variances = per_norms**2 @ probs

    avg_diffs = targets - np.einsum("k,tkab->tab", probs, outs)
    avg_diffs = (avg_diffs + avg_diffs.conj().transpose(0, 2, 1)) / 2
    errors = np.sum(np.abs(np.linalg.eigvalsh(avg_diffs)), axis=1)

    delta_pure = float(np.max(errors))
    variance_sup = float(np.max(variances))
    satisfied = bool(np.all(variances <= 2.0 * delta_pure + slack))
    return {
        "delta_pure": delta_pure,
        "variance_sup": variance_sup,
        "satisfied": satisfied,
        "trials": trials,
    }

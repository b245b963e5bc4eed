"""Heisenberg-limited estimation of one Pauli coefficient from forward dynamics.

The filter transfer map routes the target coefficient c_v onto the first
system qubit as an effective Hamiltonian c_v * Y x I x ... x I, whose
simulated evolution for time t gives first-qubit outcome probabilities

    p_0 = (1 + cos(2 c_v t)) / 2,      p_+ = (1 + sin(2 c_v t)) / 2,

each shifted by at most the simulation error. Doubling t across stages and
narrowing the consistent angle sector yields an estimate whose standard
deviation s costs a total evolution time O(1/s), independent of the system
size or the coefficient's locality.

Shots are independent trajectories, so their outcome marginals equal the Born
probabilities of the exactly averaged run; the samplers draw from those
probabilities directly and charge the ledger each shot's physical cost
(N queries, 2t evolution time).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import averaged_channel
from .linalg import apply_channel
from .oracle import SeedOracle
from .pauli import validate_word
from .transfer import build_filter

# Largest per-measurement probability bias the estimator is run against, and
# the default allowed simulation error; strictly below the 1/sqrt(8) ceiling.
DEFAULT_BIAS_BOUND = 1.0 / (2.0 * math.sqrt(8.0))

_BIAS_CEILING = 1.0 / math.sqrt(8.0)


def measurement_probabilities(c: float, t: float) -> tuple[float, float]:
    """Ideal first-qubit outcome probabilities (p_0, p_plus) after time t."""
    return (1.0 + math.cos(2.0 * c * t)) / 2.0, (1.0 + math.sin(2.0 * c * t)) / 2.0


@dataclass
class RpeSchedule:
    """Stage plan: at stage j, M_j shots per basis at phase multiplier 2^(j-1)."""

    s: float
    delta_sup: float
    n_stages: int
    shots_per_stage: list[int]
    repetition_factor: int

    def total_evolution_time(self) -> float:
        """Sum over stages of (shots x 2 bases x 2^(j-1)) evolution time."""
        return float(
            sum(2 * m * 2.0 ** (j - 1) for j, m in enumerate(self.shots_per_stage, start=1))
        )


def rpe_schedule(s: float, delta_sup: float) -> RpeSchedule:
    """Schedule achieving standard deviation <= s under bias at most delta_sup.

    n_stages = ceil(log2(3 pi / s)); shots_per_stage M_j = F * (3(K - j) + 1)
    with F = ceil[log((1 - sqrt8 d)/2) / log(1 - (1 - sqrt8 d)^2 / 2)].
    Requires delta_sup < 1/sqrt(8) strictly.
    """
    if s <= 0:
        raise ValueError("target standard deviation must be > 0")
    if not 0.0 <= delta_sup < _BIAS_CEILING:
        raise ValueError(f"delta_sup = {delta_sup} must lie in [0, 1/sqrt(8))")
    n_stages = math.ceil(math.log2(3.0 * math.pi / s))
    if n_stages < 1:
        raise ValueError(f"target s = {s} needs no stages; choose s < 3*pi")
    margin = 1.0 - math.sqrt(8.0) * delta_sup
    factor = math.ceil(math.log(margin / 2.0) / math.log(1.0 - margin**2 / 2.0))
    shots = [factor * (3 * (n_stages - j) + 1) for j in range(1, n_stages + 1)]
    return RpeSchedule(s, delta_sup, n_stages, shots, factor)


@dataclass
class _StageModel:
    """Exact outcome distribution of one stage's simulated measurement."""

    p0: float
    pplus: float
    n_iterations: int
    tau: float
    t: float


def _stage_model(
    oracle: SeedOracle, v, j: int, epsilon_sim: float, cache: dict | None
) -> _StageModel:
    """Outcome probabilities of the simulated e^{-i f_v(H) t} run at stage j.

    t = 2^(j-2); the filter map has beta = 2, so one shot costs 2t = 2^(j-1)
    of evolution time. The cache (when given) must be private to the oracle.
    """
    key = (tuple(v), j, epsilon_sim)
    if cache is not None and key in cache:
        return cache[key]
    t = 2.0 ** (j - 2)
    f = build_filter(oracle.n, v)
    avg = averaged_channel(oracle, f, t, epsilon_sim)
    d = oracle.dim
    rho_in = np.zeros((d, d), dtype=complex)
    rho_in[0, 0] = 1.0
    rho_out = apply_channel(avg.system_channel, rho_in)
    half = d // 2
    first_qubit = np.einsum("arbr->ab", rho_out.reshape(2, half, 2, half))
    p0 = float(np.clip(first_qubit[0, 0].real, 0.0, 1.0))
    pplus = float(np.clip(0.5 + first_qubit[0, 1].real, 0.0, 1.0))
    model = _StageModel(p0, pplus, avg.n_iterations, avg.tau, t)
    if cache is not None:
        cache[key] = model
    return model


def rpe_measurement(
    oracle: SeedOracle,
    v,
    j: int,
    basis: str,
    rng: np.random.Generator,
    epsilon_sim: float = DEFAULT_BIAS_BOUND,
    *,
    _cache: dict | None = None,
) -> int:
    """One simulated stage-j shot in the Z or X basis.

    Returns 0 for outcome `0` (Z basis) or `+` (X basis), else 1. Charges the
    oracle the shot's cost: N queries totalling 2^(j-1) evolution time.
    """
    if basis not in ("Z", "X"):
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    if j < 1:
        raise ValueError("stage index j must be >= 1")
    validate_word(v, oracle.n)
    model = _stage_model(oracle, v, j, epsilon_sim, _cache)
    oracle.evolution_operator(
        model.tau, queries=model.n_iterations, evolution_time=2.0 * model.t
    )
    p = model.p0 if basis == "Z" else model.pplus
    return 0 if rng.random() < p else 1


@dataclass
class EstimateResult:
    """A parameter estimate with its schedule, per-stage tallies and cost."""

    estimate: float
    schedule: RpeSchedule
    stages: list[dict] = field(default_factory=list)
    evolution_time: float = 0.0
    queries: int = 0


def _wrap_angle(x: float) -> float:
    return math.remainder(x, 2.0 * math.pi)


def estimate_parameter(
    oracle: SeedOracle,
    v,
    s: float,
    rng: np.random.Generator,
    *,
    delta_sup: float = DEFAULT_BIAS_BOUND,
    epsilon_sim: float = DEFAULT_BIAS_BOUND,
    stage_cache: dict | None = None,
) -> EstimateResult:
    """Estimate c_v to standard deviation <= s by sector-narrowing phase estimation.

    Stage j takes M_j shots in each basis at phase multiplier k = 2^(j-1) and
    keeps, among the angles consistent with the measured k*theta mod 2pi, the
    one inside the previous stage's half-width pi/k window. Works for any
    |c_v| <= 1 (the ideal angle lives in (-pi, pi]).
    """
    validate_word(v, oracle.n)
    schedule = rpe_schedule(s, delta_sup)
    cache = stage_cache if stage_cache is not None else {}
    theta = 0.0
    stages: list[dict] = []
    total_time = 0.0
    total_queries = 0
    for j in range(1, schedule.n_stages + 1):
        model = _stage_model(oracle, v, j, epsilon_sim, cache)
        shots = schedule.shots_per_stage[j - 1]
        zeros = int(rng.binomial(shots, model.p0))
        plusses = int(rng.binomial(shots, model.pplus))
        stage_time = 2 * shots * (2.0 * model.t)
        oracle.evolution_operator(
            model.tau, queries=2 * shots * model.n_iterations, evolution_time=stage_time
        )
        total_time += stage_time
        total_queries += 2 * shots * model.n_iterations
        phase = math.atan2(2.0 * plusses / shots - 1.0, 2.0 * zeros / shots - 1.0)
        multiplier = 2.0 ** (j - 1)
        theta += _wrap_angle(phase - multiplier * theta) / multiplier
        stages.append(
            {
                "stage": j,
                "multiplier": int(multiplier),
                "shots_per_basis": shots,
                "zeros": zeros,
                "plusses": plusses,
                "phase": phase,
                "estimate": theta,
            }
        )
    return EstimateResult(theta, schedule, stages, total_time, total_queries)


@dataclass
class MedianResult:
    estimate: float
    repeats: int
    estimates: list[float]
    evolution_time: float
    queries: int


def median_amplify(
    oracle: SeedOracle,
    v,
    epsilon: float,
    delta: float,
    rng: np.random.Generator,
    *,
    delta_sup: float = DEFAULT_BIAS_BOUND,
    epsilon_sim: float = DEFAULT_BIAS_BOUND,
) -> MedianResult:
    """Median of ceil(18 ln(1/delta)) runs at standard deviation epsilon/2.

    Each run misses by more than epsilon with probability well below 1/2
    (Chebyshev at two standard deviations gives at most 1/4), so the median
    fails with probability at most delta; the constant 18 makes the Chernoff
    bound explicit. Total evolution time is O(log(1/delta)/epsilon).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    repeats = math.ceil(18.0 * math.log(1.0 / delta))
    cache: dict = {}
    results = [
        estimate_parameter(
            oracle, v, epsilon / 2.0, rng,
            delta_sup=delta_sup, epsilon_sim=epsilon_sim, stage_cache=cache,
        )
        for _ in range(repeats)
    ]
    estimates = [r.estimate for r in results]
    return MedianResult(
        float(np.median(estimates)),
        repeats,
        estimates,
        sum(r.evolution_time for r in results),
        sum(r.queries for r in results),
    )

"""Randomized engine that turns forward black-box dynamics into e^{-if(H)t}.

One run draws N i.i.d. gate sequences: for each iteration a pair (v, v') of
Pauli words is chosen uniformly, a pair (u, w) is chosen proportionally to
the transfer-map weights, and the seed evolution e^{-iH t beta/N} is
conjugated by the resulting Clifford layer stack on the ancilla-plus-system
space. Averaged over the randomness, the N-fold product approaches the
target unitary channel with diamond-norm error at most epsilon and variance
at most 4 epsilon.

Execution modes:

* ``trajectory``        one random instance, a pure joint evolution followed
                        by tracing out the ancilla;
* ``averaged_monte_carlo``  the average of ``sample_count`` trajectories;
* ``averaged_exact``    the exactly averaged channel, computed by factoring
                        the sum over (v, v', u, w) into nested twirls and
                        raising the per-iteration superoperator to the N-th
                        power.

This module must stay ignorant of the oracle's hidden Hamiltonian; it only
uses the metered evolution operator. The white-box helpers live in
`reference` and are deliberately not imported here.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .classt import ClassTMap
from .linalg import (
    ancilla_prep_channel,
    ancilla_trace_channel,
    apply_channel,
    channel_power,
    unitary_channel,
)
from .oracle import SeedOracle
from .pauli import all_words, pauli_matrix, validate_word, word_index
from .transfer import TransferMap

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)

_SAMPLING_CHUNK = 32768

MODES = ("trajectory", "averaged_exact", "averaged_monte_carlo")


def iteration_count(beta: float, t: float, delta_h: float, epsilon: float) -> int:
    """N = ceil(max(5 beta^2 t^2 delta_h^2 / epsilon, (5/2) beta t delta_h)).

    The first branch dominates exactly when beta * t * delta_h >= epsilon / 2.
    """
    if beta <= 0 or t <= 0 or delta_h <= 0 or epsilon <= 0:
        raise ValueError("iteration_count needs strictly positive beta, t, delta_h, epsilon")
    first = 5.0 * beta**2 * t**2 * delta_h**2 / epsilon
    second = 2.5 * beta * t * delta_h
    return math.ceil(max(first, second))


# ---------------------------------------------------------------------------
# Gate layers


def controlled_pauli(word) -> np.ndarray:
    """Block unitary |0><0| x I + |1><1| x sigma_word on ancilla + system."""
    sigma = pauli_matrix(word)
    d = sigma.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = np.eye(d)
    out[d:, d:] = sigma
    return out


def _layer_matrix(layer: tuple, n: int) -> np.ndarray:
    kind = layer[0]
    if kind == "ctrl_pauli":
        return controlled_pauli(layer[1])
    if kind == "hadamard_ancilla":
        return np.kron(_HADAMARD, np.eye(2**n, dtype=complex))
    if kind == "pauli_system":
        return np.kron(np.eye(2, dtype=complex), pauli_matrix(layer[1]))
    if kind == "x_power_ancilla":
        x_power = np.linalg.matrix_power(_X, layer[1])
        return np.kron(x_power, np.eye(2**n, dtype=complex))
    raise ValueError(f"unknown layer kind {kind!r}")


@dataclass
class GateSequence:
    """Ordered Clifford layers on the (ancilla x system) space.

    `layers` are stored in application order (first applied first); the dense
    matrix is the reversed product.
    """

    n: int
    layers: tuple[tuple, ...]

    def matrix(self) -> np.ndarray:
        out = np.eye(2 ** (self.n + 1), dtype=complex)
        for layer in self.layers:
            out = _layer_matrix(layer, self.n) @ out
        return out


def build_gate_sequence(v, v_prime, u, w, s_f: int) -> GateSequence:
    """The conjugating sequence for index j = (v, v', u, w) and sign bit s_f.

    Application order: controlled-sigma_v, Hadamard on the ancilla,
    controlled-sigma_u, sigma_v' on the system, controlled-sigma_w, Hadamard
    on the ancilla, X^{s_f} on the ancilla.
    """
    v = validate_word(v)
    n = len(v)
    v_prime = validate_word(v_prime, n)
    u = validate_word(u, n)
    w = validate_word(w, n)
    if s_f not in (0, 1):
        raise ValueError(f"s_f must be 0 or 1, got {s_f}")
    layers = (
        ("ctrl_pauli", v),
        ("hadamard_ancilla",),
        ("ctrl_pauli", u),
        ("pauli_system", v_prime),
        ("ctrl_pauli", w),
        ("hadamard_ancilla",),
        ("x_power_ancilla", s_f),
    )
    return GateSequence(n, layers)


@lru_cache(maxsize=8)
def _layer_banks(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Stacked layer matrices on the joint space, indexed by word index.

    Returns (controlled-Pauli bank, system-Pauli bank, joint Hadamard,
    ancilla-X powers). All read-only.
    """
    ctrl = np.stack([controlled_pauli(word) for word in all_words(n)])
    sys_b = np.stack(
        [np.kron(np.eye(2, dtype=complex), pauli_matrix(word)) for word in all_words(n)]
    )
    had = np.kron(_HADAMARD, np.eye(2**n, dtype=complex))
    xpow = np.stack([np.eye(2 ** (n + 1), dtype=complex), np.kron(_X, np.eye(2**n))])
    for arr in (ctrl, sys_b, had, xpow):
        arr.setflags(write=False)
    return ctrl, sys_b, had, xpow


def _entry_tables(f: TransferMap) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-entry (w index, u index, s_f) arrays in the map's canonical order."""
    pairs = f.sorted_entries()
    w_idx = np.array([word_index(w) for (w, _), _ in pairs])
    u_idx = np.array([word_index(u) for (_, u), _ in pairs])
    s_f = np.array([0 if g > 0 else 1 for _, g in pairs])
    return w_idx, u_idx, s_f


# ---------------------------------------------------------------------------
# Run configuration and result


@dataclass
class RunConfig:
    """Target time, allowed error, execution mode and seeding for one run."""

    t: float
    epsilon: float
    mode: str = "trajectory"
    seed: int = 0
    sample_count: int = 1
    enumeration_budget: int = 10_000_000
    threads: int = 1

    def __post_init__(self) -> None:
        if self.t <= 0:
            raise ValueError("t must be > 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class RunResult:
    """Output of one engine run plus its resource report."""

    mode: str
    seed: int
    n_iterations: int
    beta: float
    tau: float
    density: np.ndarray | None
    channel: np.ndarray | None
    ledger: dict
    charged: dict
    metrics: dict = field(default_factory=dict)

    def report(self) -> dict:
        return {
            "N": self.n_iterations,
            "beta": self.beta,
            "mode": self.mode,
            "seed": self.seed,
            "ledger": dict(self.ledger),
            "metrics": dict(self.metrics),
        }


# ---------------------------------------------------------------------------
# Trajectory sampling


def _sample_indices(
    rng: np.random.Generator, count: int, f: TransferMap
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw per-iteration (v, v') uniformly and entry indices by weight.

    The uniform words are drawn as 2n independent base-4 digits each, which
    is exactly uniform over 16^n pairs without any big-integer indexing.
    """
    n = f.n
    digits = rng.integers(0, 4, size=(count, 2 * n))
    powers = 4 ** np.arange(n - 1, -1, -1)
    iv = digits[:, :n] @ powers
    ivp = digits[:, n:] @ powers
    entry_idx = f.sample_entry_index(rng.random(count))
    return iv, ivp, entry_idx


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """Product stack[-1] @ ... @ stack[0] by pairwise reduction."""
    while stack.shape[0] > 1:
        m = stack.shape[0]
        even = m - (m % 2)
        reduced = np.matmul(stack[1:even:2], stack[0:even:2])
        stack = np.concatenate([reduced, stack[even:]]) if m % 2 else reduced
    return stack[0]


_FACTOR_BANK_MAX = 4096


def _factor_stack(
    joint_evolution: np.ndarray,
    banks: tuple,
    tables: tuple,
    iv: np.ndarray,
    ivp: np.ndarray,
    entries: np.ndarray,
) -> np.ndarray:
    """Per-iteration factors V_j W V_j^dag for the given index draws."""
    ctrl, sys_b, had, xpow = banks
    w_idx, u_idx, s_f = tables
    seq = ctrl[iv]
    seq = had @ seq
    seq = ctrl[u_idx[entries]] @ seq
    seq = sys_b[ivp] @ seq
    seq = ctrl[w_idx[entries]] @ seq
    seq = had @ seq
    seq = xpow[s_f[entries]] @ seq
    return (seq @ joint_evolution) @ seq.conj().transpose(0, 2, 1)


def _factor_bank(joint_evolution: np.ndarray, f: TransferMap) -> np.ndarray | None:
    """All distinct per-iteration factors, when the index space is small.

    The bank is indexed by (iv * 4^n + ivp) * |entries| + entry and is built
    with the same operation sequence as the on-the-fly path, so both paths
    produce identical floats.
    """
    four_n = 4**f.n
    n_entries = len(f.entries)
    size = four_n * four_n * n_entries
    if size > _FACTOR_BANK_MAX:
        return None
    iv = np.repeat(np.arange(four_n), four_n * n_entries)
    ivp = np.tile(np.repeat(np.arange(four_n), n_entries), four_n)
    entries = np.tile(np.arange(n_entries), four_n * four_n)
    return _factor_stack(joint_evolution, _layer_banks(f.n), _entry_tables(f), iv, ivp, entries)


def _trajectory_unitary(
    joint_evolution: np.ndarray,
    f: TransferMap,
    rng: np.random.Generator,
    n_iterations: int,
    factor_bank: np.ndarray | None = None,
) -> np.ndarray:
    """Dense unitary of one random instance, V_N W V_N^dag ... V_1 W V_1^dag."""
    banks = _layer_banks(f.n)
    tables = _entry_tables(f)
    four_n = 4**f.n
    n_entries = len(f.entries)
    dim = joint_evolution.shape[0]
    total = np.eye(dim, dtype=complex)
    remaining = n_iterations
    while remaining:
        m = min(remaining, _SAMPLING_CHUNK)
        iv, ivp, entries = _sample_indices(rng, m, f)
        if factor_bank is None:
            factors = _factor_stack(joint_evolution, banks, tables, iv, ivp, entries)
        else:
            factors = factor_bank[(iv * four_n + ivp) * n_entries + entries]
        total = _ordered_product(factors) @ total
        remaining -= m
    return total


@dataclass
class TrajectoryBatch:
    """Independently seeded trajectory unitaries on the joint space."""

    unitaries: np.ndarray
    n_iterations: int
    beta: float
    tau: float
    t: float
    seed: int


def _run_parameters(oracle: SeedOracle, f: TransferMap, t: float, epsilon: float):
    beta = f.beta
    if oracle.delta_h > 0:
        n_iter = iteration_count(beta, t, oracle.delta_h, epsilon)
    else:
        # Zero spectral range: a single conjugated query already reproduces
        # the (trivial) target exactly.
        n_iter = 1
    tau = t * beta / n_iter
    return beta, n_iter, tau


def sample_unitaries(
    oracle: SeedOracle,
    f: TransferMap,
    t: float,
    epsilon: float,
    seed: int,
    count: int,
    threads: int = 1,
) -> TrajectoryBatch:
    """Draw `count` independent trajectory unitaries.

    Trajectory k uses the generator seeded from (seed, k), so any prefix of a
    batch coincides with a smaller batch and results do not depend on the
    thread count. Each trajectory charges the oracle N queries totalling
    beta * t of evolution time.
    """
    if oracle.n != f.n:
        raise ValueError(f"oracle is on {oracle.n} qubits but the map is on {f.n}")
    if count < 1:
        raise ValueError("count must be >= 1")
    beta, n_iter, tau = _run_parameters(oracle, f, t, epsilon)
    w_sys = oracle.evolution_operator(tau, queries=0)
    joint_w = np.kron(np.eye(2, dtype=complex), w_sys)
    dim = joint_w.shape[0]
    bank = _factor_bank(joint_w, f)
    out = np.empty((count, dim, dim), dtype=complex)

    def build(k: int) -> None:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, k)))
        out[k] = _trajectory_unitary(joint_w, f, rng, n_iter, factor_bank=bank)
        oracle.evolution_operator(tau, queries=n_iter, evolution_time=beta * t)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(build, range(count)))
    else:
        for k in range(count):
            build(k)
    return TrajectoryBatch(out, n_iter, beta, tau, t, seed)


def _trace_out_leading(vector: np.ndarray) -> np.ndarray:
    """Density matrix of a pure joint state with the leading qubit traced out."""
    rest = vector.shape[0] // 2
    v = vector.reshape(2, rest)
    return v.T @ v.conj()


# ---------------------------------------------------------------------------
# Exact averaging


@dataclass
class AveragedChannel:
    """Exactly averaged run as superoperators, plus its parameters."""

    system_channel: np.ndarray
    joint_step: np.ndarray
    n_iterations: int
    beta: float
    tau: float


def averaged_step_channel(joint_evolution: np.ndarray, f: TransferMap) -> np.ndarray:
    """Exact per-iteration channel sum_j p_j V_j (W . W^dag) V_j^dag.

    The sum over j = (v, v', u, w) factors: the v-twirl and first Hadamard
    are shared by every entry, the v'-twirl nests inside each (w, u) entry.
    Terms are accumulated in lexicographic order for bit-stable output. All
    layers are Hermitian unitaries, so each conjugation inverse equals the
    matrix itself.
    """
    ctrl, sys_b, had, xpow = _layer_banks(f.n)
    ctrl_s = [unitary_channel(c) for c in ctrl]
    sys_s = [unitary_channel(s) for s in sys_b]
    had_s = unitary_channel(had)
    flip_s = unitary_channel(xpow[1])

    step = unitary_channel(joint_evolution)
    inner = sum(cs @ step @ cs for cs in ctrl_s) / len(ctrl_s)
    inner = had_s @ inner @ had_s

    out = np.zeros_like(inner)
    for (w, u), gamma in f.sorted_entries():
        term = ctrl_s[word_index(u)] @ inner @ ctrl_s[word_index(u)]
        term = sum(ss @ term @ ss for ss in sys_s) / len(sys_s)
        term = ctrl_s[word_index(w)] @ term @ ctrl_s[word_index(w)]
        term = had_s @ term @ had_s
        if gamma < 0:
            term = flip_s @ term @ flip_s
        out += (2.0 * abs(gamma) / f.beta) * term
    return out


def averaged_channel(
    oracle: SeedOracle,
    f: TransferMap,
    t: float,
    epsilon: float,
    *,
    enumeration_budget: int = 10_000_000,
) -> AveragedChannel:
    """System-level channel of the exactly averaged run (prep, N steps, trace).

    Refuses when the conceptual term count 16^(2n) * |entries| exceeds the
    enumeration budget. Does not charge the oracle ledger; callers account
    for the runs they model.
    """
    if oracle.n != f.n:
        raise ValueError(f"oracle is on {oracle.n} qubits but the map is on {f.n}")
    terms = 16 ** (2 * f.n) * len(f.entries)
    if terms > enumeration_budget:
        raise ValueError(
            f"exact averaging needs {terms} terms, above the enumeration budget "
            f"{enumeration_budget}"
        )
    beta, n_iter, tau = _run_parameters(oracle, f, t, epsilon)
    w_sys = oracle.evolution_operator(tau, queries=0)
    joint_w = np.kron(np.eye(2, dtype=complex), w_sys)
    step = averaged_step_channel(joint_w, f)
    total = channel_power(step, n_iter)
    d = oracle.dim
    system = ancilla_trace_channel(d) @ total @ ancilla_prep_channel(d)
    return AveragedChannel(system, step, n_iter, beta, tau)


# ---------------------------------------------------------------------------
# Full runs


def run(
    oracle: SeedOracle,
    f: TransferMap,
    psi_in: np.ndarray | None,
    config: RunConfig,
    *,
    reference_dim: int = 1,
) -> RunResult:
    """Execute one configured run and report its resource ledger.

    Trajectory modes require an input state on system x reference (the
    reference is an optional bystander the evolution does not touch) and
    return its transformed density matrix. The averaged_exact mode returns
    the full system-level channel and, when an input is given, the channel
    applied to it.
    """
    if oracle.n != f.n:
        raise ValueError(f"oracle is on {oracle.n} qubits but the map is on {f.n}")
    before = dict(oracle.ledger)
    beta, n_iter, tau = _run_parameters(oracle, f, t=config.t, epsilon=config.epsilon)
    per_run_ledger = {"queries": n_iter, "evolution_time": beta * config.t}

    density = None
    channel = None
    if config.mode == "averaged_exact":
        if reference_dim != 1:
            raise ValueError("averaged_exact does not take a reference; extend the channel instead")
        avg = averaged_channel(
            oracle, f, config.t, config.epsilon, enumeration_budget=config.enumeration_budget
        )
        oracle.evolution_operator(avg.tau, queries=avg.n_iterations, evolution_time=beta * config.t)
        channel = avg.system_channel
        if psi_in is not None:
            psi = _check_state(psi_in, oracle.dim)
            density = apply_channel(channel, np.outer(psi, psi.conj()))
    else:
        psi = _check_state(psi_in, oracle.dim * reference_dim)
        count = 1 if config.mode == "trajectory" else config.sample_count
        batch = sample_unitaries(
            oracle, f, config.t, config.epsilon, config.seed, count, threads=config.threads
        )
        joint_in = np.kron(np.array([1.0, 0.0], dtype=complex), psi)
        acc = np.zeros((oracle.dim * reference_dim,) * 2, dtype=complex)
        for k in range(count):
            traj = batch.unitaries[k]
            if reference_dim > 1:
                traj = np.kron(traj, np.eye(reference_dim, dtype=complex))
            acc += _trace_out_leading(traj @ joint_in)
        density = acc / count

    after = oracle.ledger
    charged = {
        "queries": after["queries"] - before["queries"],
        "evolution_time": after["evolution_time"] - before["evolution_time"],
    }
    return RunResult(
        mode=config.mode,
        seed=config.seed,
        n_iterations=n_iter,
        beta=beta,
        tau=tau,
        density=density,
        channel=channel,
        ledger=per_run_ledger,
        charged=charged,
    )


def _check_state(psi: np.ndarray | None, dim: int) -> np.ndarray:
    if psi is None:
        raise ValueError("this mode needs an input state")
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.shape[0] != dim:
        raise ValueError(f"input state has dimension {v.shape[0]}, expected {dim}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"input state norm {norm} is not 1")
    return v


# ---------------------------------------------------------------------------
# The protocol as a weighted-conjugation map


def classt_totals(f: TransferMap, max_elements: int = 262144) -> ClassTMap:
    """The weighted set {(beta * p_j, V_j)} over all 16^n * |entries| indices.

    Its total weight is beta, and applying it to I x H reproduces the
    direct-sum form of f(H) up to a multiple of the identity.
    """
    n = f.n
    ctrl, sys_b, had, xpow = _layer_banks(n)
    count = 16**n * len(f.entries)
    if count > max_elements:
        raise ValueError(f"{count} elements exceed the budget {max_elements}")
    elements: list[tuple[float, np.ndarray]] = []
    for (w, u), gamma in f.sorted_entries():
        weight = 2.0 * abs(gamma) / 16**n
        s_f = 0 if gamma > 0 else 1
        head = xpow[s_f] @ had @ ctrl[word_index(w)]
        tail = (controlled_pauli(u) @ had) @ ctrl
        mids = head @ sys_b
        # (v', v) block of products, flattened in v-major order below
        block = mids[:, None, :, :] @ tail[None, :, :, :]
        for v_i in range(4**n):
            for vp_i in range(4**n):
                elements.append((weight, block[vp_i, v_i]))
    return ClassTMap(elements)

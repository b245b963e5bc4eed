"""Reproducible experiment runner.

Commands
--------
transform     run the engine for a configured (oracle, map, state, t, eps, mode)
verify        run a named verification suite (lemma4, error, variance,
              theorem2, qdrift-bound, twirl)
learn         single-coefficient estimation, optionally an s-sweep table
block-encode  simulate e^{+-iH'(A)t} from forward H(A) dynamics

Shared flags: --config <path>, --seed <u64>, --out <path>, --format json|csv,
--threads <k>. Exit codes: 0 success, 1 assertion/bound failure, 2
usage/config error.

Determinism: identical (config, seed) produce byte-identical result JSON
apart from the "timestamp" field, which is excluded from that contract. The
master seed splits into per-component streams counter-style: component k of
a batch uses numpy's SeedSequence with entropy (seed, k).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import reference
from .blockenc import BlockHamiltonian, qsvt_error_budget, qsvt_query_budget, simulate_hprime_evolution
from .engine import RunConfig, classt_totals, iteration_count, run, sample_unitaries
from .learning import estimate_parameter
from .linalg import (
    choi_distance,
    expm_hermitian,
    matrix_from_json,
    trace_norm,
    unitary_channel,
)
from .metrics import empirical_variance, qdrift_error_bound, theorem2_check
from .oracle import SeedOracle, make_random_klocal
from .pauli import PauliSum, pauli_twirl, validate_word
from .transfer import TransferMap, apply, build_filter, build_negation, build_transpose

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

CONFIG_VERSION = 1


class ConfigError(Exception):
    """Invalid or incomplete configuration."""


# ---------------------------------------------------------------------------
# Config plumbing


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    if config.get("version") != CONFIG_VERSION:
        raise ConfigError(f"config must declare \"version\": {CONFIG_VERSION}")
    return config


def _require(config: dict, *fields: str) -> None:
    missing = [f for f in fields if f not in config]
    if missing:
        raise ConfigError(f"config is missing required field(s): {', '.join(missing)}")


def _hamiltonian(config: dict) -> PauliSum:
    _require(config, "hamiltonian")
    try:
        return PauliSum.from_json_dict(config["hamiltonian"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad hamiltonian: {exc}") from exc


def _transfer_map(config: dict, n: int) -> TransferMap:
    _require(config, "transform")
    kind = config["transform"]
    support = None
    if "support" in config:
        support = [validate_word(w, n) for w in config["support"]]
    try:
        if kind == "negation":
            return build_negation(n, support)
        if kind == "transpose":
            return build_transpose(n, support)
        if kind == "filter":
            _require(config, "filter_v")
            return build_filter(n, config["filter_v"])
        if kind == "custom":
            _require(config, "map")
            return TransferMap.from_json_dict(config["map"])
    except ValueError as exc:
        raise ConfigError(f"bad transform: {exc}") from exc
    raise ConfigError(f"unknown transform {kind!r}")


def _state_vector(data: list, dim: int) -> np.ndarray:
    vec = np.array([complex(re, im) for re, im in data])
    if vec.shape[0] != dim:
        raise ConfigError(f"input state has dimension {vec.shape[0]}, expected {dim}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ConfigError("input state must not be zero")
    return vec / norm


def _result_frame(command: str, config: dict | None, seed: int) -> dict:
    return {
        "version": CONFIG_VERSION,
        "command": command,
        "config_echo": config,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "metrics": {},
        "ledger": {},
        "pass": None,
    }


def _emit(result: dict, out_path: str | None, text: str | None = None) -> None:
    payload = text if text is not None else json.dumps(result, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _exit_code(result: dict) -> int:
    return EXIT_OK if result["pass"] in (True, None) else EXIT_FAIL


# ---------------------------------------------------------------------------
# transform


def cmd_transform(args: argparse.Namespace) -> int:
    if args.format == "csv":
        raise ConfigError("transform only supports --format json")
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    _require(config, "t", "epsilon", "mode")
    hamiltonian = _hamiltonian(config)
    f = _transfer_map(config, hamiltonian.n)
    oracle = SeedOracle(hamiltonian, config.get("delta_h"))
    psi = None
    if config.get("input_state") is not None:
        psi = _state_vector(config["input_state"], oracle.dim)
    elif config["mode"] != "averaged_exact":
        psi = np.zeros(oracle.dim, dtype=complex)
        psi[0] = 1.0
    try:
        run_config = RunConfig(
            t=float(config["t"]),
            epsilon=float(config["epsilon"]),
            mode=config["mode"],
            seed=seed,
            sample_count=int(config.get("sample_count", 1)),
            threads=args.threads,
        )
        result_run = run(oracle, f, psi, run_config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    result = _result_frame("transform", config, seed)
    result["ledger"] = result_run.ledger
    result["metrics"] = {"N": result_run.n_iterations, "beta": result_run.beta}
    target = reference.exact_transformed_evolution(hamiltonian, f, run_config.t)
    if result_run.channel is not None:
        distance = choi_distance(result_run.channel, unitary_channel(target))
        result["metrics"]["choi_distance"] = distance
        result["pass"] = bool(distance <= run_config.epsilon)
    if result_run.density is not None and psi is not None:
        exact = target @ psi
        diff = result_run.density - np.outer(exact, exact.conj())
        result["metrics"]["trace_distance_to_exact"] = 0.5 * trace_norm(diff)
    _emit(result, args.out)
    return _exit_code(result)


# ---------------------------------------------------------------------------
# verify suites


def _suite_twirl(args: argparse.Namespace) -> dict:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for n in (1, 2):
        d = 2**n
        for _ in range(50):
            m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            expected = np.trace(m) / d * np.eye(d)
            worst = max(worst, float(np.max(np.abs(pauli_twirl(m) - expected))))
    return {"max_deviation": worst, "pass": worst <= 1e-12}


def _suite_lemma4(args: argparse.Namespace) -> dict:
    rng = np.random.default_rng(args.seed)
    n = args.n
    maps = [
        ("negation", build_negation(n)),
        ("transpose", build_transpose(n)),
        ("filter", build_filter(n, (1,) + (0,) * (n - 1))),
    ]
    worst = 0.0
    for _, f in maps:
        elements = classt_totals(f)
        for _ in range(5):
            oracle = make_random_klocal(n, n, 1.0, rng)
            h = reference.hidden_hamiltonian(oracle)
            got, _ = reference.split_identity_component(reference.g_total_bruteforce(h, f, elements))
            want, _ = reference.split_identity_component(reference.expected_g_total(h, f))
            worst = max(worst, float(np.max(np.abs(got - want))))
    return {"max_deviation": worst, "qubits": n, "pass": worst <= 1e-9}


def _suite_error(args: argparse.Namespace) -> dict:
    h = PauliSum(1, {(1,): 0.7, (3,): 0.3})
    f = build_negation(1)
    epsilon = 0.2
    oracle = SeedOracle(h)
    res = run(oracle, f, None, RunConfig(t=1.0, epsilon=epsilon, mode="averaged_exact", seed=args.seed))
    target = unitary_channel(reference.exact_transformed_evolution(h, f, 1.0))
    distance = choi_distance(res.channel, target)
    return {"choi_distance": distance, "epsilon": epsilon, "N": res.n_iterations,
            "pass": distance <= epsilon}


def _suite_variance(args: argparse.Namespace) -> dict:
    h = PauliSum(1, {(1,): 0.7, (3,): 0.3})
    f = build_negation(1)
    epsilon = 0.2
    oracle = SeedOracle(h)
    batch = sample_unitaries(oracle, f, 1.0, epsilon, args.seed, count=200, threads=args.threads)
    target = reference.exact_transformed_evolution(h, f, 1.0)
    exact_channel = unitary_channel(np.kron(target, np.eye(2)))
    rng = np.random.default_rng(args.seed + 1)
    checks = []
    extended = np.stack([np.kron(u, np.eye(2, dtype=complex)) for u in batch.unitaries])
    for _ in range(3):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        joint_in = np.kron(np.array([1.0, 0.0], dtype=complex), psi)
        outs = np.einsum("kab,b->ka", extended, joint_in)
        outs = outs.reshape(-1, 2, 4)
        densities = np.einsum("kai,kaj->kij", outs, outs.conj())
        mean, stderr = empirical_variance(exact_channel, densities, psi)
        checks.append({"mean": mean, "stderr": stderr, "bound": 4 * epsilon,
                       "pass": mean <= 4 * epsilon + 3 * stderr})
    return {"inputs": checks, "pass": all(c["pass"] for c in checks)}


def _suite_theorem2(args: argparse.Namespace) -> dict:
    rng = np.random.default_rng(args.seed)
    from .linalg import haar_unitary

    failures = 0
    for _ in range(20):
        u = haar_unitary(2, rng)
        k = int(rng.integers(2, 5))
        probs = rng.random(k)
        probs /= probs.sum()
        mixture = []
        for p in probs:
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            g = (g + g.conj().T) / 2
            mixture.append((float(p), unitary_channel(u @ expm_hermitian(g, 0.2))))
        report = theorem2_check(u, mixture, trials=100, rng=rng)
        failures += 0 if report["satisfied"] else 1
    return {"protocols": 20, "failures": failures, "pass": failures == 0}


def _suite_qdrift_bound(args: argparse.Namespace) -> dict:
    rng = np.random.default_rng(args.seed)
    worst_ratio = 0.0
    for _ in range(1000):
        beta = float(10.0 ** rng.uniform(0, 2))
        t = float(10.0 ** rng.uniform(-2, 1))
        delta = float(10.0 ** rng.uniform(-1, 1))
        epsilon = float(10.0 ** rng.uniform(-3, 0))
        n_steps = iteration_count(beta, t, delta, epsilon)
        bound = qdrift_error_bound(beta, t * delta, n_steps)
        worst_ratio = max(worst_ratio, bound / epsilon)
    return {"grid_points": 1000, "worst_bound_over_epsilon": worst_ratio,
            "pass": worst_ratio <= 1.0}


_SUITES = {
    "lemma4": _suite_lemma4,
    "error": _suite_error,
    "variance": _suite_variance,
    "theorem2": _suite_theorem2,
    "qdrift-bound": _suite_qdrift_bound,
    "twirl": _suite_twirl,
}


def cmd_verify(args: argparse.Namespace) -> int:
    if args.format == "csv":
        raise ConfigError("verify only supports --format json")
    report = _SUITES[args.suite](args)
    result = _result_frame("verify", {"suite": args.suite}, args.seed)
    result["metrics"] = {k: v for k, v in report.items() if k != "pass"}
    result["pass"] = bool(report["pass"])
    _emit(result, args.out)
    return _exit_code(result)


# ---------------------------------------------------------------------------
# learn


def cmd_learn(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    _require(config, "target", "s")
    hamiltonian = _hamiltonian(config)
    target_word = validate_word(config["target"], hamiltonian.n)
    kwargs = {}
    if "delta_sup" in config:
        kwargs["delta_sup"] = float(config["delta_sup"])
    if "epsilon_sim" in config:
        kwargs["epsilon_sim"] = float(config["epsilon_sim"])

    sweep_values = [float(x) for x in config.get("sweep", [])]
    cache: dict = {}
    try:
        oracle = SeedOracle(hamiltonian, config.get("delta_h"))
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0)))
        estimate = estimate_parameter(
            oracle, target_word, float(config["s"]), rng, stage_cache=cache, **kwargs
        )
        sweep_rows = []
        for k, s_value in enumerate(sweep_values, start=1):
            sweep_oracle = SeedOracle(hamiltonian, config.get("delta_h"))
            sweep_rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, k)))
            res = estimate_parameter(
                sweep_oracle, target_word, s_value, sweep_rng, stage_cache=cache, **kwargs
            )
            sweep_rows.append(
                {
                    "s": s_value,
                    "estimate": res.estimate,
                    "evolution_time": res.evolution_time,
                    "queries": res.queries,
                }
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    result = _result_frame("learn", config, seed)
    result["ledger"] = {"queries": estimate.queries, "evolution_time": estimate.evolution_time}
    result["metrics"] = {
        "estimate": estimate.estimate,
        "stages": estimate.stages,
        "schedule": {
            "n_stages": estimate.schedule.n_stages,
            "shots_per_stage": estimate.schedule.shots_per_stage,
            "repetition_factor": estimate.schedule.repetition_factor,
        },
    }
    if sweep_rows:
        result["metrics"]["sweep"] = sweep_rows
    result["pass"] = True

    if args.format == "csv":
        if not sweep_rows:
            raise ConfigError("--format csv needs a \"sweep\" list in the config")
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=["s", "estimate", "evolution_time", "queries"])
        writer.writeheader()
        writer.writerows(sweep_rows)
        _emit(result, args.out, text=buffer.getvalue())
    else:
        _emit(result, args.out)
    return _exit_code(result)


# ---------------------------------------------------------------------------
# block-encode


def cmd_block_encode(args: argparse.Namespace) -> int:
    if args.format == "csv":
        raise ConfigError("block-encode only supports --format json")
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    _require(config, "a", "t", "epsilon")
    sign_label = config.get("sign", "-")
    if sign_label not in ("+", "-"):
        raise ConfigError(f"sign must be '+' or '-', got {sign_label!r}")
    sign = +1 if sign_label == "+" else -1
    try:
        block = BlockHamiltonian(
            matrix_from_json(config["a"]),
            matrix_from_json(config["diag0"]) if config.get("diag0") else None,
            matrix_from_json(config["diag1"]) if config.get("diag1") else None,
        )
        oracle = block.oracle(config.get("delta_h"))
        res = simulate_hprime_evolution(
            oracle,
            sign,
            float(config["t"]),
            float(config["epsilon"]),
            config.get("mode", "averaged_exact"),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    result = _result_frame("block-encode", config, seed)
    result["ledger"] = res.ledger
    budget_queries = qsvt_query_budget(
        float(config["epsilon"]), block.lambda_min, float(config.get("budget_constant", 1.0))
    )
    result["metrics"] = {
        "N": res.n_iterations,
        "beta": res.beta,
        "lambda_min": block.lambda_min,
        "qsvt_query_budget": budget_queries,
        "error_budget": qsvt_error_budget(float(config["epsilon"]), budget_queries),
    }
    if res.channel is not None:
        target = expm_hermitian(block.offdiagonal_part(), -sign * float(config["t"]))
        distance = choi_distance(res.channel, unitary_channel(target))
        result["metrics"]["choi_distance"] = distance
        result["pass"] = bool(distance <= float(config["epsilon"]))
    _emit(result, args.out)
    return _exit_code(result)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamtrans",
        description="Simulate linear transformations of black-box Hamiltonian dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool) -> None:
        if needs_config:
            p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--out", default=None, help="write the result to this path")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--threads", type=int, default=1, help="trajectory worker threads")

    p_transform = sub.add_parser("transform", help="run one configured transformation")
    common(p_transform, needs_config=True)
    p_transform.set_defaults(func=cmd_transform)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=sorted(_SUITES))
    p_verify.add_argument("--n", type=int, default=1, help="qubit count where applicable")
    common(p_verify, needs_config=False)
    p_verify.set_defaults(func=cmd_verify)

    p_learn = sub.add_parser("learn", help="estimate one Pauli coefficient")
    common(p_learn, needs_config=True)
    p_learn.set_defaults(func=cmd_learn)

    p_block = sub.add_parser("block-encode", help="simulate e^{+-iH'(A)t}")
    common(p_block, needs_config=True)
    p_block.set_defaults(func=cmd_block_encode)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None and not hasattr(args, "config"):
        args.seed = 0
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be >= 0")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

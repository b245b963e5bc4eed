"""Transfer-matrix descriptions of Hermitian-preserving maps on Pauli sums.

A `TransferMap` stores the sparse real matrix gamma with f(sigma_u) =
sum_w gamma_{w,u} sigma_w. Input words u are required to be different from
the all-identity word, which structurally enforces f(I) = 0 (the physically
realizable class, up to a multiple of the identity). The normalization
constant beta = 2 * sum |gamma| sets both the sampling distribution
p_{u,w} = 2|gamma_{w,u}| / beta and the evolution-time budget of a
transformed-dynamics run.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliSum, PauliWord, all_words, validate_word, word_index, y_weight

MIN_GAMMA = 1e-15


@dataclass
class TransferMap:
    """Sparse Pauli-transfer representation of a Hermitian-preserving map.

    `entries` maps (output_word, input_word) pairs to nonzero real gamma.
    Immutable after construction; sampling state (cumulative weight table)
    is precomputed so draws cost one binary search.
    """

    n: int
    entries: dict[tuple[PauliWord, PauliWord], float]
    beta: float = field(init=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("qubit count must be >= 1")
        identity = (0,) * self.n
        clean: dict[tuple[PauliWord, PauliWord], float] = {}
        for (w, u), gamma in self.entries.items():
            w = validate_word(w, self.n)
            u = validate_word(u, self.n)
            if u == identity:
                raise ValueError("input word of a transfer-map entry must not be the identity")
            g = float(gamma)
            if not np.isfinite(g):
                raise ValueError(f"gamma for ({w}, {u}) is not finite")
            if abs(g) < MIN_GAMMA:
                raise ValueError(
                    f"|gamma| = {abs(g):.3e} for ({w}, {u}) is below {MIN_GAMMA:.0e}; "
                    "entries this small would corrupt sign bookkeeping"
                )
            clean[(w, u)] = g
        if not clean:
            raise ValueError("transfer map needs at least one entry")
        self.entries = clean
        self.beta = 2.0 * sum(abs(g) for g in clean.values())
        # Deterministic lexicographic order backs both sampling and averaging.
        self._pairs = sorted(
            clean.items(), key=lambda kv: (word_index(kv[0][0]), word_index(kv[0][1]))
        )
        weights = np.array([2.0 * abs(g) / self.beta for _, g in self._pairs])
        self._cumulative = np.cumsum(weights)
        self._cumulative[-1] = 1.0

    def sorted_entries(self) -> list[tuple[tuple[PauliWord, PauliWord], float]]:
        """Entries as ((w, u), gamma) in lexicographic (w, u) order."""
        return list(self._pairs)

    def pair_probabilities(self) -> np.ndarray:
        """Sampling probabilities 2|gamma|/beta in `sorted_entries` order."""
        probs = np.diff(self._cumulative, prepend=0.0)
        return probs

    def sample_entry_index(self, uniform: float | np.ndarray) -> np.ndarray:
        """Map uniform(0,1) draws to entry indices via the cumulative table."""
        return np.searchsorted(self._cumulative, uniform, side="right")

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                {"w": list(w), "u": list(u), "gamma": g} for (w, u), g in self._pairs
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TransferMap":
        n = int(data["n"])
        entries = {
            (validate_word(e["w"], n), validate_word(e["u"], n)): float(e["gamma"])
            for e in data["entries"]
        }
        return cls(n, entries)


def apply(f: TransferMap, h: PauliSum) -> PauliSum:
    """f(H) = sum_{(w,u)} gamma_{w,u} c_u sigma_w as a PauliSum.

    Linear in H and independent of H's identity component.
    """
    if f.n != h.n:
        raise ValueError(f"qubit counts differ: map has {f.n}, operator has {h.n}")
    out: dict[PauliWord, float] = {}
    for (w, u), gamma in f.entries.items():
        c = h.terms.get(u)
        if c:
            out[w] = out.get(w, 0.0) + gamma * c
    return PauliSum(h.n, out)


def _diagonal_support(n: int, support: Iterable[PauliWord] | None) -> list[PauliWord]:
    identity = (0,) * n
    if support is None:
        return [w for w in all_words(n) if w != identity]
    words = [validate_word(w, n) for w in support]
    if identity in words:
        raise ValueError("support set must not contain the all-identity word")
    if not words:
        raise ValueError("support set must be non-empty")
    return words


def build_negation(n: int, support: Iterable[PauliWord] | None = None) -> TransferMap:
    """The map H -> -H on the traceless part, gamma_{w,u} = -delta_{w,u}.

    With a `support` set J the diagonal is restricted to J, which leaves the
    action on operators supported on J (plus identity) unchanged while
    shrinking beta from 2(4^n - 1) to 2|J|.
    """
    return TransferMap(n, {(w, w): -1.0 for w in _diagonal_support(n, support)})


def build_transpose(n: int, support: Iterable[PauliWord] | None = None) -> TransferMap:
    """The map H -> H^T, gamma_{w,u} = (-1)^{#Y factors} delta_{w,u}.

    Transposition in the computational basis flips the sign of each Y factor
    and fixes I, X, Z.
    """
    return TransferMap(
        n, {(w, w): float((-1) ** y_weight(w)) for w in _diagonal_support(n, support)}
    )


def build_filter(n: int, v: Sequence[int]) -> TransferMap:
    """The single-coefficient filter H -> c_v * (Y x I x ... x I), beta = 2.

    Keeps only the coefficient of sigma_v and routes it to the first-qubit Y
    word, which a first-qubit measurement can read out.
    """
    target = validate_word(v, n)
    if target == (0,) * n:
        raise ValueError("cannot filter the identity coefficient")
    y_first = (2,) + (0,) * (n - 1)
    return TransferMap(n, {(y_first, target): 1.0})


def sample_uw(f: TransferMap, rng: np.random.Generator) -> tuple[PauliWord, PauliWord, int]:
    """Draw (u, w) with probability 2|gamma_{w,u}|/beta; s_f = (1 - sgn gamma)/2."""
    idx = int(f.sample_entry_index(rng.random()))
    (w, u), gamma = f.sorted_entries()[idx]
    s_f = 0 if gamma > 0 else 1
    return u, w, s_f

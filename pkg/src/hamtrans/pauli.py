"""Pauli word algebra: tensor products, Hermitian decompositions, twirls.

A Pauli word on n qubits is a tuple of per-qubit indices in {0, 1, 2, 3},
standing for I, X, Y, Z. Words are enumerated lexicographically, so the word
(w_1, ..., w_n) has flat index sum_i w_i * 4^(n-i), matching base-4 digits
read left to right.

Real linear combinations of Pauli words (`PauliSum`) represent Hermitian
operators; `decompose` inverts `PauliSum.to_matrix` using the orthogonality
tr(sigma_v sigma_u) = 2^n delta_{v,u}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _product
from typing import Iterable, Iterator

import numpy as np

PauliWord = tuple[int, ...]

PAULI_1Q = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def validate_word(word: Iterable[int], n: int | None = None) -> PauliWord:
    """Normalize `word` to a tuple and check every entry is in {0,1,2,3}.

    If `n` is given the word must have exactly that length.
    """
    w = tuple(int(x) for x in word)
    if len(w) < 1:
        raise ValueError("Pauli word must have length >= 1")
    if n is not None and len(w) != n:
        raise ValueError(f"Pauli word {w} has length {len(w)}, expected {n}")
    if any(x not in (0, 1, 2, 3) for x in w):
        raise ValueError(f"Pauli word entries must be in {{0,1,2,3}}, got {w}")
    return w


def all_words(n: int) -> Iterator[PauliWord]:
    """Iterate all 4^n Pauli words on n qubits in lexicographic order."""
    return _product(range(4), repeat=n)


def word_index(word: PauliWord) -> int:
    """Flat index of a word in the lexicographic enumeration of `all_words`."""
    idx = 0
    for x in word:
        idx = 4 * idx + x
    return idx


def pauli_matrix(word: Iterable[int]) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the Pauli word sigma_{w_1} x ... x sigma_{w_n}."""
    w = validate_word(word)
    out = PAULI_1Q[w[0]]
    for x in w[1:]:
        out = np.kron(out, PAULI_1Q[x])
    return out


def y_weight(word: Iterable[int]) -> int:
    """Number of Y factors in a Pauli word (entries equal to 2)."""
    return sum(1 for x in validate_word(word) if x == 2)


@dataclass
class PauliSum:
    """Real-coefficient linear combination of Pauli words on `n` qubits.

    Represents a Hermitian operator. Coefficients must be real and finite;
    keys must all have length `n`. Instances are treated as immutable after
    construction and are safe to share across workers.
    """

    n: int
    terms: dict[PauliWord, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("qubit count must be >= 1")
        clean: dict[PauliWord, float] = {}
        for word, coeff in self.terms.items():
            w = validate_word(word, self.n)
            c = float(coeff)
            if not np.isfinite(c):
                raise ValueError(f"coefficient for {w} is not finite: {coeff}")
            if c != 0.0:
                clean[w] = c
        self.terms = clean

    @property
    def dim(self) -> int:
        return 2**self.n

    def coefficient(self, word: Iterable[int]) -> float:
        return self.terms.get(validate_word(word, self.n), 0.0)

    def to_matrix(self) -> np.ndarray:
        """Dense Hermitian matrix sum_v c_v sigma_v."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for word, coeff in self.terms.items():
            out += coeff * pauli_matrix(word)
        return out

    def traceless(self) -> "PauliSum":
        """Same sum with the identity word removed (the traceless part)."""
        identity = (0,) * self.n
        return PauliSum(self.n, {w: c for w, c in self.terms.items() if w != identity})

    def identity_coefficient(self) -> float:
        return self.terms.get((0,) * self.n, 0.0)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.n, {w: factor * c for w, c in self.terms.items()})

    def to_json_dict(self) -> dict:
        """JSON form: {"n": int, "terms": [{"v": [ints], "c": float}]}."""
        items = sorted(self.terms.items(), key=lambda kv: word_index(kv[0]))
        return {"n": self.n, "terms": [{"v": list(w), "c": c} for w, c in items]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "PauliSum":
        n = int(data["n"])
        terms = {validate_word(t["v"], n): float(t["c"]) for t in data["terms"]}
        return cls(n, terms)


def decompose(matrix: np.ndarray, atol: float = 1e-10) -> PauliSum:
    """Decompose a Hermitian matrix into a PauliSum with c_v = tr(sigma_v H) / 2^n.

    Rejects non-Hermitian input (checked entrywise to `atol`, with the maximum
    asymmetry in the diagnostic). Imaginary residue below `atol` on the
    coefficients is discarded after the check passes.
    """
    h = np.asarray(matrix, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    d = h.shape[0]
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError(f"matrix dimension {d} is not a power of two")
    asym = np.max(np.abs(h - h.conj().T))
    if asym > atol:
        raise ValueError(
            f"matrix is not Hermitian: max |H - H^dag| = {asym:.3e} exceeds {atol:.1e}"
        )
    terms: dict[PauliWord, float] = {}
    scale = 1.0 / d
    for word in all_words(n):
        c = np.trace(pauli_matrix(word) @ h) * scale
        if abs(c.imag) > atol:
            raise ValueError(
                f"coefficient for {word} has imaginary part {c.imag:.3e} beyond {atol:.1e}"
            )
        if c.real != 0.0:
            terms[word] = c.real
    return PauliSum(n, terms)


def pauli_twirl(matrix: np.ndarray) -> np.ndarray:
    """Average sigma_u M sigma_u over all 4^n Pauli words, by the explicit sum.

    Equals (tr(M)/2^n) I. The summation is deliberate: this function exists to
    exercise the identity, so it must not take the trace shortcut.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError(f"matrix dimension {d} is not a power of two")
    acc = np.zeros_like(m)
    for word in all_words(n):
        sigma = pauli_matrix(word)
        acc += sigma @ m @ sigma
    return acc / 4**n

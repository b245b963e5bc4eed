"""Weighted-conjugation maps g(H) = sum_j h_j U_j H U_j^dag.

These maps (positive weights, unitary conjugations) are exactly the
Hamiltonian transformations a randomized product of conjugated evolutions can
simulate; they are closed under composition, with weights multiplying and
unitaries concatenating over the Cartesian product of indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ClassTMap:
    """A weighted set {(h_j, U_j)} defining H -> sum_j h_j U_j H U_j^dag."""

    elements: list[tuple[float, np.ndarray]]

    def __post_init__(self) -> None:
        if not self.elements:
            raise ValueError("map needs at least one element")
        checked = []
        for h, u in self.elements:
            h = float(h)
            if h <= 0:
                raise ValueError(f"weights must be positive, got {h}")
            u = np.asarray(u, dtype=complex)
            dev = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
            if dev > 1e-10:
                raise ValueError(f"element is not unitary (deviation {dev:.3e})")
            checked.append((h, u))
        self.elements = checked

    @property
    def total_weight(self) -> float:
        return sum(h for h, _ in self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0][1].shape[0]

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Weights and unitaries as arrays, for vectorized evaluation."""
        weights = np.array([h for h, _ in self.elements])
        unitaries = np.stack([u for _, u in self.elements])
        return weights, unitaries

    def apply(self, hermitian: np.ndarray) -> np.ndarray:
        """Evaluate sum_j h_j U_j H U_j^dag."""
        h = np.asarray(hermitian, dtype=complex)
        if h.shape != (self.dim, self.dim):
            raise ValueError(f"operator shape {h.shape} does not match map dimension {self.dim}")
        weights, unitaries = self.stacked()
        conjugated = unitaries @ h @ unitaries.conj().transpose(0, 2, 1)
        return np.einsum("j,jab->ab", weights, conjugated)


def compose(after: ClassTMap, before: ClassTMap, max_elements: int = 1 << 20) -> ClassTMap:
    """Composition `after` o `before` over the Cartesian product of indices.

    The result has |after| * |before| elements with multiplied weights and
    multiplied unitaries; its total weight is the product of the factors'.
    """
    size = len(after.elements) * len(before.elements)
    if size > max_elements:
        raise ValueError(f"composition would have {size} elements, above the budget {max_elements}")
    elements = [
        (h2 * h1, u2 @ u1) for h2, u2 in after.elements for h1, u1 in before.elements
    ]
    return ClassTMap(elements)

"""Simulation of universal linear transformations of black-box Hamiltonian dynamics.

Given only forward queries e^{-iH tau} (tau > 0) to an unknown Hamiltonian
with a known spectral-range bound, the engine simulates e^{-if(H)t} for any
Hermitian-preserving linear map f with f(I) = 0, described by its sparse
Pauli transfer matrix. The package also carries exact verification oracles,
error/variance metrics, a robust-phase-estimation learner for single Pauli
coefficients, and a block-encoding helper, all behind a reproducible CLI.
"""

__version__ = "0.1.0"

"""
Built-in demo models, emitted as ordinary config documents so every number
they produce can be reproduced from a file.
"""

from typing import Callable, Dict

import numpy as np

from .config import encode_matrix, encode_vector
from .numkernel import kron

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PSI_UP = np.array([1, 0], dtype=complex)


def _base(dQ: int, dB: int, hamiltonian: np.ndarray, dynamics: dict) -> dict:
    return {
        'shape': {'dQ': dQ, 'dB': dB},
        'beta': 1.0,
        'hamiltonian': encode_matrix(hamiltonian),
        'dynamics': dynamics,
        'preparation': {'kind': 'replacement', 'psi': encode_vector(PSI_UP)},
        'psi': encode_vector(PSI_UP),
        'time_grid': {'points': 200, 'spacing': 'log'},
    }


def depolarizing() -> dict:
    """
    Tracial product model: depolarizing on Q at rate 1 and on B at rate 2.
    The slowest centred mode is the Q one, so lambda = 1 and the fidelity
    is exactly 1/2 + exp(-t)/2.
    """
    return _base(2, 2, np.zeros((4, 4)),
                 {'kind': 'depolarizing', 'gamma_q': 1.0, 'gamma_b': 2.0})


def davies_1q(g: float = 1.0) -> dict:
    """One thermal qubit (no syndrome factor) coupled through sigma_x; lambda = g/2."""
    return _base(2, 1, SIGMA_Z, {
        'kind': 'davies',
        'couplings': [encode_matrix(SIGMA_X)],
        'rate_family': {'kind': 'fermi', 'g': g},
    })


def davies_2q(g: float = 1.0) -> dict:
    hamiltonian = kron(SIGMA_Z, IDENTITY_2) + 0.5 * kron(IDENTITY_2, SIGMA_Z)
    return _base(2, 2, hamiltonian, {
        'kind': 'davies',
        'couplings': [encode_matrix(kron(SIGMA_X, IDENTITY_2)),
                      encode_matrix(kron(IDENTITY_2, SIGMA_X))],
        'rate_family': {'kind': 'fermi', 'g': g},
    })


def ising_chain(spins: int = 3, field: float = 1.0) -> np.ndarray:
    """Open transverse-field Ising chain -sum Z_i Z_i+1 - field * sum X_i."""
    def site(op, i):
        return kron(*[op if j == i else IDENTITY_2 for j in range(spins)])

    h = np.zeros((2 ** spins, 2 ** spins), dtype=complex)
    for i in range(spins - 1):
        h -= site(SIGMA_Z, i) @ site(SIGMA_Z, i + 1)
    for i in range(spins):
        h -= field * site(SIGMA_X, i)
    return h


def unitary_chain() -> dict:
    """Three-spin Ising chain under its own modular flow; the first spin is Q."""
    return _base(2, 4, ising_chain(3), {'kind': 'unitary'})


DEMOS: Dict[str, Callable[[], dict]] = {
    'depolarizing': depolarizing,
    'davies-1q': davies_1q,
    'davies-2q': davies_2q,
    'unitary-chain': unitary_chain,
}

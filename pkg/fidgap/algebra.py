"""
The bipartite algebra A = Q (x) B, its faithful Gibbs reference state and the
GNS geometry built on it.

The reference state is stored through its modular Hamiltonian K (inverse
temperature already absorbed, so beta = 1 internally):

    omega = exp(-K) / tr exp(-K)
    tau_z(a) = exp(izK) a exp(-izK)          (modular flow, complex z allowed)
    <x, y>_omega = omega(x^dagger y) = tr(omega x^dagger y)

In finite dimension every element is analytic for the flow, so imaginary
times need no extra hypothesis. The GNS embedding x -> vec(x omega^1/2) turns
<x, y>_omega into the standard inner product on C^(n*n).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .conf import FAITHFUL_TOL
from .exceptions import DimensionMismatch, NotFaithful, SingularInput
from .numkernel import (
    CMatrix, as_cmatrix, dagger, frobenius, herm_eig, kron, logm_pd,
    partial_trace_B, partial_trace_Q, unvec, vec,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlgebraShape:
    """Dimensions of the encoded-qubit factor Q and the syndrome factor B."""
    dQ: int
    dB: int

    def __post_init__(self):
        if int(self.dQ) != self.dQ or self.dQ < 2:
            raise DimensionMismatch(f'dQ must be an integer >= 2, got {self.dQ}')
        if int(self.dB) != self.dB or self.dB < 1:
            raise DimensionMismatch(f'dB must be an integer >= 1, got {self.dB}')

    @property
    def n(self) -> int:
        return self.dQ * self.dB

    def to_dict(self) -> dict:
        return {'dQ': self.dQ, 'dB': self.dB}


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """
    Faithful Gibbs state omega = exp(-K)/Z together with its cached square
    roots and the spectral data of K used by the modular flow.
    """
    shape: AlgebraShape
    K: CMatrix
    omega: CMatrix
    omega_half: CMatrix
    omega_inv_half: CMatrix
    k_eigenvalues: np.ndarray
    k_eigenvectors: CMatrix
    faithful_tol: float = FAITHFUL_TOL
    warnings: list = field(default_factory=list)

    @classmethod
    def from_hamiltonian(cls, shape: AlgebraShape, hamiltonian, beta: float = 1.0,
                         faithful_tol: float = FAITHFUL_TOL) -> 'ReferenceState':
        """
        Build omega from a Hamiltonian H at inverse temperature beta; K = beta*H.
        Raises NotFaithful when the smallest Gibbs weight falls below
        faithful_tol times the largest.
        """
        h = as_cmatrix(hamiltonian, shape.n, shape.n)
        if beta <= 0:
            raise ValueError(f'beta must be positive, got {beta}')
        K = beta * 0.5 * (h + dagger(h))
        eigenvalues, u = herm_eig(K)
        # Shift by the ground energy so the largest weight is exactly 1.
        weights = np.exp(-(eigenvalues - eigenvalues[0]))
        ratio = weights[-1] / weights[0]
        if ratio < faithful_tol:
            raise NotFaithful(
                f'reference state is not faithful: smallest/largest Gibbs weight '
                f'{ratio:.3e} < {faithful_tol:.1e}')
        probabilities = weights / weights.sum()
        omega = (u * probabilities) @ dagger(u)
        omega_half = (u * np.sqrt(probabilities)) @ dagger(u)
        omega_inv_half = (u * probabilities ** -0.5) @ dagger(u)

        state = cls(shape=shape, K=K, omega=omega, omega_half=omega_half,
                    omega_inv_half=omega_inv_half, k_eigenvalues=eigenvalues,
                    k_eigenvectors=u, faithful_tol=faithful_tol)
        residual = frobenius(K @ omega - omega @ K)
        logger.debug('reference state n=%d, [K, omega] residual %.2e, '
                     'min Gibbs weight ratio %.3e', shape.n, residual, ratio)
        if residual > 1e-12 * max(frobenius(K), 1.0):
            state.warnings.append(f'[K, omega] residual {residual:.3e} above 1e-12')
        return state

    @classmethod
    def from_density(cls, shape: AlgebraShape, omega,
                     faithful_tol: float = FAITHFUL_TOL) -> 'ReferenceState':
        """Build the state from a strictly positive density matrix, K = -ln omega."""
        rho = as_cmatrix(omega, shape.n, shape.n)
        rho = rho / np.trace(rho).real
        try:
            K = -logm_pd(rho, pos_tol=faithful_tol)
        except SingularInput as exc:
            raise NotFaithful(f'density matrix is not strictly positive: {exc}') from exc
        return cls.from_hamiltonian(shape, K, 1.0, faithful_tol)

    @property
    def n(self) -> int:
        return self.shape.n

    def expect(self, x: CMatrix) -> complex:
        """omega(x) = tr(omega x)."""
        return complex(np.einsum('ij,ji->', self.omega, x))

    @cached_property
    def omega_B(self) -> CMatrix:
        return partial_trace_Q(self.omega, self.shape.dQ, self.shape.dB)

    @cached_property
    def gns(self) -> 'GnsSpace':
        return GnsSpace(self)


def embed_Q(q, shape: AlgebraShape) -> CMatrix:
    """q -> q (x) 1_B."""
    q = np.asarray(q, dtype=complex)
    if q.shape != (shape.dQ, shape.dQ):
        raise DimensionMismatch(
            f'expected a {shape.dQ}x{shape.dQ} element of Q, got {q.shape}')
    return kron(q, np.eye(shape.dB))


def restrict_to_Q(state: ReferenceState) -> CMatrix:
    """
    Density matrix omega_Q of the restriction of omega to Q.
    Raises NotFaithful when omega_Q is not strictly positive.
    """
    omega_q = partial_trace_B(state.omega, state.shape.dQ, state.shape.dB)
    omega_q = 0.5 * (omega_q + dagger(omega_q))
    eigenvalues = np.linalg.eigvalsh(omega_q)
    if eigenvalues[0] < state.faithful_tol * eigenvalues[-1]:
        raise NotFaithful(f'restriction of omega to Q has eigenvalue {eigenvalues[0]:.3e}')
    return omega_q


def _check_square(x: CMatrix, n: int, what: str) -> None:
    if x.shape != (n, n):
        raise DimensionMismatch(f'{what} must be {n}x{n}, got {x.shape}')


def gns_inner(x: CMatrix, y: CMatrix, ref: ReferenceState) -> complex:
    """<x, y>_omega = omega(x^dagger y)."""
    _check_square(x, ref.n, 'x')
    _check_square(y, ref.n, 'y')
    return complex(np.einsum('ij,jk,ki->', ref.omega, dagger(x), y))


def gns_norm(x: CMatrix, ref: ReferenceState) -> float:
    return float(np.sqrt(max(gns_inner(x, x, ref).real, 0.0)))


def modular_flow(a: CMatrix, z: complex, ref: ReferenceState) -> CMatrix:
    """
    tau_z(a) = exp(izK) a exp(-izK), evaluated in the eigenbasis of K so that
    real and imaginary z share one code path.
    """
    _check_square(a, ref.n, 'observable')
    if z == 0:
        return np.array(a, dtype=complex)
    u = ref.k_eigenvectors
    e = ref.k_eigenvalues
    phases = np.exp(1j * z * (e[:, None] - e[None, :]))
    return u @ ((dagger(u) @ a @ u) * phases) @ dagger(u)


def kms_check(A: CMatrix, B: CMatrix, ref: ReferenceState) -> float:
    """
    Residual |omega(A tau_i(B)) - omega(B A)| of the KMS boundary condition
    at inverse temperature 1.
    """
    lhs = ref.expect(A @ modular_flow(B, 1j, ref))
    rhs = ref.expect(B @ A)
    return float(abs(lhs - rhs))


class GnsSpace:
    """
    The GNS Hilbert space H_omega realised as C^(n*n) through
    x -> vec(x omega^1/2). The unit vector u = vec(omega^1/2) is the image of 1.
    """

    def __init__(self, reference: ReferenceState):
        self.reference = reference
        self.dimension = reference.n ** 2

    def embed(self, x: CMatrix) -> np.ndarray:
        return vec(x @ self.reference.omega_half)

    def unembed(self, v: np.ndarray) -> CMatrix:
        return unvec(v) @ self.reference.omega_inv_half

    @cached_property
    def unit(self) -> np.ndarray:
        return vec(self.reference.omega_half)

    @cached_property
    def right_factor(self) -> CMatrix:
        """Superoperator matrix of X -> X omega^1/2 (vec(X) -> vec(X omega^1/2))."""
        return np.kron(np.eye(self.reference.n), self.reference.omega_half.T)

    @cached_property
    def right_factor_inverse(self) -> CMatrix:
        return np.kron(np.eye(self.reference.n), self.reference.omega_inv_half.T)

    def represent(self, superoperator: CMatrix) -> CMatrix:
        """
        Matrix M acting on GNS vectors, vec(S(x) omega^1/2) = M vec(x omega^1/2),
        for a superoperator S given on row-major vec(x).
        """
        return self.right_factor @ superoperator @ self.right_factor_inverse

    def isometry_residual(self, x: CMatrix, y: CMatrix) -> float:
        """|<x, y>_omega - <embed(x), embed(y)>| for one pair of observables."""
        standard = complex(np.vdot(self.embed(x), self.embed(y)))
        return float(abs(gns_inner(x, y, self.reference) - standard))


def modular_trivial_on_Q_residual(ref: ReferenceState) -> float:
    """
    Largest ||[K, q (x) 1]||_F over the matrix units q of Q. Zero exactly when
    tau_{i beta}(q) = q for every q in Q.
    """
    d = ref.shape.dQ
    worst = 0.0
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            q = embed_Q(unit, ref.shape)
            worst = max(worst, frobenius(ref.K @ q - q @ ref.K))
    return worst


def tracial_on_Q(ref: ReferenceState, tol: float = 1e-10) -> bool:
    return modular_trivial_on_Q_residual(ref) <= tol * max(frobenius(ref.K), 1.0)

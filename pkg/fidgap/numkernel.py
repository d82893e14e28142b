"""
Dense complex-matrix kernel.

Every operator in the toolkit (observables, density matrices, Kraus elements,
Hamiltonians) is a square complex128 numpy array. Superoperators act on the
row-major vectorization vec(X) = X.reshape(-1), for which

    vec(A X B) = kron(A, B.T) vec(X).

Matrix functions are evaluated through the Hermitian eigendecomposition only;
every f(m) the toolkit needs has a Hermitian argument.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg as la

from .conf import HERMITIAN_TOL, POSITIVITY_TOL
from .exceptions import DimensionMismatch, NoConvergence, NotHermitian, SingularInput

logger = logging.getLogger(__name__)

CMatrix = np.ndarray


def as_cmatrix(data, rows: Optional[int] = None, cols: Optional[int] = None) -> CMatrix:
    """
    Coerce data to a 2-d complex128 array, optionally checking its shape.
    """
    m = np.array(data, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f'expected a matrix, got an array of rank {m.ndim}')
    if rows is not None and m.shape[0] != rows:
        raise DimensionMismatch(f'expected {rows} rows, got {m.shape[0]}')
    if cols is not None and m.shape[1] != cols:
        raise DimensionMismatch(f'expected {cols} columns, got {m.shape[1]}')
    return m


def dagger(m: CMatrix) -> CMatrix:
    return m.conj().T


def frobenius(m: CMatrix) -> float:
    return float(np.linalg.norm(m))


def operator_norm(m: CMatrix) -> float:
    """Largest singular value."""
    return float(la.svdvals(m)[0]) if m.size else 0.0


def hermiticity_residual(m: CMatrix) -> float:
    """Max-abs entry deviation of m - m^dagger."""
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def is_hermitian(m: CMatrix, tol: float = HERMITIAN_TOL) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    return hermiticity_residual(m) <= tol * max(frobenius(m), 1.0)


def is_psd(m: CMatrix, tol: float = POSITIVITY_TOL) -> bool:
    if not is_hermitian(m):
        return False
    eigenvalues = la.eigvalsh(0.5 * (m + dagger(m)))
    return eigenvalues[0] >= -tol * max(abs(eigenvalues[-1]), 1.0)


def is_unitary(m: CMatrix, tol: float = HERMITIAN_TOL) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    return frobenius(dagger(m) @ m - np.eye(m.shape[0])) <= tol * max(m.shape[0], 1)


def herm_eig(m: CMatrix, tol: float = HERMITIAN_TOL) -> Tuple[np.ndarray, CMatrix]:
    """
    Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix) with
    m = U diag(eigenvalues) U^dagger. Raises NotHermitian when m deviates from
    m^dagger by more than tol * ||m||, NoConvergence when LAPACK gives up.
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f'herm_eig needs a square matrix, got {m.shape}')
    residual = hermiticity_residual(m)
    if residual > tol * max(frobenius(m), 1.0):
        raise NotHermitian(f'matrix is not Hermitian (residual {residual:.3e})')
    try:
        eigenvalues, eigenvectors = la.eigh(0.5 * (m + dagger(m)))
    except la.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return eigenvalues, eigenvectors


def mat_func(m: CMatrix, f: Callable[[np.ndarray], np.ndarray],
             requires_positive: bool = False,
             pos_tol: float = POSITIVITY_TOL) -> CMatrix:
    """
    Apply a scalar function to a Hermitian matrix: U diag(f(eigenvalues)) U^dagger.

    With requires_positive (x^-1/2, log and friends) every eigenvalue must
    exceed pos_tol times the largest one, otherwise SingularInput is raised.
    """
    eigenvalues, u = herm_eig(m)
    if requires_positive and eigenvalues.size:
        floor = pos_tol * eigenvalues[-1]
        if eigenvalues[-1] <= 0 or eigenvalues[0] <= floor:
            raise SingularInput(
                f'eigenvalue {eigenvalues[0]:.3e} below positivity floor {floor:.3e}')
    values = np.asarray(f(eigenvalues), dtype=complex)
    return (u * values) @ dagger(u)


def expm_h(m: CMatrix, scale: complex = 1.0) -> CMatrix:
    """exp(scale * m) for Hermitian m."""
    return mat_func(m, lambda x: np.exp(scale * x))


def sqrtm_psd(m: CMatrix) -> CMatrix:
    # Round-off can push zero eigenvalues slightly negative.
    return mat_func(m, lambda x: np.sqrt(np.clip(x, 0.0, None)))


def inv_sqrtm(m: CMatrix, pos_tol: float = POSITIVITY_TOL) -> CMatrix:
    return mat_func(m, lambda x: x ** -0.5, requires_positive=True, pos_tol=pos_tol)


def logm_pd(m: CMatrix, pos_tol: float = POSITIVITY_TOL) -> CMatrix:
    return mat_func(m, np.log, requires_positive=True, pos_tol=pos_tol)


def kron(*matrices: CMatrix) -> CMatrix:
    result = np.ones((1, 1), dtype=complex)
    for m in matrices:
        result = np.kron(result, m)
    return result


def _check_bipartite(m: CMatrix, dQ: int, dB: int) -> None:
    n = dQ * dB
    if m.shape != (n, n):
        raise DimensionMismatch(
            f'expected a {n}x{n} matrix for dQ={dQ}, dB={dB}, got {m.shape}')


def partial_trace_B(m: CMatrix, dQ: int, dB: int) -> CMatrix:
    """Trace out the second tensor factor of a (dQ*dB) x (dQ*dB) matrix."""
    _check_bipartite(m, dQ, dB)
    return np.einsum('ibjb->ij', m.reshape(dQ, dB, dQ, dB))


def partial_trace_Q(m: CMatrix, dQ: int, dB: int) -> CMatrix:
    """Trace out the first tensor factor of a (dQ*dB) x (dQ*dB) matrix."""
    _check_bipartite(m, dQ, dB)
    return np.einsum('aiaj->ij', m.reshape(dQ, dB, dQ, dB))


def vec(m: CMatrix) -> np.ndarray:
    return np.ascontiguousarray(m).reshape(-1)


def unvec(v: np.ndarray) -> CMatrix:
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise DimensionMismatch(f'vector of length {v.size} is not a vectorized square matrix')
    return np.asarray(v).reshape(n, n)


def sprepost(a: CMatrix, b: CMatrix) -> CMatrix:
    """Superoperator matrix of X -> a X b."""
    return np.kron(a, b.T)


def matrix_unit(d: int, i: int, j: int) -> CMatrix:
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def projector(psi: np.ndarray) -> CMatrix:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def random_matrix(n: int, rng: np.random.Generator, scale: float = 1.0) -> CMatrix:
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> CMatrix:
    g = random_matrix(n, rng)
    h = 0.5 * (g + dagger(g))
    return scale * h / max(operator_norm(h), 1e-300)


def random_unitary(n: int, rng: np.random.Generator) -> CMatrix:
    q, r = np.linalg.qr(random_matrix(n, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_density(n: int, rng: np.random.Generator) -> CMatrix:
    g = random_matrix(n, rng)
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)

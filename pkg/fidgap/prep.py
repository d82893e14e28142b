"""
Preparation of the encoded-qubit initial state.

A preparation is a list of Kraus operators {a_j} acting on the reference
state. The perturbed state is

    omega'(b) = sum_j omega(a_j^dagger b a_j),  i.e.  omega' = sum_j a_j omega a_j^dagger

and the two centred observables entering the correlation formula are

    x = sum_j a_j tau_{i}(a_j^dagger) - 1,      y = P_psi - omega(P_psi).

Kinds:
- single: one element a with omega(a^dagger a) = 1, a = sigma^1/2 omega_Q^-1/2 in Q
- replacement: the operation q -> tr(sigma q) 1 with Kraus dyads in Q
- filtered: {sqrt(p) a, (1 - p a^dagger a)^1/2}, the filtered branch reproduces a
- custom: arbitrary n x n Kraus elements, nothing assumed about them
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .algebra import ReferenceState, embed_Q, modular_flow, restrict_to_Q
from .exceptions import DimensionMismatch, WeightTooLarge
from .numkernel import (
    CMatrix, as_cmatrix, dagger, frobenius, herm_eig, inv_sqrtm, is_psd,
    operator_norm, partial_trace_B, projector, sqrtm_psd,
)

logger = logging.getLogger(__name__)

PREPARATION_KINDS = ('single', 'replacement', 'filtered', 'custom')


@dataclass(frozen=True, eq=False)
class QubitTarget:
    """Target state on Q, either a pure vector psi or a density matrix sigma."""
    psi: Optional[np.ndarray] = None
    sigma: Optional[CMatrix] = None

    @classmethod
    def pure(cls, psi, tol: float = 1e-12) -> 'QubitTarget':
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > tol:
            raise ValueError(f'psi must be a unit vector, got norm {norm:.15g}')
        return cls(psi=psi)

    @classmethod
    def mixed(cls, sigma, tol: float = 1e-10) -> 'QubitTarget':
        sigma = as_cmatrix(sigma)
        if sigma.shape[0] != sigma.shape[1]:
            raise DimensionMismatch(f'sigma must be square, got {sigma.shape}')
        if not is_psd(sigma) or abs(np.trace(sigma) - 1.0) > tol:
            raise ValueError('sigma must be positive semidefinite with unit trace')
        return cls(sigma=sigma)

    @property
    def dimension(self) -> int:
        return self.psi.size if self.psi is not None else self.sigma.shape[0]

    @property
    def is_pure(self) -> bool:
        return self.psi is not None

    def density(self) -> CMatrix:
        return projector(self.psi) if self.psi is not None else self.sigma


@dataclass(frozen=True, eq=False)
class Preparation:
    kraus: List[CMatrix]
    kind: str
    target: Optional[QubitTarget] = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in PREPARATION_KINDS:
            raise ValueError(f'unknown preparation kind {self.kind!r}')
        if not self.kraus:
            raise ValueError('a preparation needs at least one Kraus element')

    def normalization_residual(self, ref: ReferenceState) -> float:
        """
        |omega(a^dagger a) - 1| for a single element, ||sum_j a_j^dagger a_j - 1||_F
        for operations.
        """
        if self.kind == 'single':
            a = self.kraus[0]
            return float(abs(ref.expect(dagger(a) @ a) - 1.0))
        total = sum(dagger(a) @ a for a in self.kraus)
        return frobenius(total - np.eye(ref.n))

    def restriction_residual(self, ref: ReferenceState) -> Optional[float]:
        """
        ||omega'|_Q - sigma||_F, or None for kinds without a target on Q.
        """
        if self.target is None:
            return None
        reduced = partial_trace_B(perturbed_state(self, ref), ref.shape.dQ, ref.shape.dB)
        return frobenius(reduced - self.target.density())

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'kraus_count': len(self.kraus),
                'warnings': list(self.warnings)}


def _check_target(target: QubitTarget, ref: ReferenceState) -> None:
    if target.dimension != ref.shape.dQ:
        raise DimensionMismatch(
            f'target lives in dimension {target.dimension}, Q has dimension {ref.shape.dQ}')


def single_perturbation(target: QubitTarget, ref: ReferenceState) -> Preparation:
    """
    One-element preparation a = sigma^1/2 omega_Q^-1/2, embedded in Q (x) 1.
    Satisfies omega(a^dagger q a) = tr(sigma q) for every q in Q.
    """
    _check_target(target, ref)
    omega_q = restrict_to_Q(ref)
    a_q = sqrtm_psd(target.density()) @ inv_sqrtm(omega_q)
    return Preparation(kraus=[embed_Q(a_q, ref.shape)], kind='single', target=target)


def replacement_operation(target: QubitTarget, ref: ReferenceState) -> Preparation:
    """
    Kraus set of the operation q -> tr(sigma q) 1.

    Pure sigma = |psi><psi| uses the dyads |psi><j|. Mixed sigma uses
    sqrt(p_k) |phi_k><j| over the eigenpairs (p_k > 0) of sigma.
    """
    _check_target(target, ref)
    d = ref.shape.dQ
    if target.is_pure:
        components = [(1.0, target.psi)]
    else:
        eigenvalues, eigenvectors = herm_eig(target.sigma)
        cutoff = 1e-14 * max(eigenvalues[-1], 1.0)
        components = [(float(p), eigenvectors[:, k])
                      for k, p in enumerate(eigenvalues) if p > cutoff]
    kraus = []
    for weight, phi in components:
        for j in range(d):
            dyad = np.zeros((d, d), dtype=complex)
            dyad[:, j] = np.sqrt(weight) * phi
            kraus.append(embed_Q(dyad, ref.shape))
    return Preparation(kraus=kraus, kind='replacement', target=target)


def filtered_preparation(a: CMatrix, p: float, ref: ReferenceState) -> Preparation:
    """
    Two-outcome operation {sqrt(p) a, (1 - p a^dagger a)^1/2}.

    Requires p * ||a^dagger a|| <= 1 (operator norm); raises WeightTooLarge
    otherwise. At the boundary p = 1/||a^dagger a|| the second element is
    singular but still a valid Kraus operator.
    """
    a = as_cmatrix(a, ref.n, ref.n)
    if not 0 < p <= 1:
        raise ValueError(f'weight p must lie in (0, 1], got {p}')
    ata = dagger(a) @ a
    load = p * operator_norm(ata)
    if load > 1.0 + 1e-12:
        raise WeightTooLarge(f'p * ||a^dagger a|| = {load:.6g} exceeds 1')
    a1 = np.sqrt(p) * a
    a2 = sqrtm_psd(np.eye(ref.n) - p * ata)
    return Preparation(kraus=[a1, a2], kind='filtered')


def custom_preparation(kraus: List[CMatrix], ref: ReferenceState,
                       target: Optional[QubitTarget] = None) -> Preparation:
    """Arbitrary Kraus list; the restriction property is checked, not assumed."""
    kraus = [as_cmatrix(k, ref.n, ref.n) for k in kraus]
    prep = Preparation(kraus=kraus, kind='custom', target=target)
    residual = prep.restriction_residual(ref)
    if residual is not None and residual > 1e-10:
        prep.warnings.append(
            f'custom preparation does not restrict to the target on Q (residual {residual:.3e})')
    return prep


def branch_state(prep: Preparation, j: int, ref: ReferenceState) -> CMatrix:
    """
    Post-selected state of outcome j: a_j omega a_j^dagger / omega(a_j^dagger a_j).
    """
    a = prep.kraus[j]
    weight = ref.expect(dagger(a) @ a).real
    if weight <= 0:
        raise ValueError(f'outcome {j} has zero probability')
    return a @ ref.omega @ dagger(a) / weight


def psi_projector(psi, ref: ReferenceState) -> CMatrix:
    """P_psi (x) 1_B."""
    return embed_Q(projector(psi), ref.shape)


def build_y(psi, ref: ReferenceState) -> CMatrix:
    """y = P_psi - omega(P_psi) 1."""
    p = psi_projector(psi, ref)
    return p - ref.expect(p).real * np.eye(ref.n)


def build_x(prep: Preparation, ref: ReferenceState) -> CMatrix:
    """x = sum_j a_j tau_i(a_j^dagger) - 1."""
    total = np.zeros((ref.n, ref.n), dtype=complex)
    for a in prep.kraus:
        total += a @ modular_flow(dagger(a), 1j, ref)
    return total - np.eye(ref.n)


def perturbed_state(prep: Preparation, ref: ReferenceState) -> CMatrix:
    """Density matrix omega' = sum_j a_j omega a_j^dagger."""
    rho = np.zeros((ref.n, ref.n), dtype=complex)
    for a in prep.kraus:
        rho += a @ ref.omega @ dagger(a)
    return rho


def is_perfect_pure_preparation(prep: Preparation, psi: Optional[np.ndarray] = None,
                                tol: float = 1e-10) -> bool:
    """
    Built-in single or replacement preparation of a pure target. With psi
    given, the target must also be psi up to a phase, |<target, psi>| = 1.
    """
    if prep.kind not in ('single', 'replacement') or prep.target is None:
        return False
    if not prep.target.is_pure:
        return False
    if psi is None:
        return True
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != prep.target.psi.shape:
        return False
    return bool(abs(abs(np.vdot(prep.target.psi, psi)) - 1.0) <= tol)

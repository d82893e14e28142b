"""
Heisenberg-picture dynamics on A = Q (x) B.

Three kinds of dynamics share one interface (DynamicsSpec):

- unitary: the modular flow tau_t(X) = exp(itK) X exp(-itK) of the reference
  state, the reversible case where the dynamics coincides with its MAG;
- map: a single-step CP unital map Lambda(X) = sum_j k_j^dagger X k_j,
  iterated floor(t) times;
- semigroup: Lambda_t = exp(tL) for a Lindblad generator
  L(X) = i[H_c, X] + sum_V gamma_V (V^dagger X V - 1/2 {V^dagger V, X}).

Superoperators are dense matrices on the row-major vec(X) (see numkernel).
Davies generators are built from the Bohr-frequency components of coupling
operators with KMS-consistent rates gamma(-nu) = exp(-nu) gamma(nu); their
dissipative part is GNS self-adjoint and commutes with the modular flow.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from .algebra import ReferenceState, embed_Q, modular_flow, restrict_to_Q
from .conf import BINNING_TOL, DETAILED_BALANCE_TOL
from .exceptions import (
    DegenerateBinning, DimensionMismatch, NegativeTime, NotHermitian,
    RateFamilyError, UnsupportedAssignment,
)
from .numkernel import (
    CMatrix, as_cmatrix, dagger, frobenius, inv_sqrtm, is_hermitian,
    matrix_unit, operator_norm, partial_trace_B, sprepost, sqrtm_psd, unvec, vec,
)
from .prep import Preparation

logger = logging.getLogger(__name__)

DYNAMICS_KINDS = ('unitary', 'map', 'semigroup')


def kraus_superoperator(kraus: Sequence[CMatrix]) -> CMatrix:
    """Heisenberg superoperator of X -> sum_k k^dagger X k."""
    n = kraus[0].shape[0]
    s = np.zeros((n * n, n * n), dtype=complex)
    for k in kraus:
        s += sprepost(dagger(k), k)
    return s


@dataclass(frozen=True, eq=False)
class CpMap:
    """
    CP map in Heisenberg picture, Lambda(b) = sum_j k_j^dagger b k_j.
    `unital` and `omega_invariant` are computed by from_kraus, not trusted.
    """
    kraus: List[CMatrix]
    unital: bool = False
    omega_invariant: bool = False

    @classmethod
    def from_kraus(cls, kraus: Sequence[CMatrix], ref: Optional[ReferenceState] = None,
                   tol: float = 1e-10) -> 'CpMap':
        if not kraus:
            raise ValueError('a CP map needs at least one Kraus operator')
        n = kraus[0].shape[0]
        kraus = [as_cmatrix(k, n, n) for k in kraus]
        candidate = cls(kraus=kraus)
        unital = candidate.unital_residual() <= tol
        invariant = ref is not None and candidate.invariance_residual(ref) <= tol
        if not unital:
            logger.warning('Kraus map is not identity preserving (residual %.3e)',
                           candidate.unital_residual())
        return cls(kraus=kraus, unital=unital, omega_invariant=invariant)

    @property
    def dimension(self) -> int:
        return self.kraus[0].shape[0]

    def apply(self, x: CMatrix) -> CMatrix:
        return sum(dagger(k) @ x @ k for k in self.kraus)

    def apply_dual(self, rho: CMatrix) -> CMatrix:
        """Schroedinger picture: rho -> sum_j k_j rho k_j^dagger."""
        return sum(k @ rho @ dagger(k) for k in self.kraus)

    @cached_property
    def superoperator(self) -> CMatrix:
        return kraus_superoperator(self.kraus)

    def unital_residual(self) -> float:
        total = sum(dagger(k) @ k for k in self.kraus)
        return frobenius(total - np.eye(self.dimension))

    def invariance_residual(self, ref: ReferenceState) -> float:
        """||omega o Lambda - omega|| as the density-matrix distance."""
        return frobenius(self.apply_dual(ref.omega) - ref.omega)


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    """
    Heisenberg generator L(X) = i[H_c, X] + sum gamma (V^dagger X V - 1/2 {V^dagger V, X}).
    `jumps` is a list of (V, gamma) pairs with gamma >= 0.
    """
    hamiltonian: CMatrix
    jumps: List[Tuple[CMatrix, float]] = field(default_factory=list)
    label: str = 'lindblad'

    def __post_init__(self):
        n = self.hamiltonian.shape[0]
        if not is_hermitian(self.hamiltonian):
            raise NotHermitian('Hamiltonian part of the generator is not Hermitian')
        for v, rate in self.jumps:
            if v.shape != (n, n):
                raise DimensionMismatch(f'jump operator of shape {v.shape} in dimension {n}')
            if rate < 0:
                raise ValueError(f'jump rates must be non-negative, got {rate}')

    @property
    def dimension(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, x: CMatrix) -> CMatrix:
        h = self.hamiltonian
        out = 1j * (h @ x - x @ h)
        for v, rate in self.jumps:
            vv = dagger(v) @ v
            out += rate * (dagger(v) @ x @ v - 0.5 * (vv @ x + x @ vv))
        return out

    @cached_property
    def superoperator(self) -> CMatrix:
        n = self.dimension
        eye = np.eye(n)
        h = self.hamiltonian
        s = 1j * (sprepost(h, eye) - sprepost(eye, h))
        for v, rate in self.jumps:
            vv = dagger(v) @ v
            s += rate * (sprepost(dagger(v), v) - 0.5 * sprepost(vv, eye)
                         - 0.5 * sprepost(eye, vv))
        return s

    def dissipative_part(self) -> 'LindbladGenerator':
        return LindbladGenerator(np.zeros_like(self.hamiltonian), list(self.jumps),
                                 label=f'{self.label}-dissipative')

    def coherent_part(self) -> 'LindbladGenerator':
        return LindbladGenerator(self.hamiltonian, [], label=f'{self.label}-coherent')

    def unit_residual(self) -> float:
        """||L(1)||_F, zero for identity-preserving semigroups."""
        return frobenius(self.apply(np.eye(self.dimension)))

    def invariance_residual(self, ref: ReferenceState) -> float:
        """||L*(omega)||_F; zero exactly when omega is invariant under exp(tL)."""
        return float(np.linalg.norm(dagger(self.superoperator) @ vec(ref.omega)))

    def propagator(self, t: float) -> CMatrix:
        return la.expm(t * self.superoperator)


def modular_generator(ref: ReferenceState) -> LindbladGenerator:
    """delta_K(X) = i[K, X], the generator of the modular flow."""
    return LindbladGenerator(ref.K, [], label='modular')


# Choi matrices and Kraus decompositions

def choi_matrix(superoperator: CMatrix) -> CMatrix:
    """
    Choi matrix sum_ij E_ij (x) Phi(E_ij) of the Schroedinger dual Phi of a
    Heisenberg superoperator.
    """
    n = int(round(np.sqrt(superoperator.shape[0])))
    dual = dagger(superoperator)
    return dual.reshape(n, n, n, n).transpose(2, 0, 3, 1).reshape(n * n, n * n)


def is_completely_positive(superoperator: CMatrix, tol: float = 1e-9) -> Tuple[bool, float]:
    """Returns (passed, smallest Choi eigenvalue relative to the largest)."""
    c = choi_matrix(superoperator)
    eigenvalues = la.eigvalsh(0.5 * (c + dagger(c)))
    relative = eigenvalues[0] / max(abs(eigenvalues[-1]), 1e-300)
    return bool(relative >= -tol), float(relative)


def kraus_from_superoperator(superoperator: CMatrix, tol: float = 1e-12) -> List[CMatrix]:
    """
    Kraus operators k with Lambda(X) = sum k^dagger X k, read off the
    eigendecomposition of the Choi matrix.
    """
    n = int(round(np.sqrt(superoperator.shape[0])))
    c = choi_matrix(superoperator)
    eigenvalues, eigenvectors = la.eigh(0.5 * (c + dagger(c)))
    cutoff = tol * max(abs(eigenvalues[-1]), 1.0)
    return [np.sqrt(value) * eigenvectors[:, k].reshape(n, n).T
            for k, value in enumerate(eigenvalues) if value > cutoff]


def semigroup_is_cp(generator: LindbladGenerator, times: Sequence[float] = (0.1, 1.0),
                    tol: float = 1e-9) -> Tuple[bool, float]:
    worst = np.inf
    for t in times:
        _, relative = is_completely_positive(generator.propagator(t), tol)
        worst = min(worst, relative)
    return bool(worst >= -tol), float(worst)


# Davies generators

@dataclass(frozen=True)
class RateFamily:
    """
    KMS-consistent bath rate family, gamma(-nu) = exp(-nu) gamma(nu).

    fermi:       gamma(nu) = g / (1 + exp(-nu))
    metropolis:  gamma(nu) = g * min(1, exp(nu))
    """
    kind: str = 'fermi'
    g: float = 1.0

    def __post_init__(self):
        if self.kind not in ('fermi', 'metropolis'):
            raise ValueError(f'unknown rate family {self.kind!r}')
        if self.g < 0:
            raise ValueError(f'rate scale g must be non-negative, got {self.g}')

    def __call__(self, nu: float) -> float:
        if self.kind == 'fermi':
            # Written to avoid overflow for large |nu|.
            if nu >= 0:
                return self.g / (1.0 + math.exp(-nu))
            return self.g * math.exp(nu) / (1.0 + math.exp(nu))
        return self.g if nu >= 0 else self.g * math.exp(nu)

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'g': self.g}


def energy_levels(ref: ReferenceState, tol: float = BINNING_TOL) -> List[Tuple[float, CMatrix]]:
    """Distinct eigenvalues of K (clustered at tol * ||K||) with their projectors."""
    e = ref.k_eigenvalues
    u = ref.k_eigenvectors
    scale = tol * max(operator_norm(ref.K), 1.0)
    levels = []
    start = 0
    for i in range(1, len(e) + 1):
        if i == len(e) or e[i] - e[i - 1] > scale:
            block = u[:, start:i]
            levels.append((float(np.mean(e[start:i])), block @ dagger(block)))
            start = i
    return levels


def bin_frequencies(values: Sequence[float], tol: float) -> List[List[int]]:
    """
    Group frequencies whose consecutive differences stay within tol. Raises
    DegenerateBinning when a group spreads wider than tol, i.e. the values
    cannot be separated unambiguously.
    """
    order = np.argsort(values, kind='stable')
    groups: List[List[int]] = []
    for idx in order:
        if groups and values[idx] - values[groups[-1][-1]] <= tol:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    for group in groups:
        spread = values[group[-1]] - values[group[0]]
        if spread > tol:
            raise DegenerateBinning(
                f'Bohr frequencies near {values[group[0]]:.12g} spread over {spread:.3e} '
                f'> binning tolerance {tol:.1e}')
    return groups


def check_rate_family(rate_fn: Callable[[float], float], frequencies: Sequence[float],
                      tol: float = 1e-12) -> None:
    for nu in frequencies:
        forward, backward = rate_fn(nu), rate_fn(-nu)
        if forward < 0 or backward < 0:
            raise RateFamilyError(f'negative rate at nu={nu:.6g}')
        expected = math.exp(-nu) * forward
        if abs(backward - expected) > tol * max(backward, expected, 1e-300):
            raise RateFamilyError(
                f'rate family violates the KMS relation at nu={nu:.6g}: '
                f'gamma(-nu)={backward:.12g}, exp(-nu) gamma(nu)={expected:.12g}')


def davies_generator(ref: ReferenceState, couplings: Sequence[CMatrix],
                     rate_fn: Optional[Callable[[float], float]] = None,
                     bin_tol: float = BINNING_TOL) -> LindbladGenerator:
    """
    Davies generator of the reference state for Hermitian couplings S.

    Jumps are the Fourier components S(nu) = sum_{e' - e = nu} P_e S P_e' over
    the eigenprojections of K, each with rate gamma(nu). S(nu) lowers K by nu.
    The Hamiltonian part is K itself, so Lambda_t = tau_t o exp(t L_dis).
    """
    rate_fn = rate_fn or RateFamily()
    levels = energy_levels(ref, bin_tol)
    pairs = [(p_low, p_high, e_high - e_low)
             for e_low, p_low in levels for e_high, p_high in levels]
    frequencies = np.array([nu for _, _, nu in pairs])
    groups = bin_frequencies(frequencies, bin_tol * max(operator_norm(ref.K), 1.0))
    representatives = [float(np.mean(frequencies[g])) for g in groups]
    check_rate_family(rate_fn, representatives)

    jumps = []
    for s in couplings:
        s = as_cmatrix(s, ref.n, ref.n)
        if not is_hermitian(s):
            raise NotHermitian('Davies couplings must be Hermitian')
        for group, nu in zip(groups, representatives):
            component = sum(pairs[i][0] @ s @ pairs[i][1] for i in group)
            rate = rate_fn(nu)
            if frobenius(component) > 1e-13 * max(frobenius(s), 1.0) and rate > 0:
                jumps.append((component, rate))
    logger.debug('Davies generator: %d levels, %d Bohr frequencies, %d jumps',
                 len(levels), len(groups), len(jumps))
    return LindbladGenerator(ref.K.copy(), jumps, label='davies')


def depolarizing_generator(ref: ReferenceState, gamma_q: float,
                           gamma_b: float = 0.0) -> LindbladGenerator:
    """
    Depolarizing flow on Q, L(X) = gamma_q (tr_Q(X)/dQ (x) 1 - X), built from the
    matrix-unit jumps E_ij (x) 1 at rate gamma_q/dQ; optionally the same on B.
    """
    dQ, dB = ref.shape.dQ, ref.shape.dB
    jumps = [(embed_Q(matrix_unit(dQ, i, j), ref.shape), gamma_q / dQ)
             for i in range(dQ) for j in range(dQ)]
    if gamma_b and dB > 1:
        jumps += [(np.kron(np.eye(dQ), matrix_unit(dB, i, j)), gamma_b / dB)
                  for i in range(dB) for j in range(dB)]
    return LindbladGenerator(np.zeros((ref.n, ref.n), dtype=complex), jumps,
                             label='depolarizing')


# Unified dynamics

@dataclass(frozen=True, eq=False)
class DynamicsSpec:
    """
    One of: unitary (modular flow of `reference`), map (CpMap iterated floor(t)
    times), semigroup (exp(t L) of `generator`).
    """
    kind: str
    reference: ReferenceState
    cp_map: Optional[CpMap] = None
    generator: Optional[LindbladGenerator] = None

    def __post_init__(self):
        if self.kind not in DYNAMICS_KINDS:
            raise ValueError(f'unknown dynamics kind {self.kind!r}')
        if self.kind == 'map' and self.cp_map is None:
            raise ValueError('map dynamics needs a CpMap')
        if self.kind == 'semigroup' and self.generator is None:
            raise ValueError('semigroup dynamics needs a generator')

    @classmethod
    def unitary(cls, ref: ReferenceState) -> 'DynamicsSpec':
        return cls('unitary', ref)

    @classmethod
    def from_map(cls, cp_map: CpMap, ref: ReferenceState) -> 'DynamicsSpec':
        return cls('map', ref, cp_map=cp_map)

    @classmethod
    def semigroup(cls, generator: LindbladGenerator, ref: ReferenceState) -> 'DynamicsSpec':
        return cls('semigroup', ref, generator=generator)

    def check_time(self, t: float) -> None:
        if self.kind != 'unitary' and t < 0:
            raise NegativeTime(f'{self.kind} dynamics is defined for t >= 0, got {t}')

    def effective_time(self, t: float) -> float:
        """Number of steps for maps, t otherwise."""
        if self.kind == 'map':
            return float(math.floor(t + 1e-9))
        return t

    def steps(self, t: float) -> int:
        return int(self.effective_time(t))

    @property
    def heisenberg_generator(self) -> Optional[LindbladGenerator]:
        """The generator of the flow, None for single-step maps."""
        if self.kind == 'semigroup':
            return self.generator
        if self.kind == 'unitary':
            return modular_generator(self.reference)
        return None

    def propagator(self, t: float) -> CMatrix:
        """Heisenberg superoperator of Lambda_t on row-major vec."""
        self.check_time(t)
        if self.kind == 'semigroup':
            return self.generator.propagator(t)
        if self.kind == 'unitary':
            u = self.reference.k_eigenvectors
            phases = np.exp(1j * t * self.reference.k_eigenvalues)
            unitary = (u * phases) @ dagger(u)
            return sprepost(unitary, dagger(unitary))
        return np.linalg.matrix_power(self.cp_map.superoperator, self.steps(t))

    def evolve(self, t: float, x: CMatrix) -> CMatrix:
        self.check_time(t)
        if self.kind == 'unitary':
            return modular_flow(x, t, self.reference)
        if self.kind == 'map':
            for _ in range(self.steps(t)):
                x = self.cp_map.apply(x)
            return np.array(x, dtype=complex)
        return unvec(self.propagator(t) @ vec(x))

    def evolve_state(self, t: float, rho: CMatrix) -> CMatrix:
        """Schroedinger dual Lambda*_t, tr(Lambda*_t(rho) X) = tr(rho Lambda_t(X))."""
        self.check_time(t)
        if self.kind == 'unitary':
            return modular_flow(rho, -t, self.reference)
        if self.kind == 'map':
            for _ in range(self.steps(t)):
                rho = self.cp_map.apply_dual(rho)
            return np.array(rho, dtype=complex)
        return unvec(dagger(self.propagator(t)) @ vec(rho))

    def invariance_residual(self) -> float:
        if self.kind == 'unitary':
            return 0.0
        if self.kind == 'map':
            return self.cp_map.invariance_residual(self.reference)
        return self.generator.invariance_residual(self.reference)

    def unit_residual(self) -> float:
        if self.kind == 'unitary':
            return 0.0
        if self.kind == 'map':
            return self.cp_map.unital_residual()
        return self.generator.unit_residual()

    def to_dict(self) -> dict:
        data = {'kind': self.kind}
        if self.kind == 'map':
            data['kraus_count'] = len(self.cp_map.kraus)
        if self.kind == 'semigroup':
            data['generator'] = self.generator.label
            data['jump_count'] = len(self.generator.jumps)
        return data


def evolve(spec: DynamicsSpec, t: float, x: CMatrix) -> CMatrix:
    """Lambda_t(X); raises NegativeTime for t < 0 on maps and semigroups."""
    return spec.evolve(t, x)


def evolve_factorized(generator: LindbladGenerator, t: float, x: CMatrix,
                      ref: ReferenceState) -> CMatrix:
    """tau_t(exp(t L_dis)(X)), the detailed-balance factorization of Lambda_t."""
    if t < 0:
        raise NegativeTime(f'semigroup dynamics is defined for t >= 0, got {t}')
    dissipated = unvec(generator.dissipative_part().propagator(t) @ vec(x))
    return modular_flow(dissipated, t, ref)


# Detailed balance

@dataclass
class DetailedBalanceReport:
    commutation_residual: float
    self_adjoint_residual: float
    scale: float
    tolerance: float
    coherent_residual: Optional[float] = None

    @property
    def commutes(self) -> bool:
        return self.commutation_residual <= self.threshold

    @property
    def self_adjoint(self) -> bool:
        return self.self_adjoint_residual <= self.threshold

    @property
    def coherent_ok(self) -> bool:
        return self.coherent_residual is None or self.coherent_residual <= self.threshold

    @property
    def threshold(self) -> float:
        return self.tolerance * max(self.scale, 1e-3)

    @property
    def passed(self) -> bool:
        return self.commutes and self.self_adjoint and self.coherent_ok

    def to_dict(self) -> dict:
        return {
            'commutation_residual': self.commutation_residual,
            'self_adjoint_residual': self.self_adjoint_residual,
            'coherent_residual': self.coherent_residual,
            'scale': self.scale,
            'threshold': self.threshold,
            'commutes': self.commutes,
            'self_adjoint': self.self_adjoint,
            'passed': self.passed,
        }


def detailed_balance_check(l_dis: LindbladGenerator, ref: ReferenceState,
                           tol: float = DETAILED_BALANCE_TOL,
                           coherent: Optional[LindbladGenerator] = None) -> DetailedBalanceReport:
    """
    Residuals, in the GNS representation, of [L_dis, delta_K] and of
    L_dis - L_dis^star. Everything passed as `l_dis` counts as dissipative,
    including any Hamiltonian part it carries.

    With `coherent` given, also checks that its generator is GNS
    anti-self-adjoint and commutes with L_dis, which is what the factorized
    form needs when the coherent part differs from K.
    """
    gns = ref.gns
    m_dis = gns.represent(l_dis.superoperator)
    delta = gns.represent(modular_generator(ref).superoperator)
    commutation = frobenius(m_dis @ delta - delta @ m_dis)
    self_adjoint = frobenius(m_dis - dagger(m_dis))
    coherent_residual = None
    if coherent is not None:
        m_coh = gns.represent(coherent.superoperator)
        coherent_residual = (frobenius(m_coh @ m_dis - m_dis @ m_coh)
                             + frobenius(m_coh + dagger(m_coh)))
    report = DetailedBalanceReport(commutation, self_adjoint, frobenius(m_dis), tol,
                                   coherent_residual)
    logger.debug('detailed balance: commutation %.2e, self-adjointness %.2e, coherent %s',
                 commutation, self_adjoint, coherent_residual)
    return report


# Reduced dynamics

def assignment(prep: Preparation, sigma: CMatrix, ref: ReferenceState) -> CMatrix:
    """
    Initial total state Psi*(sigma) assigned to a qubit state sigma:
    sigma (x) omega_B for replacement, a omega a^dagger with
    a = sigma^1/2 omega_Q^-1/2 for single. Other kinds have no assignment rule.
    """
    sigma = as_cmatrix(sigma, ref.shape.dQ, ref.shape.dQ)
    if prep.kind == 'replacement':
        return np.kron(sigma, ref.omega_B)
    if prep.kind == 'single':
        a = embed_Q(sqrtm_psd(sigma) @ inv_sqrtm(restrict_to_Q(ref)), ref.shape)
        return a @ ref.omega @ dagger(a)
    raise UnsupportedAssignment(
        f'{prep.kind} preparations do not define an assignment map')


def reduced_dynamics(spec: DynamicsSpec, prep: Preparation, t: float, sigma: CMatrix,
                     ref: ReferenceState) -> CMatrix:
    """Gamma*_t(sigma) = tr_B(Lambda*_t(Psi*(sigma)))."""
    initial = assignment(prep, sigma, ref)
    evolved = spec.evolve_state(t, initial)
    return partial_trace_B(evolved, ref.shape.dQ, ref.shape.dB)

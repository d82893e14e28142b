"""
GNS-space representation of maps and generators, the C1 (+) 1-perp block
structure, contraction margins and spectral gaps.

In GNS coordinates (x -> vec(x omega^1/2)) a unital omega-invariant map M
fixes u = vec(omega^1/2) from both sides, so

    M = [[1, <phi, .>], [0, M~]]   with   phi = 0,

and the decay of centred observables is governed by the compression M~ of M
to u-perp. For generators two rates are reported:

- lambda: smallest eigenvalue of -L_dis on u-perp, defined when the
  dissipative part satisfies detailed balance;
- gamma: smallest eigenvalue of -(L + L^star)/2 on u-perp, the tightest rate
  with ||Lambda_t(x)||_omega <= exp(-gamma t) ||x||_omega for every centred x.
  gamma <= 0 certifies nothing and is reported as invalid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la

from .algebra import ReferenceState
from .conf import DETAILED_BALANCE_TOL, KERNEL_TOL
from .dynamics import (
    CpMap, DetailedBalanceReport, DynamicsSpec, LindbladGenerator, detailed_balance_check,
)
from .exceptions import DimensionMismatch, NotDetailedBalance
from .numkernel import CMatrix, dagger, frobenius, herm_eig

logger = logging.getLogger(__name__)

GAP_MODES = ('detailed_balance', 'symmetrized')

GAMMA_DEFINITION = ('gamma = smallest eigenvalue of -(L + L^star)/2 on the orthogonal '
                    'complement of 1 in the GNS space')


@dataclass
class GnsOperator:
    """M with vec(Lambda(x) omega^1/2) = M vec(x omega^1/2); unit = vec(omega^1/2)."""
    matrix: CMatrix
    unit: np.ndarray

    @classmethod
    def from_superoperator(cls, superoperator: CMatrix, ref: ReferenceState) -> 'GnsOperator':
        n2 = ref.n ** 2
        if superoperator.shape != (n2, n2):
            raise DimensionMismatch(
                f'superoperator must be {n2}x{n2} for n={ref.n}, got {superoperator.shape}')
        return cls(ref.gns.represent(superoperator), ref.gns.unit)

    def unit_residuals(self) -> Tuple[float, float]:
        """(||M u - u||, ||M^dagger u - u||): unitality and invariance."""
        u = self.unit
        return (float(np.linalg.norm(self.matrix @ u - u)),
                float(np.linalg.norm(dagger(self.matrix) @ u - u)))


def to_gns_matrix(dynamics: Union[CpMap, LindbladGenerator, DynamicsSpec, CMatrix],
                  ref: ReferenceState, t: Optional[float] = None) -> GnsOperator:
    """
    GNS matrix of a map (CpMap, a DynamicsSpec at time t, a raw Heisenberg
    superoperator) or of a generator (LindbladGenerator, or its propagator at
    time t when t is given).
    """
    if isinstance(dynamics, CpMap):
        superoperator = dynamics.superoperator
    elif isinstance(dynamics, LindbladGenerator):
        superoperator = dynamics.superoperator if t is None else dynamics.propagator(t)
    elif isinstance(dynamics, DynamicsSpec):
        superoperator = dynamics.propagator(1.0 if t is None else t)
    else:
        superoperator = np.asarray(dynamics, dtype=complex)
    return GnsOperator.from_superoperator(superoperator, ref)


def complement_basis(unit: np.ndarray) -> CMatrix:
    """Orthonormal columns spanning the orthogonal complement of `unit`."""
    return la.null_space(unit.conj()[None, :])


@dataclass
class BlockDecomposition:
    """
    M against u (+) u-perp. phi_residual is the norm of the row block <phi, .>,
    column_residual that of the column block below the corner.
    """
    corner: complex
    phi_residual: float
    column_residual: float
    tilde_block: CMatrix
    basis: CMatrix

    def reassemble(self, unit: np.ndarray) -> CMatrix:
        """[[1, 0], [0, M~]] mapped back to the original coordinates."""
        return np.outer(unit, unit.conj()) + self.basis @ self.tilde_block @ dagger(self.basis)


def block_decompose(op: GnsOperator) -> BlockDecomposition:
    """Split M into the corner, the phi row, the column and the compression M~."""
    u = op.unit
    basis = complement_basis(u)
    m = op.matrix
    corner = complex(np.vdot(u, m @ u))
    phi_residual = float(np.linalg.norm(u.conj() @ m @ basis))
    column_residual = float(np.linalg.norm(dagger(basis) @ m @ u))
    tilde = dagger(basis) @ m @ basis
    if phi_residual > 1e-10:
        logger.info('map is not omega-invariant: phi residual %.3e', phi_residual)
    return BlockDecomposition(corner, phi_residual, column_residual, tilde, basis)


def contraction_check(tilde_block: CMatrix) -> float:
    """1 - largest singular value of M~; >= 0 for a contraction."""
    if tilde_block.size == 0:
        return 1.0
    return float(1.0 - la.svdvals(tilde_block)[0])


@dataclass
class SpectralReport:
    mode: str
    gap_gamma: Optional[float]
    gap_lambda: Optional[float]
    gamma_valid: bool
    kernel_dim_on_complement: int
    phi_residual: float
    contraction_margin: float
    self_adjoint_residual: Optional[float] = None
    detailed_balance: Optional[DetailedBalanceReport] = None
    decay_fit: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.gamma_valid or self.gap_lambda is not None

    def decay_rate(self) -> Tuple[float, str]:
        """
        Rate fed to the gap bound and its source: lambda when available, then
        a valid gamma (per step for maps), then 0 for the bare contraction bound.
        """
        if self.gap_lambda is not None:
            return max(self.gap_lambda, 0.0), 'lambda'
        if self.gamma_valid and self.gap_gamma is not None:
            return self.gap_gamma, 'gamma_step' if self.mode == 'map' else 'gamma'
        return 0.0, 'contraction'

    def to_dict(self) -> dict:
        return {
            'mode': self.mode,
            'gap_gamma': self.gap_gamma,
            'gap_lambda': self.gap_lambda,
            'gamma_valid': self.gamma_valid,
            'valid': self.valid,
            'kernel_dim_on_complement': self.kernel_dim_on_complement,
            'phi_residual': self.phi_residual,
            'contraction_margin': self.contraction_margin,
            'self_adjoint_residual': self.self_adjoint_residual,
            'detailed_balance': (self.detailed_balance.to_dict()
                                 if self.detailed_balance else None),
            'decay_fit': self.decay_fit,
            'gamma_definition': GAMMA_DEFINITION,
            'warnings': list(self.warnings),
        }


def _compressed_hermitian_spectrum(matrix: CMatrix, basis: CMatrix,
                                   tol: float) -> Tuple[np.ndarray, float]:
    """
    Eigenvalues of -(A + A^dagger)/2 for the compression A of `matrix`,
    together with the anti-Hermitian residual ||A - A^dagger||_F.
    """
    compressed = dagger(basis) @ matrix @ basis
    residual = frobenius(compressed - dagger(compressed))
    eigenvalues, _ = herm_eig(-0.5 * (compressed + dagger(compressed)), tol=np.inf)
    return eigenvalues, residual


def _contraction_margin_at_unit_time(generator: LindbladGenerator, ref: ReferenceState,
                                     basis: CMatrix) -> float:
    propagator = ref.gns.represent(generator.propagator(1.0))
    return contraction_check(dagger(basis) @ propagator @ basis)


def spectral_gap(generator: LindbladGenerator, ref: ReferenceState,
                 mode: str = 'detailed_balance', kernel_tol: float = KERNEL_TOL,
                 db_tol: float = DETAILED_BALANCE_TOL) -> SpectralReport:
    """
    Spectral data of a generator on the orthogonal complement of 1.

    detailed_balance: lambda from -L_dis (raises NotDetailedBalance when the
    dissipative part fails the check), plus gamma of the full generator.
    symmetrized: gamma only; gamma <= kernel_tol is reported invalid.
    """
    if mode not in GAP_MODES:
        raise ValueError(f'unknown gap mode {mode!r}')
    gns = ref.gns
    basis = complement_basis(gns.unit)
    full = gns.represent(generator.superoperator)
    warnings: List[str] = []

    db_report = None
    gap_lambda = None
    self_adjoint_residual = None
    kernel_dim = 0
    if mode == 'detailed_balance':
        db_report = detailed_balance_check(generator.dissipative_part(), ref, db_tol,
                                           coherent=generator.coherent_part())
        if not db_report.passed:
            raise NotDetailedBalance(
                'dissipative part fails detailed balance: commutation residual '
                f'{db_report.commutation_residual:.3e}, self-adjointness residual '
                f'{db_report.self_adjoint_residual:.3e}, coherent residual '
                f'{db_report.coherent_residual}')
        dissipative = gns.represent(generator.dissipative_part().superoperator)
        eigenvalues, self_adjoint_residual = _compressed_hermitian_spectrum(
            dissipative, basis, kernel_tol)
        gap_lambda = float(eigenvalues[0]) if eigenvalues.size else 0.0
        kernel_dim = int(np.sum(eigenvalues < kernel_tol))

    sym_eigenvalues, _ = _compressed_hermitian_spectrum(full, basis, kernel_tol)
    gap_gamma = float(sym_eigenvalues[0]) if sym_eigenvalues.size else 0.0
    gamma_valid = gap_gamma > kernel_tol
    if mode == 'symmetrized':
        kernel_dim = int(np.sum(sym_eigenvalues < kernel_tol))
    if not gamma_valid:
        warnings.append(f'symmetrized rate gamma = {gap_gamma:.3e} certifies no decay')
    if kernel_dim:
        warnings.append(
            f'generator is not primitive: {kernel_dim} eigenvalue(s) below {kernel_tol:.0e} '
            'on the complement of 1, the gap bound is vacuous')
        logger.warning('non-primitive generator (%s): kernel dimension %d on 1-perp',
                       generator.label, kernel_dim)

    phi_residual = float(np.linalg.norm(gns.unit.conj() @ full @ basis))
    report = SpectralReport(
        mode=mode,
        gap_gamma=gap_gamma,
        gap_lambda=gap_lambda,
        gamma_valid=gamma_valid,
        kernel_dim_on_complement=kernel_dim,
        phi_residual=phi_residual,
        contraction_margin=_contraction_margin_at_unit_time(generator, ref, basis),
        self_adjoint_residual=self_adjoint_residual,
        detailed_balance=db_report,
        warnings=warnings,
    )
    logger.info('spectral gap (%s, %s): lambda=%s gamma=%.6g kernel=%d',
                generator.label, mode, gap_lambda, gap_gamma, kernel_dim)
    return report


def map_contraction_report(cp_map: CpMap, ref: ReferenceState,
                           kernel_tol: float = KERNEL_TOL) -> SpectralReport:
    """
    Block structure and per-step contraction rate gamma_step = -ln ||M~|| of a
    single-step map.
    """
    blocks = block_decompose(to_gns_matrix(cp_map, ref))
    margin = contraction_check(blocks.tilde_block)
    norm = 1.0 - margin
    gamma_valid = norm < 1.0 - kernel_tol
    gamma = -math.log(norm) if norm > 0 else math.inf
    warnings = []
    if not gamma_valid:
        warnings.append('map is not strictly contractive on the complement of 1')
    if blocks.phi_residual > 1e-10:
        warnings.append(f'map does not leave omega invariant (phi residual '
                        f'{blocks.phi_residual:.3e}); the block form does not apply')
    return SpectralReport(
        mode='map',
        gap_gamma=gamma if math.isfinite(gamma) else None,
        gap_lambda=None,
        gamma_valid=gamma_valid and math.isfinite(gamma),
        kernel_dim_on_complement=0,
        phi_residual=blocks.phi_residual,
        contraction_margin=margin,
        warnings=warnings,
    )


def dynamics_report(spec: DynamicsSpec, kernel_tol: float = KERNEL_TOL,
                    db_tol: float = DETAILED_BALANCE_TOL) -> SpectralReport:
    """
    Spectral report for any dynamics kind. Semigroups try detailed balance
    first and fall back to the symmetrized rate with a notice.
    """
    ref = spec.reference
    if spec.kind == 'map':
        return map_contraction_report(spec.cp_map, ref, kernel_tol)
    generator = spec.heisenberg_generator
    if spec.kind == 'semigroup':
        try:
            return spectral_gap(generator, ref, 'detailed_balance', kernel_tol, db_tol)
        except NotDetailedBalance as exc:
            logger.warning('%s; falling back to the symmetrized gap', exc)
            report = spectral_gap(generator, ref, 'symmetrized', kernel_tol)
            report.warnings.insert(0, f'detailed balance not satisfied, '
                                      f'symmetrized mode used: {exc}')
            return report
    return spectral_gap(generator, ref, 'symmetrized', kernel_tol)


def decay_rate_oracle(generator: LindbladGenerator, ref: ReferenceState,
                      seed: Optional[int] = None, step: float = 1.0,
                      max_steps: int = 5000, rtol: float = 1e-13) -> float:
    """
    Asymptotic decay rate of ||exp(t L_dis) eta||_omega for a random centred
    eta, by renormalized stepping with exp(step L_dis). Independent of the
    eigensolver used by spectral_gap.
    """
    gns = ref.gns
    propagator = gns.represent(generator.dissipative_part().propagator(step))
    u = gns.unit
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(u.size) + 1j * rng.standard_normal(u.size)
    v -= u * np.vdot(u, v)
    v /= np.linalg.norm(v)
    rate = previous = math.inf
    for _ in range(max_steps):
        w = propagator @ v
        w -= u * np.vdot(u, w)
        growth = float(np.linalg.norm(w))
        if growth == 0.0:
            return math.inf
        rate = -math.log(growth) / step
        v = w / growth
        if abs(rate - previous) <= rtol * max(abs(rate), 1e-300):
            break
        previous = rate
    return rate

"""
Assembly of a runnable model (reference state, preparation, dynamics and
encoded state) from a ModelConfig.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional

import numpy as np

from .algebra import ReferenceState
from .config import ModelConfig
from .conf import Tolerances
from .dynamics import (
    CpMap, DynamicsSpec, LindbladGenerator, RateFamily, davies_generator,
    depolarizing_generator,
)
from .exceptions import ParseError
from .fidelity import default_t_max, time_grid
from .prep import (
    Preparation, QubitTarget, custom_preparation, filtered_preparation,
    replacement_operation, single_perturbation,
)
from .spectral import SpectralReport, dynamics_report

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Model:
    ref: ReferenceState
    prep: Preparation
    spec: DynamicsSpec
    psi: np.ndarray
    config: Optional[ModelConfig] = None
    warnings: List[str] = field(default_factory=list)
    tolerances: Tolerances = field(default_factory=Tolerances)

    @cached_property
    def report(self) -> SpectralReport:
        return dynamics_report(self.spec, self.tolerances.kernel,
                               self.tolerances.detailed_balance)

    def spectral_report(self) -> SpectralReport:
        return self.report

    def time_grid(self) -> List[float]:
        """Grid from the config; t_max defaults to 10 over the certified rate."""
        grid = self.config.time_grid if self.config else {'points': 200, 'spacing': 'log'}
        t_max = grid.get('t_max')
        if t_max is None:
            rate, _ = self.report.decay_rate()
            t_max = default_t_max(rate)
        return time_grid(t_max, grid.get('points', 200), grid.get('spacing', 'log'))


def _target(data: dict, unit_tol: float) -> QubitTarget:
    if 'psi' in data:
        try:
            return QubitTarget.pure(data['psi'], tol=unit_tol)
        except ValueError as exc:
            raise ParseError(str(exc), 'preparation.psi') from exc
    try:
        return QubitTarget.mixed(data['sigma'])
    except ValueError as exc:
        raise ParseError(str(exc), 'preparation.sigma') from exc


def build_preparation(data: dict, ref: ReferenceState, unit_tol: float = 1e-10) -> Preparation:
    kind = data['kind']
    if kind == 'single':
        return single_perturbation(_target(data, unit_tol), ref)
    if kind == 'replacement':
        return replacement_operation(_target(data, unit_tol), ref)
    if kind == 'filtered':
        return filtered_preparation(data['a'], data['p'], ref)
    return custom_preparation(data['kraus'], ref)


def build_dynamics(data: dict, ref: ReferenceState) -> DynamicsSpec:
    kind = data['kind']
    if kind == 'unitary':
        return DynamicsSpec.unitary(ref)
    if kind == 'map':
        return DynamicsSpec.from_map(CpMap.from_kraus(data['kraus'], ref), ref)
    if kind == 'lindblad':
        hamiltonian = data['hamiltonian_part']
        if isinstance(hamiltonian, str):
            hamiltonian = ref.K.copy()
        generator = LindbladGenerator(np.asarray(hamiltonian, dtype=complex),
                                      list(data['jumps']))
    elif kind == 'davies':
        family = data['rate_family']
        generator = davies_generator(ref, data['couplings'],
                                     RateFamily(family['kind'], family['g']))
    else:
        generator = depolarizing_generator(ref, data['gamma_q'], data['gamma_b'])
    return DynamicsSpec.semigroup(generator, ref)


def build_model(config: ModelConfig, tolerances: Optional[Tolerances] = None) -> Model:
    """
    Reference state first (NotFaithful surfaces here), then preparation and
    dynamics. The encoded state psi must be a unit vector. The tolerances
    travel with the model into its spectral report.
    """
    tolerances = tolerances or Tolerances()
    unit_tol = tolerances.unit_vector
    ref = ReferenceState.from_hamiltonian(config.shape, config.hamiltonian, config.beta,
                                          tolerances.faithful)
    norm = float(np.linalg.norm(config.psi))
    if abs(norm - 1.0) > unit_tol:
        raise ParseError(f'psi must be a unit vector, got norm {norm:.15g}', 'psi')
    prep = build_preparation(config.preparation, ref, unit_tol)
    spec = build_dynamics(config.dynamics, ref)
    warnings = list(config.warnings) + list(ref.warnings) + list(prep.warnings)
    if spec.invariance_residual() > tolerances.invariance:
        warnings.append(f'dynamics does not leave omega invariant '
                        f'(residual {spec.invariance_residual():.3e})')
    logger.debug('built model n=%d, dynamics %s, preparation %s',
                 config.shape.n, spec.kind, prep.kind)
    return Model(ref=ref, prep=prep, spec=spec, psi=np.array(config.psi, dtype=complex),
                 config=config, warnings=warnings, tolerances=tolerances)

"""
Named invariant checks shared by the management commands.

Each check is a residual compared against a tolerance; a command collects
them into its result envelope and fails when any of them does not pass.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .algebra import kms_check
from .config import ModelConfig
from .conf import Tolerances
from .dynamics import semigroup_is_cp
from .exceptions import InvariantViolation
from .fidelity import FidelityCurve
from .model import Model
from .numkernel import (
    frobenius, hermiticity_residual, operator_norm, random_hermitian, random_matrix,
)
from .prep import build_x, build_y

logger = logging.getLogger(__name__)

KMS_SAMPLES = 100


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {'name': self.name, 'residual': float(self.residual),
                'tolerance': self.tolerance, 'passed': self.passed}


def config_checks(config: ModelConfig, tol: Tolerances) -> List[Check]:
    """Checks on the raw config, before any model is built."""
    h = config.hamiltonian
    return [
        Check('hamiltonian hermiticity',
              hermiticity_residual(h) / max(frobenius(h), 1.0), tol.hermitian),
        Check('psi unit', abs(float(np.linalg.norm(config.psi)) - 1.0), tol.unit_vector),
    ]


def _kms_residual(model: Model, rng: np.random.Generator) -> float:
    """Worst KMS residual over random pairs, relative to ||A|| ||B||."""
    ref = model.ref
    worst = 0.0
    for _ in range(KMS_SAMPLES):
        a = random_matrix(ref.n, rng)
        b = random_matrix(ref.n, rng)
        scale = operator_norm(a) * operator_norm(b)
        worst = max(worst, kms_check(a, b, ref) / max(scale, 1e-300))
    return worst


def model_checks(model: Model, tol: Tolerances, seed: Optional[int] = None) -> List[Check]:
    """Structural invariants of a built model."""
    rng = np.random.default_rng(seed)
    ref, prep, spec = model.ref, model.prep, model.spec
    checks = [
        Check('omega normalization', abs(np.trace(ref.omega).real - 1.0), tol.normalization * 100),
        Check('K commutes with omega', frobenius(ref.K @ ref.omega - ref.omega @ ref.K)
              / max(frobenius(ref.K), 1.0), tol.hermitian),
        Check('kraus normalization', prep.normalization_residual(ref), tol.kraus),
        Check('kms residual', _kms_residual(model, rng), tol.kms),
        Check('centering x', abs(ref.expect(build_x(prep, ref))), tol.centering),
        Check('centering y', abs(ref.expect(build_y(model.psi, ref))), tol.centering),
        Check('dynamics invariance', spec.invariance_residual(), tol.invariance),
        Check('dynamics unit preservation', spec.unit_residual(), tol.invariance),
    ]
    restriction = prep.restriction_residual(ref)
    if restriction is not None:
        checks.append(Check('restriction to target', restriction, tol.restriction))
    if spec.kind == 'semigroup':
        _, relative = semigroup_is_cp(spec.generator, tol=tol.choi)
        checks.append(Check('complete positivity', max(0.0, -relative), tol.choi))
    x = random_hermitian(ref.n, rng)
    y = random_matrix(ref.n, rng)
    checks.append(Check('gns isometry', ref.gns.isometry_residual(x, y), tol.identity))
    return checks


def curve_checks(curve: FidelityCurve, model: Model, tol: Tolerances) -> List[Check]:
    """Identity and ordering along a computed curve."""
    checks = [Check('correlation identity', curve.identity_residual(), tol.identity)]
    if model.spec.invariance_residual() <= tol.invariance:
        checks.append(Check('bound ordering', curve.ordering_violation(), tol.ordering))
    low = min(curve.f_direct, default=0.0)
    checks.append(Check('fidelity non-negative', max(0.0, -low), tol.identity))
    return checks


def failures(checks: List[Check]) -> List[dict]:
    return [c.to_dict() for c in checks if not c.passed]


def raise_on_failure(checks: List[Check]) -> None:
    failed = failures(checks)
    if failed:
        for f in failed:
            logger.error('check %s failed: residual %.3e > %.1e',
                         f['name'], f['residual'], f['tolerance'])
        raise InvariantViolation(failed)
